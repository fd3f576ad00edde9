"""Command-line driver.

Exit codes: 0 success, 1 data error, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .alluvial import alluvial, render_alluvial_svg
from .community import WeightedGraph, louvain, project_level
from .errors import DataError, IoFailure, UsageError
from .evalkit import GroundTruth, align, evaluate, rows_to_csv, rows_to_table
from .hintnet import build_hint_graph
from .identity import cluster, cluster_h1
from .ledger import parse_ledger, validate, write_ledger
from .partition import Partition, read_partition, write_partition
from .simgen import SimConfig, describe, generate

log = logging.getLogger("btcreid")

SIM_FLAGS = {
    "seed": int, "users": int, "txs": int, "addr_reuse_prob": float, "change_prob": float,
    "fanout_max": int, "coinbase_every": int, "amount_min": int, "amount_max": int,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _write_manifest(out: Path, name: str, argv: list[str], args, inputs=()) -> None:
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")}
    manifest = {
        "tool": "btcreid",
        "version": __version__,
        "command": args.command,
        "argv": argv,
        "inputs": [str(p) for p in inputs],
        "flags": flags,
        "seed": getattr(args, "seed", None),
        "out": str(out),
    }
    (out / f"{name}.manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n")


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_ledger(path):
    ledger = parse_ledger(path)
    problems = validate(ledger)
    if problems:
        raise DataError(f"{path}: " + "; ".join(map(str, problems[:5])))
    return ledger


def _run_name(path: str) -> str:
    name = Path(path).name
    for suffix in (".csv", ".partition"):
        if name.endswith(suffix):
            name = name[: -len(suffix)]
    return name


def _sim_config(args) -> SimConfig:
    values = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            values.update(json.load(fh))
    for key in SIM_FLAGS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    unknown = set(values) - set(SIM_FLAGS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return SimConfig(**values)


# -- commands ---------------------------------------------------------------

def cmd_generate(args, argv):
    config = _sim_config(args)
    out = _outdir(args)
    ledger, gt = generate(config)
    write_ledger(ledger, out / "ledger.jsonl")
    gt.write(out / "truth.csv")
    (out / "config.json").write_text(json.dumps(config.to_dict(), indent=2) + "\n")
    _write_manifest(out, "generate", argv, args)
    info = describe(ledger, gt)
    print(" ".join(f"{k}={v}" for k, v in info.items()))
    return out / "ledger.jsonl", out / "truth.csv"


def _cluster_h4(ledger, h1, args, out: Path) -> list[Path]:
    hints = build_hint_graph(ledger, h1, args.max_recipients)
    hints.write_edgelist(out / "h4.hints.edges")
    hints.write_isolates(out / "h4.hints.isolates")
    graph = WeightedGraph.from_hint_graph(hints, weighted=args.weighted)
    dendro = louvain(graph, args.resolution)
    levels = [args.level] if args.level is not None else range(1, len(dendro) + 1)
    for level in levels:
        dendro.level(level)  # raises LevelOutOfRange before anything is written
    written = []
    for level in levels:
        p = out / f"h4.l{level}.csv"
        write_partition(project_level(dendro, level, h1), p)
        (out / f"h4.l{level}.users.csv").write_text(dendro.level_csv(level))
        written.append(p)
    (out / "h4.levels.json").write_text(dendro.summary_json())
    if not args.no_plot:
        from .plotting import plot_dendrogram_levels
        plot_dendrogram_levels(dendro.summary(), out / "h4.levels.png")
    for s in dendro.summary():
        print(f"level {s['level']}: {s['communities']} communities, modularity {s['modularity']:.4f}")
    return written


def cmd_cluster(args, argv):
    ledger = _load_ledger(args.ledger)
    out = _outdir(args)
    if args.heuristic == "h4":
        written = _cluster_h4(ledger, cluster_h1(ledger), args, out)
    else:
        if args.level is not None:
            raise UsageError("--level only applies to h4")
        part = cluster(ledger, args.heuristic)
        p = out / f"{args.heuristic}.partition.csv"
        write_partition(part, p)
        print(f"{args.heuristic}: {part.n_clusters} clusters over {len(part)} addresses")
        written = [p]
    _write_manifest(out, f"cluster-{args.heuristic}", argv, args, [args.ledger])
    return written


def _ground_truth(args) -> GroundTruth:
    gt = GroundTruth.read(args.truth)
    if args.label_prefix:
        labels = {a: u for a, u in gt.labels.items() if u.startswith(args.label_prefix)}
        if not labels:
            raise DataError(f"no ground-truth user label starts with {args.label_prefix!r}")
        gt = GroundTruth(labels)
    return gt


def _runs(paths, names=None):
    if names and len(names) != len(paths):
        raise UsageError("--names needs one name per partition file")
    return [((names[i] if names else _run_name(p)), read_partition(p)) for i, p in enumerate(paths)]


def cmd_evaluate(args, argv):
    gt = _ground_truth(args)
    runs = _runs(args.partitions, args.names)
    rows = evaluate(gt, runs, drop_uncovered=args.drop_uncovered)
    out = _outdir(args)
    (out / "report.csv").write_text(rows_to_csv(rows))
    table = rows_to_table(rows)
    (out / "report.txt").write_text(table)
    if not args.no_plot:
        from .plotting import plot_report
        plot_report(rows, out / "report.png")
    _write_manifest(out, "evaluate", argv, args, [args.truth, *args.partitions])
    print(table, end="")
    return rows


def cmd_alluvial(args, argv):
    if not args.partitions:
        raise UsageError("alluvial needs the ground truth and at least one partition")
    gt = _ground_truth(args)
    runs = _runs(args.partitions, args.names)
    aligned = [align(gt, part, args.drop_uncovered)[1] for _, part in runs]
    universe = gt.partition.universe
    for p in aligned:
        universe &= p.universe
    truth = gt.partition.restrict(universe)
    names = [gt.labels[m[0]] for m in truth.clusters()]
    axes = [("truth", truth, names)]
    axes += [(name, p.restrict(universe)) for (name, _), p in zip(runs, aligned)]
    spec = alluvial(axes, max_sweeps=args.max_sweeps)
    out = _outdir(args)
    (out / "alluvial.json").write_text(spec.to_json())
    svg = Path(args.svg) if args.svg else out / "alluvial.svg"
    render_alluvial_svg(spec, svg)
    _write_manifest(out, "alluvial", argv, args, [args.truth, *args.partitions])
    print(f"{len(spec.axes)} axes, {len(spec.flows)} flows, {len(universe)} addresses -> {svg}")
    return spec


def cmd_describe(args, argv):
    ledger = _load_ledger(args.ledger)
    gt = GroundTruth.read(args.truth) if args.truth else None
    print(json.dumps(describe(ledger, gt), indent=2))


def cmd_pipeline(args, argv):
    out = _outdir(args)
    ledger_path, truth_path = cmd_generate(args, argv)
    ledger = _load_ledger(ledger_path)
    h1 = cluster_h1(ledger)
    paths = []
    for h in ("h1", "h2", "h3"):
        p = out / f"{h}.partition.csv"
        write_partition(h1 if h == "h1" else cluster(ledger, h), p)
        paths.append(p)
    args.level = None
    levels = _cluster_h4(ledger, h1, args, out)
    paths += levels
    names = ["H1", "H2", "H3"] + [f"H4-l{i + 1}" for i in range(len(levels))]
    eval_args = argparse.Namespace(
        command="evaluate", truth=str(truth_path), partitions=[str(p) for p in paths], names=names,
        label_prefix=None, drop_uncovered=args.drop_uncovered, out=str(out), no_plot=args.no_plot)
    cmd_evaluate(eval_args, argv)
    pick = 2 if len(levels) >= 2 else len(levels)
    all_args = argparse.Namespace(
        command="alluvial", truth=str(truth_path), partitions=[str(paths[0]), str(levels[pick - 1])],
        names=["H1", f"H4-l{pick}"], label_prefix=None, drop_uncovered=args.drop_uncovered,
        out=str(out), svg=None, max_sweeps=50)
    cmd_alluvial(all_args, argv)
    _write_manifest(out, "pipeline", argv, args)


def cmd_rerun(args, argv):
    with open(args.manifest, encoding="utf-8") as fh:
        manifest = json.load(fh)
    return main(manifest["argv"])


# -- parser -----------------------------------------------------------------

def _add_sim_flags(p):
    p.add_argument("--config", help="JSON file with generator settings; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--users", type=int)
    p.add_argument("--txs", type=int)
    p.add_argument("--addr-reuse-prob", dest="addr_reuse_prob", type=float)
    p.add_argument("--change-prob", dest="change_prob", type=float)
    p.add_argument("--fanout-max", dest="fanout_max", type=int)
    p.add_argument("--coinbase-every", dest="coinbase_every", type=int)
    p.add_argument("--amount-min", dest="amount_min", type=int)
    p.add_argument("--amount-max", dest="amount_max", type=int)


def _add_h4_flags(p):
    p.add_argument("--max-recipients", type=int, default=10,
                   help="hint edges need fewer distinct recipient users than this (default 10)")
    p.add_argument("--weighted", action="store_true", help="use hint counts as edge weights")
    p.add_argument("--resolution", type=float, default=1.0)


def _add_eval_flags(p):
    p.add_argument("truth", help="ground-truth CSV (address,user)")
    p.add_argument("partitions", nargs="*", help="partition CSVs (address,cluster)")
    p.add_argument("--names", nargs="+", help="display name per partition file")
    p.add_argument("--label-prefix", help="keep only users whose label starts with this")
    p.add_argument("--drop-uncovered", action="store_true",
                   help="drop labeled addresses missing from a partition instead of making them singletons")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="btcreid", description="Bitcoin address clustering and evaluation.")
    parser.add_argument("--version", action="version", version=f"btcreid {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write a synthetic ledger and its ground truth")
    _add_sim_flags(p)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("cluster", help="cluster ledger addresses with one heuristic")
    p.add_argument("ledger")
    p.add_argument("--heuristic", choices=["h1", "h2", "h3", "h4"], default="h1")
    p.add_argument("--level", type=int, help="write only this H4 level")
    _add_h4_flags(p)
    p.add_argument("--no-plot", action="store_true")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("evaluate", help="score partitions against ground truth")
    _add_eval_flags(p)
    p.add_argument("--no-plot", action="store_true")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("alluvial", help="alluvial diagram of ground truth against partitions")
    _add_eval_flags(p)
    p.add_argument("--svg", help="SVG path (default OUT/alluvial.svg)")
    p.add_argument("--max-sweeps", type=int, default=50)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_alluvial)

    p = sub.add_parser("describe", help="summary counts of a ledger")
    p.add_argument("ledger")
    p.add_argument("truth", nargs="?")
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("pipeline", help="generate, cluster, evaluate and draw in one go")
    _add_sim_flags(p)
    _add_h4_flags(p)
    p.add_argument("--drop-uncovered", action="store_true")
    p.add_argument("--no-plot", action="store_true")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("rerun", help="repeat a command from its manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_rerun)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        result = args.func(args, argv)
        return result if isinstance(result, int) else 0
    except UsageError as exc:
        print(f"btcreid: usage error: {exc}", file=sys.stderr)
        return 2
    except (DataError, IoFailure) as exc:
        print(f"btcreid: error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"btcreid: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"btcreid: usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
