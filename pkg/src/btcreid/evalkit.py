"""Scoring heuristic partitions against labeled addresses."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, astuple
from typing import Mapping, Sequence

from .errors import EmptyOverlap, MalformedRecord
from .ledger import read_labels, write_labels
from .metrics import anmi, nmi, pair_counts, precision_recall_f1
from .partition import Partition

COLUMNS = ("heuristic", "precision", "recall", "f1", "nmi", "anmi")


class GroundTruth:
    """Known owner label for a set of addresses."""

    def __init__(self, labels: Mapping[str, str]):
        if not labels:
            raise MalformedRecord(0, "ground truth is empty")
        for a, lab in labels.items():
            if not a or not isinstance(lab, str) or not lab:
                raise MalformedRecord(0, f"bad ground-truth entry {a!r} -> {lab!r}")
        self.labels = dict(labels)
        self.partition = Partition(self.labels)

    def __len__(self):
        return len(self.labels)

    @classmethod
    def read(cls, path) -> "GroundTruth":
        return cls(read_labels(path))

    def write(self, path):
        write_labels(self.labels, path)

    def with_prefix(self, prefix: str) -> "GroundTruth":
        """Only addresses whose user label starts with ``prefix``."""
        return GroundTruth({a: u for a, u in self.labels.items() if u.startswith(prefix)})

    def cluster_names(self) -> list[str]:
        """User label of each canonical cluster id."""
        names = [""] * self.partition.n_clusters
        for a, c in self.partition.assignment.items():
            names[c] = self.labels[a]
        return names


def align(gt: GroundTruth, predicted: Partition, drop_uncovered: bool = False):
    """Restrict both labelings to the labeled addresses.

    Labeled addresses missing from ``predicted`` become singletons on the
    predicted side, or are dropped from both sides with ``drop_uncovered``.
    """
    pa = predicted.assignment
    covered = [a for a in gt.labels if a in pa]
    if not covered:
        raise EmptyOverlap("no labeled address appears in the predicted partition")
    if drop_uncovered:
        universe = covered
        labels = {a: ("c", pa[a]) for a in covered}
    else:
        universe = list(gt.labels)
        labels = {a: ("c", pa[a]) if a in pa else ("s", a) for a in universe}
    truth = gt.partition if len(universe) == len(gt.labels) else gt.partition.restrict(universe)
    return truth, Partition(labels)


@dataclass(frozen=True)
class EvalRow:
    heuristic: str
    precision: float
    recall: float
    f1: float
    nmi: float
    anmi: float


def score(truth: Partition, predicted: Partition, name: str) -> EvalRow:
    p, r, f1 = precision_recall_f1(pair_counts(truth, predicted))
    return EvalRow(name, p, r, f1, nmi(truth, predicted), anmi(truth, predicted))


def evaluate(gt: GroundTruth, runs: Sequence[tuple[str, Partition]],
             drop_uncovered: bool = False) -> list[EvalRow]:
    if not runs:
        raise ValueError("evaluate needs at least one run")
    rows = []
    for name, part in runs:
        truth, pred = align(gt, part, drop_uncovered)
        rows.append(score(truth, pred, name))
    return rows


def rows_to_csv(rows: Sequence[EvalRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow([row.heuristic] + [repr(float(x)) for x in astuple(row)[1:]])
    return buf.getvalue()


def rows_to_table(rows: Sequence[EvalRow]) -> str:
    """Fixed-width table with two decimals per metric."""
    header = ["Heur.", "Precision", "Recall", "F1", "NMI", "aNMI"]
    body = [[r.heuristic] + [f"{x:.2f}" for x in astuple(r)[1:]] for r in rows]
    widths = [max(len(line[i]) for line in [header] + body) for i in range(len(header))]
    def fmt(line):
        first = line[0].ljust(widths[0])
        rest = "  ".join(c.rjust(w) for c, w in zip(line[1:], widths[1:]))
        return f"{first} | {rest}"
    sep = "-" * widths[0] + "-+-" + "-" * (sum(widths[1:]) + 2 * (len(widths) - 2))
    return "\n".join([fmt(header), sep] + [fmt(b) for b in body]) + "\n"


def read_rows(path) -> list[EvalRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [EvalRow(r["heuristic"], *(float(r[c]) for c in COLUMNS[1:])) for r in reader]
