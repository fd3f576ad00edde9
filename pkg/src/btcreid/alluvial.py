"""Alluvial diagrams: flow counting, barycenter layout, JSON and SVG output."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import IoFailure, UniverseMismatch
from .partition import Partition

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


@dataclass
class Axis:
    name: str
    sizes: list[int]
    labels: list[str]
    order: list[int]   # cluster ids, top to bottom


@dataclass(frozen=True)
class Flow:
    axis: int   # flow runs from axis ``axis`` to ``axis + 1``
    left: int
    right: int
    count: int


@dataclass
class AlluvialSpec:
    axes: list[Axis]
    flows: list[Flow] = field(default_factory=list)

    def flows_between(self, k: int) -> list[Flow]:
        return [f for f in self.flows if f.axis == k]

    def to_dict(self) -> dict:
        return {
            "axes": [
                {"name": ax.name,
                 "clusters": [{"id": c, "label": ax.labels[c], "size": ax.sizes[c]} for c in ax.order]}
                for ax in self.axes
            ],
            "flows": [{"axis": f.axis, "left": f.left, "right": f.right, "count": f.count}
                      for f in self.flows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "AlluvialSpec":
        axes = []
        for ax in d["axes"]:
            k = max((c["id"] for c in ax["clusters"]), default=-1) + 1
            sizes, labels = [0] * k, [""] * k
            for c in ax["clusters"]:
                sizes[c["id"]] = c["size"]
                labels[c["id"]] = c["label"]
            axes.append(Axis(ax["name"], sizes, labels, [c["id"] for c in ax["clusters"]]))
        flows = [Flow(f["axis"], f["left"], f["right"], f["count"]) for f in d["flows"]]
        return cls(axes, flows)


def _weighted_crossings(pairs: list[tuple[int, int, int]], n_right: int) -> int:
    """Sum of ``w1 * w2`` over flow pairs whose endpoints are in opposite order.

    ``pairs`` holds ``(left position, right position, weight)``. Flows sharing
    an endpoint never cross. Fenwick tree over right positions.
    """
    tree = [0] * (n_right + 1)
    total_seen = 0
    crossings = 0
    pairs = sorted(pairs)
    i = 0
    while i < len(pairs):
        j = i
        while j < len(pairs) and pairs[j][0] == pairs[i][0]:
            j += 1
        group = pairs[i:j]
        for _, r, w in group:
            # weight of earlier flows ending strictly below r
            s, x = 0, r + 1
            while x > 0:
                s += tree[x]
                x -= x & -x
            crossings += w * (total_seen - s)
        for _, r, w in group:
            x = r + 1
            while x <= n_right:
                tree[x] += w
                x += x & -x
            total_seen += w
        i = j
    return crossings


def crossings(spec: AlluvialSpec, orders: Optional[list[list[int]]] = None) -> int:
    orders = orders if orders is not None else [ax.order for ax in spec.axes]
    total = 0
    for k in range(len(spec.axes) - 1):
        lpos = {c: i for i, c in enumerate(orders[k])}
        rpos = {c: i for i, c in enumerate(orders[k + 1])}
        pairs = [(lpos[f.left], rpos[f.right], f.count) for f in spec.flows_between(k)]
        total += _weighted_crossings(pairs, len(orders[k + 1]))
    return total


def _barycenter_order(target: list[int], ref_order: list[int], links) -> list[int]:
    pos = {c: i for i, c in enumerate(ref_order)}
    num: dict[int, float] = {}
    den: dict[int, int] = {}
    for mine, other, w in links:
        num[mine] = num.get(mine, 0.0) + w * pos[other]
        den[mine] = den.get(mine, 0) + w
    return sorted(target, key=lambda c: (num[c] / den[c], c) if den.get(c) else (float(len(ref_order)), c))


def layout(spec: AlluvialSpec, max_sweeps: int = 50) -> AlluvialSpec:
    """Reorder clusters on each axis with alternating barycenter sweeps.

    A sweep is kept only if it does not increase the crossing count, so the
    result is never worse than the starting order.
    """
    orders = [list(ax.order) for ax in spec.axes]
    best = crossings(spec, orders)
    by_axis = [spec.flows_between(k) for k in range(len(spec.axes) - 1)]
    for _ in range(max_sweeps):
        new = [list(o) for o in orders]
        for k in range(1, len(new)):
            links = [(f.right, f.left, f.count) for f in by_axis[k - 1]]
            new[k] = _barycenter_order(new[k], new[k - 1], links)
        for k in range(len(new) - 2, -1, -1):
            links = [(f.left, f.right, f.count) for f in by_axis[k]]
            new[k] = _barycenter_order(new[k], new[k + 1], links)
        if new == orders:
            break
        c = crossings(spec, new)
        if c > best:
            break
        orders, best = new, c
    for ax, o in zip(spec.axes, orders):
        ax.order = o
    return spec


def alluvial(partitions: Sequence, max_sweeps: int = 50) -> AlluvialSpec:
    """Build a laid-out alluvial spec from ``(name, Partition[, labels])`` entries.

    ``labels`` optionally names each cluster id; ids are used otherwise.
    """
    if len(partitions) < 2:
        raise ValueError("an alluvial diagram needs at least two partitions")
    first = partitions[0][1]
    axes = []
    for entry in partitions:
        name, part = entry[0], entry[1]
        if part.universe != first.universe:
            raise UniverseMismatch(part.universe ^ first.universe)
        names = entry[2] if len(entry) > 2 and entry[2] is not None else None
        labels = list(names) if names is not None else [str(c) for c in range(part.n_clusters)]
        axes.append(Axis(name, part.sizes(), labels, list(range(part.n_clusters))))
    flows = []
    for k in range(len(partitions) - 1):
        la, ra = partitions[k][1].assignment, partitions[k + 1][1].assignment
        counts = Counter((la[e], ra[e]) for e in la)
        flows.extend(Flow(k, l, r, n) for (l, r), n in sorted(counts.items()))
    return layout(AlluvialSpec(axes, flows), max_sweeps)


def _fmt(x: float) -> str:
    s = f"{x:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def svg_text(spec: AlluvialSpec, width: float = 900.0, height: float = 600.0) -> str:
    if not spec.flows:
        raise IoFailure("nothing to draw: the spec has no flows")
    n_axes = len(spec.axes)
    margin_x, margin_top, margin_bottom = 110.0, 40.0, 20.0
    bar_w = 14.0
    usable = height - margin_top - margin_bottom
    step = (width - 2 * margin_x) / max(n_axes - 1, 1)

    # vertical extent of each node: (top, scale)
    node_top: list[dict[int, float]] = []
    scale = None
    for ax in spec.axes:
        n = len(ax.order)
        gap = min(8.0, usable * 0.3 / max(n - 1, 1))
        total = sum(ax.sizes)
        s = (usable - gap * (n - 1)) / total
        scale = s if scale is None else min(scale, s)
    for ax in spec.axes:
        n = len(ax.order)
        gap = min(8.0, usable * 0.3 / max(n - 1, 1))
        y = margin_top
        tops = {}
        for c in ax.order:
            tops[c] = y
            y += ax.sizes[c] * scale + gap
        node_top.append(tops)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        '<rect width="100%" height="100%" fill="white"/>',
        '<g id="flows" fill-opacity="0.45" stroke="none">',
    ]
    for k in range(n_axes - 1):
        flows = spec.flows_between(k)
        lrank = {c: i for i, c in enumerate(spec.axes[k].order)}
        rrank = {c: i for i, c in enumerate(spec.axes[k + 1].order)}
        # stack ribbons inside each node in the order of their other endpoint
        left_off: dict[int, float] = {}
        right_off: dict[int, float] = {}
        y0s = {}
        for f in sorted(flows, key=lambda f: (lrank[f.left], rrank[f.right])):
            off = left_off.get(f.left, 0.0)
            y0s[f] = node_top[k][f.left] + off
            left_off[f.left] = off + f.count * scale
        x0 = margin_x + k * step + bar_w / 2
        x1 = margin_x + (k + 1) * step - bar_w / 2
        xm = (x0 + x1) / 2
        for f in sorted(flows, key=lambda f: (rrank[f.right], lrank[f.left])):
            off = right_off.get(f.right, 0.0)
            y1 = node_top[k + 1][f.right] + off
            right_off[f.right] = off + f.count * scale
            y0 = y0s[f]
            h = f.count * scale
            color = PALETTE[lrank[f.left] % len(PALETTE)]
            d = (f"M{_fmt(x0)},{_fmt(y0)} C{_fmt(xm)},{_fmt(y0)} {_fmt(xm)},{_fmt(y1)} {_fmt(x1)},{_fmt(y1)} "
                 f"L{_fmt(x1)},{_fmt(y1 + h)} C{_fmt(xm)},{_fmt(y1 + h)} {_fmt(xm)},{_fmt(y0 + h)} "
                 f"{_fmt(x0)},{_fmt(y0 + h)} Z")
            out.append(f'<path class="flow" d="{d}" fill="{color}">'
                       f'<title>{f.left} → {f.right}: {f.count}</title></path>')
    out.append("</g>")
    for k, ax in enumerate(spec.axes):
        x = margin_x + k * step
        out.append(f'<g class="axis" id="axis-{k}">')
        out.append(f'<text x="{_fmt(x)}" y="{_fmt(margin_top - 15)}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="14" font-weight="bold">{_escape(ax.name)}</text>')
        for c in ax.order:
            y = node_top[k][c]
            h = ax.sizes[c] * scale
            out.append(f'<rect class="node" x="{_fmt(x - bar_w / 2)}" y="{_fmt(y)}" width="{_fmt(bar_w)}" '
                       f'height="{_fmt(max(h, 0.5))}" fill="#333333"><title>{_escape(ax.labels[c])} '
                       f'({ax.sizes[c]})</title></rect>')
            if h >= 9:
                anchor, tx = ("end", x - bar_w) if k == 0 else ("start", x + bar_w)
                out.append(f'<text x="{_fmt(tx)}" y="{_fmt(y + h / 2 + 4)}" text-anchor="{anchor}" '
                           f'font-family="sans-serif" font-size="10">{_escape(ax.labels[c])}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def render_alluvial_svg(spec: AlluvialSpec, path) -> None:
    text = svg_text(spec)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
