"""Deterministic Louvain community detection and projection onto addresses."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import EmptyGraph, LevelOutOfRange
from .hintnet import HintGraph
from .partition import Partition

# Guards against float-rounding ping-pong; real runs converge long before.
MAX_SWEEPS = 10_000


class WeightedGraph:
    """Undirected weighted graph on nodes ``0..n-1`` with optional self-loops.

    ``adj[v]`` maps neighbours to edge weight (self-loops excluded) and
    ``loops[v]`` holds the self-loop weight. A self-loop counts twice in the
    degree, so ``sum(degree) == 2 * total_weight``.
    """

    def __init__(self, n: int, edges: Iterable[tuple[int, int, float]] = (), loops=None):
        self.n = n
        self.adj: list[dict[int, float]] = [{} for _ in range(n)]
        self.loops: list[float] = list(loops) if loops is not None else [0.0] * n
        for u, v, w in edges:
            if w < 0:
                raise ValueError("edge weights must be non-negative")
            if u == v:
                self.loops[u] += w
            else:
                self.adj[u][v] = self.adj[u].get(v, 0) + w
                self.adj[v][u] = self.adj[v].get(u, 0) + w
        self._refresh()

    def _refresh(self):
        self.degree = [sum(nb.values()) + 2 * lp for nb, lp in zip(self.adj, self.loops)]
        self.two_m = sum(self.degree)

    @property
    def total_weight(self) -> float:
        return self.two_m / 2

    def edges(self) -> list[tuple[int, int, float]]:
        out = [(v, v, w) for v, w in enumerate(self.loops) if w]
        for u, nb in enumerate(self.adj):
            out.extend((u, v, w) for v, w in nb.items() if u < v)
        return sorted(out)

    @classmethod
    def from_hint_graph(cls, hg: HintGraph, weighted: bool = False) -> "WeightedGraph":
        return cls(hg.n_nodes, ((u, v, w if weighted else 1) for (u, v), w in sorted(hg.weights.items())))


def _as_labels(partition) -> Mapping[int, int]:
    return partition.assignment if isinstance(partition, Partition) else partition


def modularity(graph: WeightedGraph, partition, resolution: float = 1.0) -> float:
    """Newman-Girvan modularity ``sum_c e_c/m - resolution * (d_c / 2m)^2``.

    ``partition`` is a :class:`Partition` or a plain node -> community mapping.
    """
    if graph.two_m == 0:
        raise EmptyGraph("modularity is undefined on a graph without edges")
    labels = _as_labels(partition)
    internal: dict = {}
    tot: dict = {}
    for v in range(graph.n):
        c = labels[v]
        tot[c] = tot.get(c, 0.0) + graph.degree[v]
        acc = internal.get(c, 0.0) + graph.loops[v]
        for u, w in graph.adj[v].items():
            if u > v and labels[u] == c:
                acc += w
        internal[c] = acc
    m = graph.two_m / 2
    q = 0.0
    for c in sorted(tot):
        q += internal[c] / m - resolution * (tot[c] / graph.two_m) ** 2
    return q


def _one_level(graph: WeightedGraph, resolution: float, on_move=None) -> tuple[list[int], bool]:
    """Local-move phase; returns node -> community (community ids are node ids).

    ``on_move(node, old, new)`` is called after each accepted move.
    """
    n = graph.n
    com = list(range(n))
    tot = list(graph.degree)
    adj, deg, two_m = graph.adj, graph.degree, graph.two_m
    moved_any = False
    for _ in range(MAX_SWEEPS):
        moved = False
        for i in range(n):
            nb = adj[i]
            if not nb:
                continue
            ci = com[i]
            ki = deg[i]
            links: dict[int, float] = {}
            for j, w in nb.items():
                cj = com[j]
                links[cj] = links.get(cj, 0.0) + w
            tot[ci] -= ki
            scale = resolution * ki / two_m
            best = ci
            best_gain = links.get(ci, 0.0) - tot[ci] * scale
            for c in sorted(links):
                if c == ci:
                    continue
                gain = links[c] - tot[c] * scale
                if gain > best_gain:
                    best, best_gain = c, gain
            tot[best] += ki
            if best != ci:
                com[i] = best
                moved = True
                if on_move is not None:
                    on_move(i, ci, best)
        if not moved:
            break
        moved_any = True
    return com, moved_any


def _renumber(com: list[int]) -> list[int]:
    # community ids ordered by their smallest member node
    mapping: dict[int, int] = {}
    out = []
    for c in com:
        if c not in mapping:
            mapping[c] = len(mapping)
        out.append(mapping[c])
    return out


def aggregate(graph: WeightedGraph, com: list[int]) -> WeightedGraph:
    """Collapse communities into nodes; intra-community weight becomes a self-loop."""
    k = max(com) + 1 if com else 0
    loops = [0.0] * k
    weights: dict[tuple[int, int], float] = {}
    for v in range(graph.n):
        cv = com[v]
        loops[cv] += graph.loops[v]
        for u, w in graph.adj[v].items():
            if u <= v:
                continue
            cu = com[u]
            if cu == cv:
                loops[cv] += w
            else:
                key = (cv, cu) if cv < cu else (cu, cv)
                weights[key] = weights.get(key, 0.0) + w
    return WeightedGraph(k, ((u, v, w) for (u, v), w in sorted(weights.items())), loops)


@dataclass
class Dendrogram:
    """Nested partitions of the graph's nodes, finest first (level 1 is ``levels[0]``)."""

    levels: list[Partition] = field(default_factory=list)
    modularity: list[float] = field(default_factory=list)

    def __len__(self):
        return len(self.levels)

    def level(self, level: int) -> Partition:
        if not 1 <= level <= len(self.levels):
            raise LevelOutOfRange(level, len(self.levels))
        return self.levels[level - 1]

    def summary(self) -> list[dict]:
        return [
            {"level": i + 1, "communities": p.n_clusters, "modularity": q}
            for i, (p, q) in enumerate(zip(self.levels, self.modularity))
        ]

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2) + "\n"

    def level_csv(self, level: int) -> str:
        p = self.level(level)
        rows = ["user,community"] + [f"{u},{c}" for u, c in sorted(p.assignment.items())]
        return "\n".join(rows) + "\n"

    def to_bytes(self) -> bytes:
        parts = [self.summary_json()] + [self.level_csv(i + 1) for i in range(len(self))]
        return "".join(parts).encode()


def louvain(graph: WeightedGraph, resolution: float = 1.0) -> Dendrogram:
    """Two-phase Louvain with ascending-id sweeps and lowest-id tie breaking.

    Level 1 is always recorded; further levels are recorded while the local-move
    phase on the aggregated graph still moves something.
    """
    if graph.two_m == 0:
        raise EmptyGraph("cannot detect communities on a graph without edges")
    dendro = Dendrogram()
    node_of = list(range(graph.n))
    g = graph
    while True:
        com, moved = _one_level(g, resolution)
        if not moved and dendro.levels:
            break
        com = _renumber(com)
        node_of = [com[x] for x in node_of]
        part = Partition(dict(enumerate(node_of)))
        dendro.levels.append(part)
        dendro.modularity.append(modularity(graph, part, resolution))
        if not moved:
            break
        g = aggregate(g, com)
    return dendro


def project_level(dendrogram: Dendrogram, level: int, h1: Partition) -> Partition:
    """Address partition where each address follows its H1 user into a community.

    Users missing from the dendrogram (no hint edges) stay on their own.
    """
    user_part = dendrogram.level(level).assignment
    labels = {}
    for addr, user in h1.assignment.items():
        c = user_part.get(user)
        labels[addr] = ("c", c) if c is not None else ("u", user)
    return Partition(labels)


def detect(hg: HintGraph, weighted: bool = False, resolution: float = 1.0) -> Dendrogram:
    return louvain(WeightedGraph.from_hint_graph(hg, weighted), resolution)
