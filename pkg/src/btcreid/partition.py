"""Canonical partitions and an array-backed union-find."""
from __future__ import annotations

import csv
from collections import defaultdict
from typing import Hashable, Iterable, Mapping

from .errors import MalformedRecord


class UnionFind:
    """Disjoint sets over the integers ``0..n-1``.

    Union by rank with path halving; both ``parent`` and ``rank`` are plain
    lists so a few million elements stay cheap.

    >>> uf = UnionFind(5)
    >>> uf.union(0, 1); uf.union(3, 4); uf.union(1, 4)
    >>> uf.find(3) == uf.find(0)
    True
    >>> uf.find(2)
    2
    """

    __slots__ = ("parent", "rank")

    def __init__(self, n: int = 0):
        self.parent = list(range(n))
        self.rank = [0] * n

    def __len__(self):
        return len(self.parent)

    def add(self) -> int:
        i = len(self.parent)
        self.parent.append(i)
        self.rank.append(0)
        return i

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x: int, y: int) -> bool:
        """Merge the sets of ``x`` and ``y``; return False if already merged."""
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        rank = self.rank
        if rank[rx] < rank[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        if rank[rx] == rank[ry]:
            rank[rx] += 1
        return True

    def roots(self) -> list[int]:
        """Root of every element, fully compressing the forest."""
        find = self.find
        return [find(i) for i in range(len(self.parent))]


class Partition:
    """Assignment of every element of a universe to a dense cluster id.

    Ids are canonical: clusters are numbered by ascending minimal element, so
    equal groupings always get equal ids whatever labels produced them.
    Elements must be mutually orderable (all strings, or all ints).
    """

    __slots__ = ("assignment", "_k")

    def __init__(self, labels: Mapping[Hashable, Hashable]):
        groups: dict = {}
        for elem, lab in labels.items():
            cur = groups.get(lab)
            if cur is None or elem < cur:
                groups[lab] = elem
        order = sorted(groups, key=groups.__getitem__)
        rank = {lab: i for i, lab in enumerate(order)}
        self.assignment: dict = {e: rank[lab] for e, lab in labels.items()}
        self._k = len(order)

    @classmethod
    def from_clusters(cls, clusters: Iterable[Iterable[Hashable]]) -> "Partition":
        labels = {}
        for i, members in enumerate(clusters):
            for m in members:
                if m in labels:
                    raise ValueError(f"element {m!r} appears in two clusters")
                labels[m] = i
        return cls(labels)

    def __len__(self):
        return len(self.assignment)

    def __getitem__(self, elem):
        return self.assignment[elem]

    def __contains__(self, elem):
        return elem in self.assignment

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.assignment == other.assignment

    def __repr__(self):
        return f"Partition({len(self)} elements, {self._k} clusters)"

    @property
    def n_clusters(self) -> int:
        return self._k

    @property
    def universe(self) -> frozenset:
        return frozenset(self.assignment)

    def clusters(self) -> list[list]:
        """Members of each cluster, indexed by cluster id, each sorted."""
        out = [[] for _ in range(self._k)]
        for e, c in self.assignment.items():
            out[c].append(e)
        for members in out:
            members.sort()
        return out

    def sizes(self) -> list[int]:
        out = [0] * self._k
        for c in self.assignment.values():
            out[c] += 1
        return out

    def restrict(self, elements: Iterable) -> "Partition":
        a = self.assignment
        return Partition({e: a[e] for e in elements if e in a})

    def coarsens(self, finer: "Partition") -> bool:
        """True when every cluster of ``finer`` sits inside one cluster of self."""
        if self.universe != finer.universe:
            return False
        image: dict[int, int] = {}
        for e, c in finer.assignment.items():
            mine = self.assignment[e]
            if image.setdefault(c, mine) != mine:
                return False
        return True

    def compose(self, mapping: Mapping) -> "Partition":
        """Relabel each element's cluster id through ``mapping`` (id -> label)."""
        return Partition({e: mapping[c] for e, c in self.assignment.items()})


def write_partition(p: Partition, path, header=("address", "cluster")) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        a = p.assignment
        for e in sorted(a):
            w.writerow([e, a[e]])


def read_partition(path, key: str = "address") -> Partition:
    """Read ``key,<label column>`` CSV; the label column may have any name."""
    labels = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None or len(first) < 2 or first[0].strip() != key:
            raise MalformedRecord(1, f"expected a header starting with {key!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2 or not row[0]:
                raise MalformedRecord(lineno, "expected two columns")
            if row[0] in labels:
                raise MalformedRecord(lineno, f"element {row[0]!r} listed twice")
            labels[row[0]] = row[1]
    return Partition(labels)


def group_by_label(labels: Mapping) -> dict:
    out = defaultdict(list)
    for e, lab in labels.items():
        out[lab].append(e)
    return out
