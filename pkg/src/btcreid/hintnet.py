"""Identity hint network over H1 users."""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidPartition
from .ledger import Ledger
from .partition import Partition


@dataclass
class HintGraph:
    """Undirected graph on H1 cluster ids; ``weights[(u, v)]`` with ``u < v``
    counts the transactions that produced the hint."""

    n_nodes: int
    weights: dict[tuple[int, int], int] = field(default_factory=dict)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted(self.weights)

    def isolates(self) -> list[int]:
        touched = set()
        for u, v in self.weights:
            touched.add(u)
            touched.add(v)
        return [n for n in range(self.n_nodes) if n not in touched]

    def write_edgelist(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for u, v in self.edges:
                fh.write(f"{u} {v} {self.weights[u, v]}\n")

    def write_isolates(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for n in self.isolates():
                fh.write(f"{n}\n")

    @classmethod
    def read(cls, edge_path, isolate_path=None) -> "HintGraph":
        weights = {}
        nodes = set()
        with open(edge_path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                u, v, w = (int(x) for x in line.split())
                u, v = min(u, v), max(u, v)
                weights[u, v] = weights.get((u, v), 0) + w
                nodes.update((u, v))
        if isolate_path is not None:
            with open(isolate_path, encoding="utf-8") as fh:
                nodes.update(int(x) for x in fh if x.strip())
        return cls(max(nodes) + 1 if nodes else 0, weights)


def build_hint_graph(ledger: Ledger, h1: Partition, max_recipients: int = 10) -> HintGraph:
    """Link each transaction's sender to its recipients, counted as H1 users.

    A transaction contributes edges only when it has fewer than ``max_recipients``
    distinct recipient users and none of them is the sender itself (a known
    change output). Coinbase transactions have no sender and are skipped.
    """
    if max_recipients < 1:
        raise ValueError("max_recipients must be at least 1")
    assign = h1.assignment
    weights: dict[tuple[int, int], int] = {}
    for tx in ledger.transactions:
        if tx.is_coinbase or not tx.inputs:
            continue
        sender = assign[tx.inputs[0].address]
        for inp in tx.inputs[1:]:
            if assign[inp.address] != sender:
                raise InvalidPartition(
                    f"transaction {tx.index}: input addresses span several clusters")
        recipients = {assign[o.address] for o in tx.outputs}
        if len(recipients) >= max_recipients or sender in recipients:
            continue
        for r in recipients:
            key = (sender, r) if sender < r else (r, sender)
            weights[key] = weights.get(key, 0) + 1
    return HintGraph(h1.n_clusters, weights)
