"""Address clustering by common inputs (H1) and one-time change detection (H2, H3)."""
from __future__ import annotations

from typing import Callable, Mapping, Optional

from .ledger import Ledger, Transaction, first_seen as compute_first_seen
from .partition import Partition, UnionFind


def _components(ledger: Ledger, extra_edges=()) -> Partition:
    ids: dict[str, int] = {}
    uf = UnionFind()
    parent = uf.parent

    def ident(a):
        i = ids.get(a)
        if i is None:
            i = ids[a] = len(parent)
            uf.add()
        return i

    for tx in ledger.transactions:
        ins = tx.inputs
        if ins:
            prev = ident(ins[0].address)
            for inp in ins[1:]:
                cur = ident(inp.address)
                uf.union(prev, cur)
                prev = cur
        for o in tx.outputs:
            ident(o.address)
    for a, b in extra_edges:
        uf.union(ident(a), ident(b))

    roots = uf.roots()
    return Partition({a: roots[i] for a, i in ids.items()})


def cluster_h1(ledger: Ledger) -> Partition:
    """Connected components of the co-input graph.

    The n input addresses of a transaction are chained by n-1 edges; output-only
    addresses end up as singletons, so the universe is every address in the ledger.
    """
    return _components(ledger)


def detect_change_h2(tx: Transaction, first_seen: Mapping[str, int]) -> Optional[str]:
    """Two distinct outputs, one fresh and one seen before: the fresh one is change."""
    if tx.is_coinbase or len(tx.outputs) != 2:
        return None
    a1, a2 = tx.outputs[0].address, tx.outputs[1].address
    if a1 == a2:
        return None
    idx = tx.index
    f1, f2 = first_seen[a1], first_seen[a2]
    if f1 == idx and f2 < idx:
        change = a1
    elif f2 == idx and f1 < idx:
        change = a2
    else:
        return None
    if any(i.address == change for i in tx.inputs):
        return None
    return change


def detect_change_h3(tx: Transaction, first_seen: Mapping[str, int]) -> Optional[str]:
    """The only fresh output address of a non-coinbase transaction, unless it is also an input."""
    if tx.is_coinbase:
        return None
    idx = tx.index
    fresh = {o.address for o in tx.outputs if first_seen[o.address] == idx}
    if len(fresh) != 1:
        return None
    (change,) = fresh
    if any(i.address == change for i in tx.inputs):
        return None
    return change


DETECTORS: dict[str, Callable] = {"h2": detect_change_h2, "h3": detect_change_h3}


def change_edges(ledger: Ledger, detector, first_seen=None) -> list[tuple[str, str]]:
    """(change address, first input address) for every detection, in ledger order."""
    if isinstance(detector, str):
        detector = DETECTORS[detector]
    fs = compute_first_seen(ledger) if first_seen is None else first_seen
    edges = []
    for tx in ledger.transactions:
        change = detector(tx, fs)
        if change is not None:
            edges.append((change, tx.inputs[0].address))
    return edges


def cluster_with_change(ledger: Ledger, detector="h3") -> Partition:
    """H1 components plus one edge per detected one-time change address."""
    return _components(ledger, change_edges(ledger, detector))


def cluster(ledger: Ledger, heuristic: str) -> Partition:
    if heuristic == "h1":
        return cluster_h1(ledger)
    if heuristic in DETECTORS:
        return cluster_with_change(ledger, heuristic)
    raise ValueError(f"unknown heuristic {heuristic!r}")
