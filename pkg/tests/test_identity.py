import pytest

from btcreid.identity import (
    change_edges, cluster, cluster_h1, cluster_with_change, detect_change_h2, detect_change_h3,
)
from btcreid.ledger import Transaction, TxInput, TxOutput, first_seen, ledger_from_tuples
from btcreid.partition import Partition
from btcreid.simgen import SimConfig, generate

from oracles import closure_components, groups


def co_input_pairs(ledger):
    pairs = []
    for tx in ledger:
        addrs = [i.address for i in tx.inputs]
        pairs += [(a, b) for a in addrs for b in addrs if a < b]
    return pairs


def test_h1_transitive_closure():
    ledger = ledger_from_tuples([
        ([], [("A", 5)]), ([], [("B", 5)]), ([], [("C", 5)]),
        ([("A", 5), ("B", 5)], [("X", 10)]),
        ([("B", 5), ("C", 5)], [("Y", 10)]),
    ])
    p = cluster_h1(ledger)
    assert p["A"] == p["B"] == p["C"]
    assert p["X"] != p["A"] and p["Y"] != p["X"]


def test_h1_coinbase_output_is_singleton():
    p = cluster_h1(ledger_from_tuples([([], [("D", 50)])]))
    assert groups(p) == {frozenset({"D"})}


def test_h1_single_input_ledger_gives_singletons():
    ledger = ledger_from_tuples([
        ([], [("A", 5), ("B", 5)]),
        ([("A", 5)], [("C", 5)]),
        ([("B", 5)], [("D", 5)]),
    ])
    assert all(len(c) == 1 for c in cluster_h1(ledger).clusters())


def test_h1_canonical_ids():
    ledger = ledger_from_tuples([
        ([], [("m", 1), ("b", 1), ("z", 1), ("a", 1)]),
        ([("z", 1), ("a", 1)], [("q", 2)]),
    ])
    p = cluster_h1(ledger)
    # clusters ordered by their smallest address: {a,z} b m q
    assert p.assignment == {"a": 0, "z": 0, "b": 1, "m": 2, "q": 3}


@pytest.mark.parametrize("seed", range(10))
def test_h1_matches_closure_oracle(seed):
    ledger, _ = generate(SimConfig(seed=seed, users=15, txs=150, fanout_max=3))
    p = cluster_h1(ledger)
    assert len(p) <= 500
    assert groups(p) == closure_components(ledger.addresses(), co_input_pairs(ledger))


def _tx(index, ins, outs, coinbase=False):
    return Transaction(index, 0, tuple(TxInput(a, 1) for a in ins),
                       tuple(TxOutput(a, 1) for a in outs), coinbase, 0)


FS = {"X": 5, "Y": 2, "Z": 5, "W": 1, "V": 5, "A": 0}


def test_h2_examples():
    assert detect_change_h2(_tx(5, ["A"], ["X", "Y"]), FS) == "X"
    assert detect_change_h2(_tx(5, ["A"], ["Y", "X"]), FS) == "X"
    assert detect_change_h2(_tx(5, ["A"], ["X", "Z"]), FS) is None
    assert detect_change_h2(_tx(5, ["A"], ["Y", "W"]), FS) is None


def test_h2_guards():
    assert detect_change_h2(_tx(5, ["A"], ["X", "Y", "W"]), FS) is None
    assert detect_change_h2(_tx(5, ["A"], ["X", "X"]), FS) is None
    assert detect_change_h2(_tx(5, [], ["X", "Y"], coinbase=True), FS) is None
    assert detect_change_h2(_tx(5, ["X"], ["X", "Y"]), FS) is None


def test_h3_examples():
    assert detect_change_h3(_tx(5, ["A"], ["Y", "Z", "W"]), FS) == "Z"
    assert detect_change_h3(_tx(5, ["A"], ["X", "Z", "W"]), FS) is None
    assert detect_change_h3(_tx(5, [], ["X"], coinbase=True), FS) is None


def test_h3_guards():
    assert detect_change_h3(_tx(5, ["Z"], ["Y", "Z"]), FS) is None
    # a fresh address listed twice is still the only fresh address
    assert detect_change_h3(_tx(5, ["A"], ["Z", "Z", "W"]), FS) == "Z"


def test_change_edge_single_tx():
    ledger = ledger_from_tuples([
        ([], [("A", 10), ("C", 1)]),
        ([("A", 10)], [("B", 4), ("C", 6)]),
    ])
    p = cluster_with_change(ledger, "h2")
    assert p["A"] == p["B"]
    assert p["C"] != p["A"]


def test_no_change_gives_h1():
    ledger = ledger_from_tuples([
        ([], [("A", 10), ("B", 10)]),
        ([("A", 10), ("B", 10)], [("A", 20)]),
    ])
    assert cluster_with_change(ledger, "h2") == cluster_h1(ledger)
    assert cluster_with_change(ledger, "h3") == cluster_h1(ledger)


def test_two_h3_detections_through_shared_input():
    # D and P are co-spent in tx 3, D and Q in tx 4; E and F are the fresh change outputs.
    ledger = ledger_from_tuples([
        ([], [("D", 10), ("P", 10), ("Q", 10), ("R", 10)]),
        ([], [("D", 10)]),
        ([], [("S", 1)]),
        ([("D", 10), ("P", 10)], [("R", 5), ("E", 15)]),
        ([("D", 10), ("Q", 10)], [("S", 5), ("F", 15)]),
    ])
    edges = change_edges(ledger, "h3")
    assert edges == [("E", "D"), ("F", "D")]
    # closure by hand: {D,P} + {D,Q} + E-D + F-D -> {D,P,Q,E,F}
    p = cluster_with_change(ledger, "h3")
    expected = {frozenset("DPQEF"), frozenset("R"), frozenset("S")}
    assert groups(p) == expected


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("heuristic", ["h2", "h3"])
def test_change_heuristics_coarsen_h1(seed, heuristic):
    ledger, _ = generate(SimConfig(seed=seed, users=20, txs=400, change_prob=0.7))
    h1 = cluster_h1(ledger)
    assert cluster(ledger, heuristic).coarsens(h1)


@pytest.mark.parametrize("seed", range(4))
def test_change_matches_closure_oracle(seed):
    ledger, _ = generate(SimConfig(seed=seed, users=15, txs=150))
    edges = change_edges(ledger, "h3")
    expected = closure_components(ledger.addresses(), co_input_pairs(ledger) + edges)
    assert groups(cluster_with_change(ledger, "h3")) == expected


@pytest.mark.parametrize("seed", range(5))
def test_h3_agrees_with_h2_on_two_output_transactions(seed):
    ledger, _ = generate(SimConfig(seed=seed, users=25, txs=600, fanout_max=1))
    fs = first_seen(ledger)
    fired = 0
    for tx in ledger:
        c2 = detect_change_h2(tx, fs)
        if c2 is not None:
            fired += 1
            assert detect_change_h3(tx, fs) == c2
    assert fired > 0


def test_determinism():
    ledger, _ = generate(SimConfig(seed=9, users=30, txs=500))
    assert cluster_h1(ledger).assignment == cluster_h1(ledger).assignment
    a = cluster_with_change(ledger, "h3")
    b = cluster_with_change(ledger, "h3")
    assert list(a.assignment.items()) == list(b.assignment.items())


def test_unknown_heuristic():
    with pytest.raises(ValueError):
        cluster(ledger_from_tuples([([], [("A", 1)])]), "h9")


def test_partition_is_a_partition():
    ledger, _ = generate(SimConfig(seed=2, users=10, txs=100))
    p = cluster_h1(ledger)
    assert isinstance(p, Partition)
    assert p.universe == ledger.addresses()
    assert sorted(set(p.assignment.values())) == list(range(p.n_clusters))
