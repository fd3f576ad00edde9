"""Partition comparison: NMI, chance-adjusted NMI and pairwise precision/recall.

All logarithms are natural. NMI is normalized by the geometric mean of the
two entropies.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import UniverseMismatch
from .partition import Partition


@dataclass(frozen=True)
class ContingencyTable:
    """Sparse contingency counts ``cells[(i, j)] = n_ij`` plus marginals."""

    cells: dict[tuple[int, int], int]
    rows: tuple[int, ...]
    cols: tuple[int, ...]

    @property
    def n(self) -> int:
        return sum(self.rows)

    def dense(self) -> list[list[int]]:
        out = [[0] * len(self.cols) for _ in self.rows]
        for (i, j), v in self.cells.items():
            out[i][j] = v
        return out


@dataclass(frozen=True)
class PairCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def _check_universe(u: Partition, v: Partition):
    if len(u) != len(v) or u.universe != v.universe:
        raise UniverseMismatch(u.universe ^ v.universe)


def contingency(u: Partition, v: Partition) -> ContingencyTable:
    _check_universe(u, v)
    va = v.assignment
    cells = Counter((cu, va[e]) for e, cu in u.assignment.items())
    return ContingencyTable(
        dict(sorted(cells.items())), tuple(u.sizes()), tuple(v.sizes()))


def _entropy(sizes, n) -> float:
    return -math.fsum((a / n) * math.log(a / n) for a in sizes if a)


def _mutual_info(table: ContingencyTable) -> float:
    n = table.n
    rows, cols = table.rows, table.cols
    log_n = math.log(n)
    terms = (
        # grouped so that swapping U and V yields bit-identical terms
        (nij / n) * ((math.log(nij) + log_n) - (math.log(rows[i]) + math.log(cols[j])))
        for (i, j), nij in table.cells.items()
    )
    return max(math.fsum(terms), 0.0)


def _same(u: Partition, v: Partition) -> bool:
    # ids are canonical, so equal groupings have equal assignments
    return u.assignment == v.assignment


def nmi(u: Partition, v: Partition) -> float:
    """``I(U,V) / sqrt(H(U) H(V))``.

    With a zero-entropy side the result is 1 for identical partitions, else 0.
    """
    table = contingency(u, v)
    n = table.n
    if n == 0:
        raise ValueError("nmi needs at least one element")
    hu, hv = _entropy(table.rows, n), _entropy(table.cols, n)
    if hu == 0 or hv == 0:
        return 1.0 if _same(u, v) else 0.0
    return min(_mutual_info(table) / math.sqrt(hu * hv), 1.0)


def expected_mutual_info(rows, cols, n: int) -> float:
    """Exact E[I] under the hypergeometric (fixed-marginals permutation) model.

    Terms depend only on the pair of marginal sizes, so equal sizes are
    grouped and weighted by their multiplicity.
    """
    row_counts = sorted(Counter(a for a in rows if a).items())
    col_counts = sorted(Counter(b for b in cols if b).items())
    lg_n = gammaln(n + 1)
    log_n = math.log(n)
    total = []
    for a, ma in row_counts:
        for b, mb in col_counts:
            lo = max(1, a + b - n)
            hi = min(a, b)
            if lo > hi:
                continue
            nij = np.arange(lo, hi + 1, dtype=np.float64)
            fixed = (gammaln(a + 1) + gammaln(b + 1)) + (gammaln(n - a + 1) + gammaln(n - b + 1))
            log_p = (fixed - lg_n - gammaln(nij + 1)
                     - (gammaln(a - nij + 1) + gammaln(b - nij + 1))
                     - gammaln(n - a - b + nij + 1))
            log_ratio = (np.log(nij) + log_n) - (math.log(a) + math.log(b))
            term = (nij / n) * log_ratio * np.exp(log_p)
            total.append(ma * mb * math.fsum(term.tolist()))
    return math.fsum(total)


def anmi(u: Partition, v: Partition) -> float:
    """Chance-adjusted NMI: ``(I - E[I]) / (sqrt(H(U) H(V)) - E[I])``."""
    table = contingency(u, v)
    n = table.n
    if n == 0:
        raise ValueError("anmi needs at least one element")
    hu, hv = _entropy(table.rows, n), _entropy(table.cols, n)
    if hu == 0 or hv == 0:
        return 1.0 if _same(u, v) else 0.0
    mi = _mutual_info(table)
    emi = expected_mutual_info(table.rows, table.cols, n)
    denom = math.sqrt(hu * hv) - emi
    num = mi - emi
    # all-singleton sides give sqrt(H(U)H(V)) = E[I] up to rounding
    if abs(denom) <= 1e-12:
        return 0.0
    return num / denom


def _pairs(k: int) -> int:
    return k * (k - 1) // 2


def pair_counts(truth: Partition, predicted: Partition) -> PairCounts:
    """Classify every unordered pair by same-label / same-cluster agreement."""
    table = contingency(truth, predicted)
    n = table.n
    tp = sum(_pairs(x) for x in table.cells.values())
    same_truth = sum(_pairs(a) for a in table.rows)
    same_pred = sum(_pairs(b) for b in table.cols)
    fp = same_pred - tp
    fn = same_truth - tp
    return PairCounts(tp, fp, fn, _pairs(n) - tp - fp - fn)


def precision_recall_f1(counts: PairCounts) -> tuple[float, float, float]:
    p = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 1.0
    r = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 1.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f1
