"""Two-sample comparisons for run-length and fitness samples.

Mann-Whitney U with midranks, tie-corrected variance, and a continuity
correction; small samples switch to exact enumeration of the permutation
null so the p-value stays valid when ties or tiny n make the normal
approximation unreliable.  Effect size is Cliff's delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np

# With min(n1, n2) >= 8 the normal approximation is fine; below that we
# enumerate the permutation null exactly, unless the split count is absurd
# (tiny sample against a huge one), where the approximation is the only option.
_EXACT_SPLIT_LIMIT = 100_000


class MannWhitneyResult(NamedTuple):
    u_statistic: float
    p_value: float
    exact: bool
    degenerate: bool


def _u_statistic(xs: Sequence[float], ys: Sequence[float]) -> float:
    """U of the first sample: pairs won plus half the tied pairs."""
    pooled = sorted(list(xs) + list(ys))
    n1 = len(xs)
    # Midranks via sorted positions; U1 = R1 - n1 (n1 + 1) / 2.
    ranks: dict[float, float] = {}
    i = 0
    while i < len(pooled):
        j = i
        while j < len(pooled) and pooled[j] == pooled[i]:
            j += 1
        ranks[pooled[i]] = (i + j + 1) / 2  # average of 1-based ranks i+1..j
        i = j
    r1 = sum(ranks[v] for v in xs)
    return r1 - n1 * (n1 + 1) / 2


def _doubled_u(values: Sequence[float], first_idx: frozenset[int]) -> int:
    """2 * U of the subset, exact in integers (ties contribute 1 each)."""
    total = 0
    for i in first_idx:
        vi = values[i]
        for j, vj in enumerate(values):
            if j in first_idx:
                continue
            if vi > vj:
                total += 2
            elif vi == vj:
                total += 1
    return total


def mann_whitney_u(xs: Sequence[float], ys: Sequence[float]) -> MannWhitneyResult:
    """Two-sided test that the two samples come from one distribution.

    The reported statistic is U of ``xs`` (number of (x, y) pairs with
    x > y, ties counting one half).
    """
    n1, n2 = len(xs), len(ys)
    if n1 < 1 or n2 < 1:
        raise ValueError("both samples need at least one observation")
    pooled = list(xs) + list(ys)
    degenerate = min(pooled) == max(pooled)
    u1 = _u_statistic(xs, ys)
    if degenerate:
        return MannWhitneyResult(u1, 1.0, False, True)
    use_exact = min(n1, n2) < 8
    if use_exact and math.comb(n1 + n2, min(n1, n2)) <= _EXACT_SPLIT_LIMIT:
        return MannWhitneyResult(u1, _exact_p(pooled, n1, u1), True, False)
    return MannWhitneyResult(u1, _normal_p(xs, ys, u1), False, False)


def _exact_p(pooled: list[float], n1: int, u1: float) -> float:
    """Enumerate every split of the pooled values; compare on doubled U."""
    total_n = len(pooled)
    n2 = total_n - n1
    # Enumerate positions of the smaller sample; deviation is symmetric.
    k = min(n1, n2)
    center = n1 * n2
    observed = abs(round(2 * u1) - center)
    hits = 0
    count = 0
    for subset in combinations(range(total_n), k):
        idx = frozenset(subset)
        if abs(_doubled_u(pooled, idx) - center) >= observed:
            hits += 1
        count += 1
    return hits / count


def _normal_p(xs: Sequence[float], ys: Sequence[float], u1: float) -> float:
    n1, n2 = len(xs), len(ys)
    total_n = n1 + n2
    pooled = sorted(list(xs) + list(ys))
    tie_term = 0.0
    i = 0
    while i < total_n:
        j = i
        while j < total_n and pooled[j] == pooled[i]:
            j += 1
        t = j - i
        tie_term += t**3 - t
        i = j
    mu = n1 * n2 / 2
    var = n1 * n2 / 12 * ((total_n + 1) - tie_term / (total_n * (total_n - 1)))
    if var <= 0:
        return 1.0
    u_big = max(u1, n1 * n2 - u1)
    z = (u_big - mu - 0.5) / math.sqrt(var)  # continuity correction
    return min(1.0, math.erfc(z / math.sqrt(2)))


def cliffs_delta(xs: Sequence[float], ys: Sequence[float]) -> float:
    """(P(x > y) - P(x < y)) over all pairs; positive when xs dominate."""
    a = np.asarray(xs, dtype=np.float64)
    b = np.sort(np.asarray(ys, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples need at least one observation")
    greater = np.searchsorted(b, a, side="left").sum()
    less = (b.size - np.searchsorted(b, a, side="right")).sum()
    return float((greater - less) / (a.size * b.size))


@dataclass(frozen=True)
class ComparisonReport:
    n_first: int
    n_second: int
    u_statistic: float
    p_value: float
    cliffs_delta: float
    exact: bool
    degenerate: bool


def compare(xs: Sequence[float], ys: Sequence[float]) -> ComparisonReport:
    mw = mann_whitney_u(xs, ys)
    return ComparisonReport(
        n_first=len(xs),
        n_second=len(ys),
        u_statistic=mw.u_statistic,
        p_value=mw.p_value,
        cliffs_delta=cliffs_delta(xs, ys),
        exact=mw.exact,
        degenerate=mw.degenerate,
    )
