"""Nonparametric tests for the strategy-comparison campaigns.

Mann-Whitney U compares attempt counts between two trial populations;
Wilcoxon signed-rank compares paired per-bug patch counts. Both use
midranks for ties, enumerate the exact two-sided p-value for small
samples (the p-value of the min-statistic being as or more extreme), and
fall back to a tie-corrected normal approximation with continuity
correction otherwise. Bonferroni correction caps m*p at 1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

EXACT_LIMIT_MW = 12  # exact enumeration when n_a + n_b <= this
EXACT_LIMIT_WILCOXON = 12  # exact enumeration when nonzero pairs <= this


def rankdata_mid(values) -> list[float]:
    """Midrank assignment (ties share the mean of their ordinal ranks)."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2.0 + 1.0
        for t in range(i, j + 1):
            ranks[order[t]] = mean_rank
        i = j + 1
    return ranks


def _norm_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


@dataclass(frozen=True)
class MannWhitneyResult:
    u: float  # U statistic of the first sample
    p: float  # two-sided
    exact: bool

    def __iter__(self):
        return iter((self.u, self.p))


@dataclass(frozen=True)
class WilcoxonResult:
    w: float  # min signed-rank sum
    p: float  # two-sided
    exact: bool
    undefined: bool = False  # every difference was zero

    def __iter__(self):
        return iter((self.w, self.p))


def _u_from_ranksum(rank_sum: float, n_a: int, n_b: int) -> float:
    return n_a * n_b + n_a * (n_a + 1) / 2.0 - rank_sum


def mann_whitney_u(sample_a, sample_b) -> MannWhitneyResult:
    """Two-sided Mann-Whitney U test (U reported for ``sample_a``)."""
    a = list(sample_a)
    b = list(sample_b)
    if not a or not b:
        raise ValueError("samples must be non-empty")
    n_a, n_b = len(a), len(b)
    pooled = a + b
    ranks = rankdata_mid(pooled)
    u_a = _u_from_ranksum(sum(ranks[:n_a]), n_a, n_b)
    u_min = min(u_a, n_a * n_b - u_a)
    if n_a + n_b <= EXACT_LIMIT_MW:
        total = 0
        extreme = 0
        for subset in itertools.combinations(range(n_a + n_b), n_a):
            total += 1
            u_subset = _u_from_ranksum(sum(ranks[i] for i in subset), n_a, n_b)
            if min(u_subset, n_a * n_b - u_subset) <= u_min + 1e-12:
                extreme += 1
        return MannWhitneyResult(u_a, extreme / total, exact=True)
    # normal approximation with tie correction and continuity correction
    n = n_a + n_b
    counts: dict[float, int] = {}
    for v in pooled:
        counts[v] = counts.get(v, 0) + 1
    tie_term = sum(t**3 - t for t in counts.values())
    sigma2 = n_a * n_b / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if sigma2 <= 0:
        return MannWhitneyResult(u_a, 1.0, exact=False)
    mean = n_a * n_b / 2.0
    z = (abs(u_a - mean) - 0.5) / math.sqrt(sigma2)
    p = min(1.0, 2.0 * _norm_sf(max(z, 0.0)))
    return MannWhitneyResult(u_a, p, exact=False)


def wilcoxon_signed_rank(paired_a, paired_b) -> WilcoxonResult:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped; when every difference is zero the test
    is undefined and reported as p = 1 with a flag.
    """
    a = list(paired_a)
    b = list(paired_b)
    if len(a) != len(b):
        raise ValueError("paired samples must have equal length")
    if not a:
        raise ValueError("samples must be non-empty")
    diffs = [x - y for x, y in zip(a, b) if x != y]
    if not diffs:
        return WilcoxonResult(0.0, 1.0, exact=True, undefined=True)
    m = len(diffs)
    ranks = rankdata_mid([abs(d) for d in diffs])
    w_plus = sum(r for r, d in zip(ranks, diffs) if d > 0)
    total = sum(ranks)
    w = min(w_plus, total - w_plus)
    if m <= EXACT_LIMIT_WILCOXON:
        extreme = 0
        for signs in itertools.product((0, 1), repeat=m):
            w_pos = sum(r for r, s in zip(ranks, signs) if s)
            if min(w_pos, total - w_pos) <= w + 1e-12:
                extreme += 1
        return WilcoxonResult(w, extreme / 2**m, exact=True)
    # normal approximation with tie correction and continuity correction
    counts: dict[float, int] = {}
    for d in diffs:
        key = abs(d)
        counts[key] = counts.get(key, 0) + 1
    mean = m * (m + 1) / 4.0
    sigma2 = m * (m + 1) * (2 * m + 1) / 24.0 - sum(t**3 - t for t in counts.values()) / 48.0
    if sigma2 <= 0:
        return WilcoxonResult(w, 1.0, exact=False)
    z = (abs(w - mean) - 0.5) / math.sqrt(sigma2)
    p = min(1.0, 2.0 * _norm_sf(max(z, 0.0)))
    return WilcoxonResult(w, p, exact=False)


def bonferroni(p: float, m: int) -> float:
    """Bonferroni-adjusted p-value, capped at 1."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return min(1.0, m * p)
