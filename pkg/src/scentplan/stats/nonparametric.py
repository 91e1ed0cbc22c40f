"""Nonparametric tests for within-participant condition comparisons.

The Wilcoxon signed-rank test follows one fixed policy throughout the
workbench: zero differences are dropped, the reported statistic is
``W = min(W+, W-)``, and the p-value is exact (full sign-assignment
distribution) only when no zeros were dropped and no magnitude ties exist.
Any dropped zero or tie switches to the normal approximation with
tie-corrected variance and no continuity correction.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2, rankdata


class DegenerateDataError(ValueError):
    """Input carries no usable signal for the requested test."""


@dataclass(frozen=True)
class TestResult:
    method: str  # friedman | wilcoxon_exact | wilcoxon_normal
    statistic: float
    n_effective: int
    p: float
    p_holm: float | None = None

    def with_holm(self, p_holm: float) -> "TestResult":
        return TestResult(self.method, self.statistic, self.n_effective, self.p, p_holm)


def _signed_rank_counts(n: int) -> list[int]:
    """counts[s] = number of subsets of ranks {1..n} summing to s."""
    total = n * (n + 1) // 2
    counts = [0] * (total + 1)
    counts[0] = 1
    for r in range(1, n + 1):
        for s in range(total, r - 1, -1):
            counts[s] += counts[s - r]
    return counts


def exact_min_sum_p(n: int, w: float) -> float:
    """P(min(S+, S-) <= w) over all 2^n equally likely sign assignments.

    Computed from the subset-sum distribution of the positive rank sum, which
    is identical to brute-force enumeration of the 2^n assignments.  Valid
    for untied ranks 1..n.
    """
    counts = _signed_rank_counts(n)
    total = n * (n + 1) // 2
    favourable = sum(c for s, c in enumerate(counts) if min(s, total - s) <= w + 1e-12)
    return favourable / (1 << n)


def wilcoxon_signed_rank(diffs) -> TestResult:
    """Two-sided Wilcoxon signed-rank test on paired differences.

    Zeros are dropped first (``n_effective`` counts the nonzero differences).
    Absolute differences get average ranks for ties.  The exact p-value is
    used only on clean inputs (no zeros dropped, no ties); otherwise the
    tie-corrected normal approximation
    ``var = n(n+1)(2n+1)/24 - sum(t^3 - t)/48`` applies, without continuity
    correction.

    Raises:
        DegenerateDataError: if every difference is zero (or input is empty).
    """
    d = np.asarray([x for x in np.asarray(diffs, dtype=float).ravel() if x != 0.0])
    if d.size == 0:
        raise DegenerateDataError("all differences zero")
    zeros_dropped = len(np.asarray(diffs, dtype=float).ravel()) - d.size
    n = d.size

    mags = np.abs(d)
    ranks = rankdata(mags)  # average ranks for ties
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    w = min(w_plus, w_minus)

    tie_sizes = [t for t in Counter(mags.tolist()).values() if t > 1]
    if zeros_dropped == 0 and not tie_sizes:
        p = exact_min_sum_p(n, w)
        return TestResult("wilcoxon_exact", w, n, min(1.0, p))

    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0 - sum(t**3 - t for t in tie_sizes) / 48.0
    z = (w - mean) / math.sqrt(var)
    p = 2.0 * 0.5 * math.erfc(-z / math.sqrt(2.0))  # 2 * Phi(z), z <= 0
    return TestResult("wilcoxon_normal", w, n, min(1.0, p))


def friedman_test(mean_ranks) -> TestResult:
    """Tie-corrected Friedman test over an n-participant x k-condition matrix.

    Each row is re-ranked (average ranks for ties) and the statistic is
    ``(k-1) * sum_j (R_j - n(k+1)/2)^2 / (A - C)`` with ``A`` the sum of
    squared within-row ranks and ``C = nk(k+1)^2/4``; without ties this
    reduces to the classic ``12/(nk(k+1)) * sum R_j^2 - 3n(k+1)``.  The
    p-value is the chi-square upper tail with k-1 degrees of freedom.

    A fully tied matrix is degenerate, not an error: statistic 0, p = 1.
    """
    m = np.asarray(mean_ranks, dtype=float)
    if m.ndim != 2:
        raise ValueError("expected a 2-D participants x conditions matrix")
    n, k = m.shape
    if n < 2 or k < 2:
        raise ValueError(f"need at least 2 participants and 2 conditions, got {n}x{k}")

    ranks = np.apply_along_axis(rankdata, 1, m)
    col_sums = ranks.sum(axis=0)
    a = float((ranks**2).sum())
    c = n * k * (k + 1) ** 2 / 4.0
    if a - c <= 1e-12:
        return TestResult("friedman", 0.0, n, 1.0)
    s = float(((col_sums - n * (k + 1) / 2.0) ** 2).sum())
    stat = (k - 1) * s / (a - c)
    p = float(chi2.sf(stat, k - 1))
    return TestResult("friedman", stat, n, p)


def holm_correct(pvalues) -> list[float]:
    """Holm step-down adjusted p-values, returned in the input order.

    Sorted ascending, the i-th smallest is multiplied by (m - i), then a
    running maximum enforces monotonicity and values are capped at 1.
    """
    ps = [float(p) for p in pvalues]
    if any(not 0.0 <= p <= 1.0 for p in ps):
        raise ValueError("p-values must lie in [0, 1]")
    m = len(ps)
    order = sorted(range(m), key=lambda i: ps[i])
    adjusted = [0.0] * m
    running = 0.0
    for i, idx in enumerate(order):
        running = max(running, min(1.0, (m - i) * ps[idx]))
        adjusted[idx] = running
    return adjusted
