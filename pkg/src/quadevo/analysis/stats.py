"""Two-sided Mann-Whitney U test, Holm step-down correction, per-parameter tests."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from ..params import GENE_NAMES, LOWER, UPPER

EXACT_MAX_N = 16


@dataclass(frozen=True)
class MannWhitneyResult:
    u: float  # U for the first sample: pairs with x > y, ties counted 1/2
    p: float
    method: str  # "exact" or "normal"


def _exact_two_sided(doubled_ranks: np.ndarray, n1: int, observed: int) -> float:
    """P(|2U - mu2| >= |observed - mu2|) over all equally likely splits.

    Works on doubled midranks so every quantity is an integer.
    """
    total = int(doubled_ranks.sum())
    n = len(doubled_ranks)
    # counts[k][s]: subsets of size k with doubled rank sum s
    counts = np.zeros((n1 + 1, total + 1))
    counts[0, 0] = 1.0
    for r in doubled_ranks.astype(int):
        for k in range(min(n1, n), 0, -1):
            counts[k, r:] += counts[k - 1, : total + 1 - r]
    dist = counts[n1]
    sums = np.arange(total + 1)
    offset = n1 * (n1 + 1)
    two_u = sums - offset
    mu2 = n1 * (n - n1)  # 2 * mean of U
    extreme = np.abs(two_u - mu2) >= abs(observed - mu2)
    return float(min(1.0, dist[extreme].sum() / dist.sum()))


def mann_whitney_u(x, y, exact_max_n: int = EXACT_MAX_N) -> MannWhitneyResult:
    """Two-sided Mann-Whitney U test with midranks for ties.

    Small pooled samples (n1 + n2 <= ``exact_max_n``) use the exact permutation
    distribution of the midrank sum. Larger ones use the normal approximation
    with tie-corrected variance and a 0.5 continuity correction.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    n1, n2 = len(x), len(y)
    if n1 == 0 or n2 == 0:
        raise ValueError("both samples must be non-empty")
    pooled = np.concatenate([x, y])
    ranks = rankdata(pooled)
    r1 = ranks[:n1].sum()
    u = float(r1 - n1 * (n1 + 1) / 2.0)
    n = n1 + n2

    if n <= exact_max_n:
        doubled = np.rint(2 * ranks).astype(int)
        observed = int(round(2 * u))
        return MannWhitneyResult(u, _exact_two_sided(doubled, n1, observed), "exact")

    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = float(np.sum(tie_counts**3 - tie_counts)) / (n * (n - 1))
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term)
    if var <= 0:
        return MannWhitneyResult(u, 1.0, "normal")
    z = max(abs(u - n1 * n2 / 2.0) - 0.5, 0.0) / math.sqrt(var)
    return MannWhitneyResult(u, min(1.0, math.erfc(z / math.sqrt(2.0))), "normal")


def holm_bonferroni(p_values, alpha: float = 0.01) -> tuple[np.ndarray, np.ndarray]:
    """Holm step-down adjustment.

    Returns (adjusted p-values, rejected flags), both in input order.
    """
    p = np.asarray(p_values, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    m = len(p)
    order = np.argsort(p, kind="stable")
    adjusted_sorted = np.maximum.accumulate(np.minimum(1.0, (m - np.arange(m)) * p[order]))
    rejected_sorted = np.zeros(m, dtype=bool)
    for i, idx in enumerate(order):
        if p[idx] <= alpha / (m - i):
            rejected_sorted[i] = True
        else:
            break
    adjusted = np.empty(m)
    rejected = np.empty(m, dtype=bool)
    adjusted[order] = adjusted_sorted
    rejected[order] = rejected_sorted
    return adjusted, rejected


@dataclass(frozen=True)
class StatResult:
    parameter: str
    u: float
    p_raw: float
    p_adjusted: float
    significant: bool
    median_a: float
    median_b: float


def parameter_significance(genomes_a, genomes_b, alpha: float = 0.01) -> list[StatResult]:
    """Per-parameter Mann-Whitney tests between two groups of genomes, Holm-corrected.

    Genomes are decoded to physical units first (rank tests do not care, but
    the reported medians are easier to read).
    """
    a = LOWER + np.asarray(genomes_a, dtype=float).reshape(-1, len(GENE_NAMES)) * (UPPER - LOWER)
    b = LOWER + np.asarray(genomes_b, dtype=float).reshape(-1, len(GENE_NAMES)) * (UPPER - LOWER)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("both groups must be non-empty")
    tests = [mann_whitney_u(a[:, k], b[:, k]) for k in range(len(GENE_NAMES))]
    adjusted, rejected = holm_bonferroni([t.p for t in tests], alpha)
    return [
        StatResult(name, t.u, t.p, float(adj), bool(rej), float(np.median(a[:, k])), float(np.median(b[:, k])))
        for k, (name, t, adj, rej) in enumerate(zip(GENE_NAMES, tests, adjusted, rejected))
    ]
