"""Pareto fronts and the 2-D hypervolume indicator (both objectives maximized)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

REFERENCE = (0.0, -1.0)


@dataclass(frozen=True)
class FrontSnapshot:
    eval_count: int
    points: np.ndarray  # (k, 2) speed, stability
    members: tuple = field(default=())  # records backing each point, same order

    def __len__(self) -> int:
        return len(self.points)


def _objectives(records) -> np.ndarray:
    pts = []
    for r in records:
        pts.append(r.objectives if hasattr(r, "objectives") else r)
    return np.asarray(pts, dtype=float).reshape(-1, 2)


def nondominated_indices(points: np.ndarray) -> list[int]:
    """Indices of the non-dominated points; exact duplicates keep only the first."""
    pts = np.asarray(points, dtype=float)
    keep = []
    seen = set()
    for i, p in enumerate(pts):
        key = (p[0], p[1])
        if key in seen:
            continue
        ge = np.all(pts >= p, axis=1)
        gt = np.any(pts > p, axis=1)
        if not np.any(ge & gt):
            keep.append(i)
            seen.add(key)
    return keep


def pareto_front(records: Sequence) -> FrontSnapshot:
    """Non-dominated subset of evaluated records (or raw (speed, stability) pairs).

    Records are assumed to be in evaluation order, so the first duplicate is the
    one with the smallest eval index.
    """
    records = list(records)
    pts = _objectives(records)
    idx = nondominated_indices(pts)
    return FrontSnapshot(len(records), pts[idx], tuple(records[i] for i in idx))


def hypervolume_2d(front, reference: tuple[float, float] = REFERENCE) -> float:
    """Area dominated by ``front`` and bounded below by ``reference``.

    Accepts a FrontSnapshot or an (n, 2) array. Dominated points are harmless;
    points below the reference in either coordinate contribute only their
    clipped part.
    """
    pts = front.points if isinstance(front, FrontSnapshot) else np.asarray(front, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return 0.0
    ref = np.asarray(reference, dtype=float)
    pts = np.maximum(pts, ref)
    order = np.lexsort((-pts[:, 1], -pts[:, 0]))
    speed, stab = pts[order, 0], pts[order, 1]
    # staircase corners: sweeping from the fastest point, keep those that raise the best stability so far
    # (dominated points then cannot perturb the sum, not even by rounding)
    prev_best = np.concatenate([[-np.inf], np.maximum.accumulate(stab)[:-1]])
    corner = stab > prev_best
    speed, stab = speed[corner], stab[corner]
    widths = speed - np.append(speed[1:], ref[0])
    return float(np.sum(widths * (stab - ref[1])))


def hypervolume_convergence(records: Sequence, stride: int = 8, reference=REFERENCE) -> list[tuple[int, float]]:
    """Hypervolume of the cumulative front after every ``stride`` evaluations."""
    pts = _objectives(records)
    n = len(pts)
    counts = list(range(stride, n + 1, stride))
    if n and (not counts or counts[-1] != n):
        counts.append(n)
    return [(k, hypervolume_2d(pts[:k], reference)) for k in counts]


def mean_confidence_band(series: Sequence[Sequence[float]], confidence: float = 0.95):
    """Mean and t-interval half-width across equal-length series.

    Returns (mean, half_width) arrays; with a single series the half-width is 0.
    """
    data = np.asarray(series, dtype=float)
    n = data.shape[0]
    mean = data.mean(axis=0)
    if n < 2:
        return mean, np.zeros_like(mean)
    sem = data.std(axis=0, ddof=1) / np.sqrt(n)
    return mean, stats.t.ppf(0.5 + confidence / 2.0, n - 1) * sem
