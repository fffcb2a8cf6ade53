"""How differently the same individuals perform across surfaces."""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Mapping

import numpy as np


class CoverageError(ValueError):
    pass


def distance_from_means(means: Mapping[str, Mapping[str, Iterable[float]]], surfaces: list[str]) -> np.ndarray:
    """Mean over individuals of the Euclidean distance between per-surface mean performances.

    ``means[individual][surface]`` is that individual's (already normalized)
    mean (speed, stability) on the surface.
    """
    k = len(surfaces)
    total = np.zeros((k, k))
    for ind, per_surface in means.items():
        missing = [s for s in surfaces if s not in per_surface]
        if missing:
            raise CoverageError(f"individual {ind} has no evaluations on surface(s) {', '.join(missing)}")
        pts = np.array([per_surface[s] for s in surfaces], dtype=float)
        total += np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    return total / len(means)


def distance_matrix(rows, surfaces: list[str] | None = None) -> tuple[list[str], np.ndarray]:
    """Normalized cross-surface distance matrix from re-evaluation rows.

    ``rows`` yields (individual, surface, speed, stability). Speed and
    stability are min-max normalized over all rows pooled, averaged per
    individual and surface, and compared pairwise.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("no re-evaluation rows")
    perf = np.array([(r[2], r[3]) for r in rows], dtype=float)
    lo, hi = perf.min(axis=0), perf.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    norm = (perf - lo) / span

    grouped: dict = defaultdict(lambda: defaultdict(list))
    for (ind, surface, *_), p in zip(rows, norm):
        grouped[ind][surface].append(p)
    names = sorted(surfaces or {r[1] for r in rows})
    means = {ind: {s: np.mean(v, axis=0) for s, v in per.items()} for ind, per in grouped.items()}
    return names, distance_from_means(means, names)


def class_contrast(names: list[str], matrix: np.ndarray, pairs_within, pairs_across) -> tuple[float, float]:
    """Mean distance over the listed within-class and cross-class surface pairs."""
    idx = {n: i for i, n in enumerate(names)}
    within = np.mean([matrix[idx[a], idx[b]] for a, b in pairs_within])
    across = np.mean([matrix[idx[a], idx[b]] for a, b in pairs_across])
    return float(within), float(across)
