"""Average foot trajectories and Gaussian kernel density estimates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..gait import build_spline, sample_loop
from ..params import GaitSpec

TRAJECTORY_SAMPLES = 1000


def sampled_trajectories(specs: list[GaitSpec], n: int = TRAJECTORY_SAMPLES) -> np.ndarray:
    """(len(specs), n, 3) foot positions on a shared phase grid."""
    return np.stack([sample_loop(build_spline(s), n)[1] for s in specs])


def mean_spline(specs: list[GaitSpec], n: int = TRAJECTORY_SAMPLES) -> tuple[np.ndarray, np.ndarray]:
    """Phase grid and the per-phase mean foot position across ``specs``."""
    if not specs:
        raise ValueError("mean_spline needs at least one individual")
    return np.arange(n) / n, sampled_trajectories(specs, n).mean(axis=0)


@dataclass(frozen=True)
class ScottKDE:
    samples: np.ndarray  # (n, d)
    bandwidth: np.ndarray  # (d,)

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        z = (pts[:, None, :] - self.samples[None, :, :]) / self.bandwidth
        kern = np.exp(-0.5 * np.sum(z * z, axis=-1))
        norm = len(self.samples) * np.prod(self.bandwidth) * (2.0 * np.pi) ** (len(self.bandwidth) / 2.0)
        return kern.sum(axis=1) / norm

    def grid(self, size: int = 100, pad: float = 4.0):
        """Density on a regular grid covering the samples plus ``pad`` bandwidths."""
        lo = self.samples.min(axis=0) - pad * self.bandwidth
        hi = self.samples.max(axis=0) + pad * self.bandwidth
        xs = np.linspace(lo[0], hi[0], size)
        ys = np.linspace(lo[1], hi[1], size)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        dens = self(np.column_stack([gx.ravel(), gy.ravel()])).reshape(size, size)
        return xs, ys, dens


def scott_bandwidth(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float)
    n, d = x.shape
    return x.std(axis=0, ddof=1) * n ** (-1.0 / (d + 4))


def kde_scott(samples) -> ScottKDE:
    """Product Gaussian kernel, per-dimension bandwidth std * n^(-1/(d+4))."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("kde_scott needs at least two samples in an (n, d) array")
    bw = scott_bandwidth(x)
    if np.any(bw <= 0):
        dims = [int(i) for i in np.flatnonzero(bw <= 0)]
        raise ValueError(f"zero variance in dimension(s) {dims}; add a small jitter to the samples")
    return ScottKDE(x, bw)
