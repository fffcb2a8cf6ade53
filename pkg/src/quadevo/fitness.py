"""Speed and stability objectives computed from an evaluation trace."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import GaitSpec
from .surrogate import EvaluationTrace, SurfaceModel, SurrogateConfig, rollout

# Maps raw surrogate stability onto [-1, 0]; calibrated so that the 5th
# percentile worst random individual across the four library surfaces lands
# at -1 (see scripts/calibrate_stability.py).
DEFAULT_STABILITY_SCALE = 2.7


@dataclass(frozen=True)
class Fitness:
    speed: float  # m/min
    stability: float  # <= 0

    def __post_init__(self):
        if not (np.isfinite(self.speed) and np.isfinite(self.stability)):
            raise ValueError("fitness values must be finite")
        if self.speed < 0 or self.stability > 0:
            raise ValueError(f"invalid fitness ({self.speed}, {self.stability})")

    def as_tuple(self) -> tuple[float, float]:
        return (self.speed, self.stability)


FLOOR = Fitness(0.0, -1.0)


@dataclass(frozen=True)
class FitnessConfig:
    alpha: float = 1.0 / 50.0
    stability_scale: float = DEFAULT_STABILITY_SCALE
    axes: tuple[str, ...] = ("roll", "pitch", "yaw")

    def __post_init__(self):
        if self.alpha <= 0 or self.stability_scale <= 0:
            raise ValueError("alpha and stability_scale must be positive")


class MalformedTraceError(ValueError):
    pass


def speed_fitness(trace: EvaluationTrace) -> float:
    """Straight-line distance over elapsed time, in metres per minute."""
    duration = trace.t_end - trace.t_start
    if not duration > 0:
        raise MalformedTraceError("trace has zero duration")
    dist = float(np.linalg.norm(np.asarray(trace.positions[-1]) - np.asarray(trace.positions[0])))
    return dist / duration * 60.0


def raw_stability(trace: EvaluationTrace, alpha: float = 1.0 / 50.0) -> float:
    acc = np.asarray(trace.accelerations, dtype=float)
    ang = np.asarray(trace.orientations, dtype=float)
    if acc.size == 0 or ang.size == 0:
        raise MalformedTraceError("trace has empty sensor series")
    # population standard deviation (ddof=0). Shifting by the first sample leaves it unchanged
    # but makes a constant series exactly zero instead of a rounding residue of its mean.
    acc_std = (acc - acc[:1]).std(axis=0)
    ang_std = (ang - ang[:1]).std(axis=0)
    return -float(np.sum(alpha * acc_std + ang_std))


def stability_fitness(trace: EvaluationTrace, cfg: FitnessConfig = FitnessConfig()) -> float:
    """Negated weighted spread of acceleration and orientation, scaled and clamped to [-1, 0]."""
    value = raw_stability(trace, cfg.alpha) * cfg.stability_scale
    return max(value, -1.0) + 0.0  # + 0.0 turns -0.0 into 0.0


def evaluate_with_trace(
    spec: GaitSpec,
    surface: SurfaceModel,
    seed: int,
    cfg: FitnessConfig = FitnessConfig(),
    surrogate: SurrogateConfig | None = None,
) -> tuple[Fitness, EvaluationTrace]:
    trace = rollout(spec, surface, seed, surrogate)
    if trace.failed:
        return FLOOR, trace
    return Fitness(speed_fitness(trace), stability_fitness(trace, cfg)), trace


def evaluate(
    spec: GaitSpec,
    surface: SurfaceModel,
    seed: int,
    cfg: FitnessConfig = FitnessConfig(),
    surrogate: SurrogateConfig | None = None,
) -> Fitness:
    """Roll out and score one gait; unreachable targets score the (0, -1) floor."""
    return evaluate_with_trace(spec, surface, seed, cfg, surrogate)[0]
