"""Looping foot-tip trajectory, balancing wag and per-leg phase scheduling.

The trajectory is a closed cubic Hermite spline through five control points,
traversed ground_front -> ground_back (stance) -> air_back -> air_top ->
air_front -> ground_front (swing). Stance is a straight line at constant
velocity; the swing window is split between the four swing segments in
proportion to their chord lengths. Air knots get closed Catmull-Rom tangents.
Ground knots get the stance velocity as tangent, which keeps the stance
segment exactly linear and the whole loop C1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import GaitParams, GaitSpec

CONTROL_RATE_HZ = 50.0
KNOT_NAMES = ("ground_front", "ground_back", "air_back", "air_top", "air_front")
LEG_NAMES = ("front_left", "front_right", "back_left", "back_right")
# crawl order FL -> BR -> FR -> BL
LEG_PHASE_OFFSETS = np.array([0.0, 0.5, 0.75, 0.25])
LEG_SIDE = np.array([-1.0, 1.0, -1.0, 1.0])  # +1 = right
LEG_END = np.array([1.0, 1.0, -1.0, -1.0])  # +1 = front


@dataclass(frozen=True)
class TrajectorySpline:
    knots: np.ndarray  # (5, 3) mm, lateral/cranial/dorsal
    knot_phases: np.ndarray  # (5,), knot_phases[0] == 0
    tangents: np.ndarray  # (5, 3) mm per unit phase
    period: float  # s

    @property
    def stance_end(self) -> float:
        return float(self.knot_phases[1])

    @property
    def step_length(self) -> float:
        return float(self.knots[0, 1] - self.knots[1, 1])

    def knot(self, name: str) -> np.ndarray:
        return self.knots[KNOT_NAMES.index(name)]

    def knot_phase(self, name: str) -> float:
        return float(self.knot_phases[KNOT_NAMES.index(name)])


def build_spline(spec: GaitSpec) -> TrajectorySpline:
    sp = spec.spline
    knots = np.array([sp.ground_front, sp.ground_back, sp.air_back, sp.air_top, sp.air_front], dtype=float)
    assert knots[0, 1] - knots[1, 1] > 0.0, "ground points must be separated along the cranial axis"
    lift = spec.gait.lift_duration
    stance_end = 1.0 - lift

    # swing segments: gb->ab, ab->at, at->af, af->gf
    swing_path = np.vstack([knots[1:], knots[:1]])
    chords = np.linalg.norm(np.diff(swing_path, axis=0), axis=1)
    cum = np.cumsum(chords)[:-1] / chords.sum()
    phases = np.concatenate([[0.0, stance_end], stance_end + lift * cum])

    tangents = np.empty_like(knots)
    stance_velocity = (knots[1] - knots[0]) / stance_end
    tangents[0] = tangents[1] = stance_velocity
    ext_phases = np.concatenate([phases, [1.0]])
    for i in (2, 3, 4):
        prev_p, next_p = knots[i - 1], knots[(i + 1) % 5]
        span = ext_phases[i + 1] - phases[i - 1]
        tangents[i] = (next_p - prev_p) / span

    return TrajectorySpline(knots, phases, tangents, 1.0 / spec.gait.frequency)


def _hermite(p0, p1, m0, m1, s, h):
    s2 = s * s
    s3 = s2 * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    return h00 * p0 + h10 * h * m0 + h01 * p1 + h11 * h * m1


def sample_foot(spline: TrajectorySpline, phase) -> np.ndarray:
    """Foot position (mm) at ``phase`` in [0, 1); accepts scalars or arrays.

    Returns shape (3,) for a scalar phase and (..., 3) otherwise.
    """
    phi = np.asarray(phase, dtype=float)
    if np.any((phi < 0.0) | (phi >= 1.0)) or not np.all(np.isfinite(phi)):
        raise ValueError("phase must lie in [0, 1); use sample_foot_wrapped for unwrapped phases")
    ext_phases = np.concatenate([spline.knot_phases, [1.0]])
    seg = np.searchsorted(spline.knot_phases, phi, side="right") - 1
    nxt = (seg + 1) % 5
    h = ext_phases[seg + 1] - ext_phases[seg]
    s = ((phi - ext_phases[seg]) / h)[..., None]
    return _hermite(
        spline.knots[seg], spline.knots[nxt], spline.tangents[seg], spline.tangents[nxt], s, h[..., None]
    )


def sample_foot_wrapped(spline: TrajectorySpline, phase) -> np.ndarray:
    return sample_foot(spline, np.mod(phase, 1.0))


def sample_loop(spline: TrajectorySpline, n: int = 1000) -> tuple[np.ndarray, np.ndarray]:
    """Evenly spaced phases over one period and the matching foot positions."""
    phases = np.arange(n) / n
    return phases, sample_foot(spline, phases)


def wag_offset(phase, gait: GaitParams) -> np.ndarray:
    """Body wag (lateral, cranial) in mm; lateral at the gait frequency, cranial at twice it."""
    u = np.asarray(phase, dtype=float) + gait.wag_phase / (2.0 * math.pi)
    lateral = gait.wag_amp_lateral * np.sin(2.0 * math.pi * u)
    cranial = gait.wag_amp_cranial * np.sin(4.0 * math.pi * u)
    return np.stack([lateral, cranial], axis=-1)


def leg_phases(t, frequency: float) -> np.ndarray:
    """Phase of every leg at time(s) ``t``; shape (..., 4)."""
    cycles = np.asarray(t, dtype=float)[..., None] * frequency + LEG_PHASE_OFFSETS
    return np.mod(cycles, 1.0)


def leg_targets(t, spec: GaitSpec, spline: TrajectorySpline) -> np.ndarray:
    """Foot targets for the four legs at time(s) ``t``, shape (..., 4, 3).

    Coordinates are in body axes, relative to each leg's neutral foot point
    below its hip (the frame the control points are defined in). The wag is
    subtracted: the body shifts by the wag, so the feet move the opposite way
    relative to it.
    """
    t = np.asarray(t, dtype=float)
    feet = sample_foot(spline, leg_phases(t, spec.gait.frequency))
    wag = wag_offset(np.mod(t * spec.gait.frequency, 1.0), spec.gait)
    if spec.gait.wag_amp_lateral == 0.0 and spec.gait.wag_amp_cranial == 0.0:
        return feet
    feet = feet.copy()
    feet[..., 0] -= wag[..., None, 0]
    feet[..., 1] -= wag[..., None, 1]
    return feet


def in_swing(phases, lift_duration: float) -> np.ndarray:
    return np.asarray(phases) >= 1.0 - lift_duration


def stance_progress(unwrapped_phase, lift_duration: float) -> np.ndarray:
    """Cumulative stance time, in phase units, up to an unwrapped phase."""
    u = np.asarray(unwrapped_phase, dtype=float)
    stance = 1.0 - lift_duration
    whole = np.floor(u)
    return whole * stance + np.minimum(u - whole, stance)


def dump_trajectory_csv(path, spline: TrajectorySpline, n: int = 1000) -> None:
    phases, pts = sample_loop(spline, n)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("phase,lateral,cranial,dorsal\n")
        for phi, (x, y, z) in zip(phases, pts):
            fh.write(f"{phi!r},{x!r},{y!r},{z!r}\n")
