"""Deterministic kinematic stand-in for the robot walking on a surface.

Nothing here is rigid-body physics. The model is a small set of monotone,
seeded mechanisms that give the optimizer and the analysis pipeline
something with the right structure:

* stance feet push the body forward; the push is scaled by a grip factor
  (friction and speed-dependent slip on soft ground) and by how well the
  joints can track the commanded stance path under a joint-speed limit,
  which is easier with longer legs;
* feet sink into soft ground while loaded, and rough ground adds per-step
  height noise; the resulting foot height differences tilt the body, and the
  tilt response grows with stance height (leg length);
* lifting a leg tips the body toward the unsupported corner, which the wag
  can counter; low swing clearance on soft/rough ground makes the feet
  stumble;
* orientation follows those drives through a critically damped
  second-order filter; acceleration is the second derivative of body
  position plus terrain jitter.

Control runs at 50 Hz, the sensor trace is produced at 100 Hz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from . import gait
from .kinematics import LegGeometry, UnreachableError, inverse_kinematics
from .params import GaitSpec

TERMINATED_BY = ("distance", "timeout")


@dataclass(frozen=True)
class SurfaceModel:
    name: str
    hardness: float
    roughness: float
    friction: float = 1.0
    sinkage_gain: float = 30.0  # mm at hardness 0
    noise_gain: float = 10.0  # mm at roughness 1

    def __post_init__(self):
        for attr in ("hardness", "roughness", "friction"):
            value = getattr(self, attr)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"surface {self.name}: {attr}={value} outside [0, 1]")
        if self.sinkage_gain < 0 or self.noise_gain < 0:
            raise ValueError(f"surface {self.name}: gains must be non-negative")


def surface_library(friction: float = 1.0, sinkage_gain: float = 30.0, noise_gain: float = 10.0) -> dict[str, SurfaceModel]:
    """The four test surfaces: hard/soft x fine/coarse. A is the hard, fine baseline."""
    grid = {"A": (0.95, 0.05), "B": (0.25, 0.05), "C": (0.95, 0.75), "D": (0.25, 0.75)}
    return {
        name: SurfaceModel(name, hardness, roughness, friction, sinkage_gain, noise_gain)
        for name, (hardness, roughness) in grid.items()
    }


@dataclass(frozen=True)
class SurrogateConfig:
    sample_rate: float = 100.0
    control_rate: float = gait.CONTROL_RATE_HZ
    max_time: float = 10.0
    stop_distance: float = 1.0  # m
    reach_ratio: float = 0.25  # neutral foot offset outward of the coxa tip / (femur + tibia)
    stand_ratio: float = 0.72  # stance height / (femur + tibia)
    hip_half_width: float = 100.0  # mm
    hip_half_length: float = 200.0  # mm
    joint_speed_limit: float = 1.0  # rad/s
    ref_speed: float = 300.0  # mm/s, slip saturates here
    support_tilt: float = 0.03  # rad per lifted leg
    wag_gain: float = 0.0025  # rad per mm of wag
    orientation_rate: float = 12.0  # rad/s, natural frequency of the tilt filter
    ref_height: float = 266.4  # mm, stance height of the shortest legs
    height_exponent: float = 3.0
    sink_time: float = 0.15  # phase units to reach 63 % of full sinkage
    sink_variation: float = 0.5
    clearance_min: float = 30.0  # mm
    stumble_gain: float = 0.004  # rad per mm of missing clearance
    yaw_gain: float = 0.5
    acc_jitter: float = 0.5  # m/s^2


@dataclass(frozen=True)
class EvaluationTrace:
    times: np.ndarray  # (n,) s
    positions: np.ndarray  # (n, 3) m, lateral/cranial/dorsal
    orientations: np.ndarray  # (n, 3) rad, roll/pitch/yaw
    accelerations: np.ndarray  # (n, 3) m/s^2
    t_start: float
    t_end: float
    terminated_by: str
    failed: bool = False
    detail: str = ""

    @property
    def displacement(self) -> float:
        return float(np.linalg.norm(self.positions[-1] - self.positions[0]))

    def check(self, sample_rate: float = 100.0) -> None:
        n = len(self.times)
        assert self.positions.shape == (n, 3) and self.orientations.shape == (n, 3)
        assert self.accelerations.shape == (n, 3)
        assert self.t_end - self.t_start <= 10.0 + 1e-9
        if n > 1:
            assert np.allclose(np.diff(self.times), 1.0 / sample_rate)
        if self.terminated_by == "distance":
            assert self.displacement >= 1.0

    def to_csv(self, path) -> None:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write("t,px,py,pz,roll,pitch,yaw,ax,ay,az\n")
            for t, p, o, a in zip(self.times, self.positions, self.orientations, self.accelerations):
                fh.write(",".join(repr(float(v)) for v in (t, *p, *o, *a)) + "\n")


def failed_trace(detail: str) -> EvaluationTrace:
    zeros = np.zeros((1, 3))
    return EvaluationTrace(np.zeros(1), zeros, zeros, zeros.copy(), 0.0, 0.0, "timeout", True, detail)


def _noise_stream(seed: int, n_steps: int, n_samples: int):
    # Philox is counter based: each rollout owns an independent stream keyed by its seed,
    # and the draw shapes do not depend on the gait being evaluated.
    rng = np.random.Generator(np.random.Philox(key=int(seed) % (1 << 64)))
    step_noise = rng.standard_normal((n_steps, 4))
    sink_noise = rng.standard_normal((n_steps, 4))
    jitter = rng.standard_normal((n_samples, 3))
    return step_noise, sink_noise, jitter


def _hip_frame(targets: np.ndarray, geom: LegGeometry, cfg: SurrogateConfig, stand_height: float) -> np.ndarray:
    out = np.empty_like(targets)
    out[..., 0] = gait.LEG_SIDE * targets[..., 0] + geom.coxa_length + cfg.reach_ratio * geom.reach
    out[..., 1] = targets[..., 1]
    out[..., 2] = targets[..., 2] - stand_height
    return out


def _damped_filter(drive: np.ndarray, rate: float, dt: float) -> np.ndarray:
    # critically damped w^2 / (s + w)^2, discretized with the bilinear transform
    num, den = signal.bilinear([rate * rate], [1.0, 2.0 * rate, rate * rate], fs=1.0 / dt)
    zi = signal.lfilter_zi(num, den)
    return np.stack(
        [signal.lfilter(num, den, drive[:, k], zi=zi * drive[0, k])[0] for k in range(drive.shape[1])], axis=1
    )


def stance_height(geom: LegGeometry, cfg: SurrogateConfig) -> float:
    return cfg.stand_ratio * geom.reach


def grip_factor(spec: GaitSpec, surface: SurfaceModel, cfg: SurrogateConfig) -> float:
    """Fraction of the commanded stance push that moves the body."""
    speed = spec.spline.step_length * spec.gait.frequency / (1.0 - spec.gait.lift_duration)
    slip = (1.0 - surface.hardness) * (1.0 - 0.5 * surface.friction) * min(max(speed / cfg.ref_speed, 0.0), 1.0)
    return surface.friction * (1.0 - slip)


def rollout(spec: GaitSpec, surface: SurfaceModel, seed: int, cfg: SurrogateConfig | None = None) -> EvaluationTrace:
    """Walk ``spec`` on ``surface``; a pure function of its arguments.

    Ends when the body is 1 m from its start or after 10 s. Targets the legs
    cannot reach produce a trace with ``failed=True`` instead of an exception.
    """
    cfg = cfg or SurrogateConfig()
    f = spec.gait.frequency
    lift = spec.gait.lift_duration
    stance_end = 1.0 - lift
    geom = LegGeometry.from_extensions(spec.morphology.femur_extension, spec.morphology.tibia_extension)
    spline = gait.build_spline(spec)
    height = stance_height(geom, cfg)

    dt = 1.0 / cfg.control_rate
    n_ticks = int(round(cfg.max_time * cfg.control_rate))
    tk = np.arange(n_ticks + 1) * dt
    unwrapped = tk[:, None] * f + gait.LEG_PHASE_OFFSETS
    phases = np.mod(unwrapped, 1.0)

    n_steps = int(math.ceil(cfg.max_time * 1.0)) + 2
    n_samples = int(round(cfg.max_time * cfg.sample_rate)) + 1
    step_noise, sink_noise, jitter = _noise_stream(seed, n_steps, n_samples)

    targets = gait.leg_targets(tk, spec, spline)
    try:
        inverse_kinematics(_hip_frame(targets, geom, cfg, height), geom)
    except UnreachableError as exc:
        return failed_trace(str(exc))

    # -- forward progress --------------------------------------------------
    stance_phase = np.diff(gait.stance_progress(unwrapped, lift), axis=0)  # (n, 4)
    stance_speed = spline.step_length / stance_end  # mm per unit phase
    tracking = _stance_tracking(spline, spec, geom, cfg, height, tk, phases)
    push = stance_phase * stance_speed * tracking
    forward = np.concatenate([[0.0], np.cumsum(grip_factor(spec, surface, cfg) * push.sum(axis=1) / 4.0)])

    wag = gait.wag_offset(np.mod(tk * f, 1.0), spec.gait)

    # -- terrain contact ---------------------------------------------------
    in_stance = phases < stance_end
    step_idx = np.floor(unwrapped).astype(int)
    legs = np.arange(4)
    sink_full = surface.sinkage_gain * (1.0 - surface.hardness)
    sink_scale = np.maximum(0.0, 1.0 + cfg.sink_variation * sink_noise[step_idx, legs])
    sink = sink_full * sink_scale * (1.0 - np.exp(-phases / cfg.sink_time))
    ground = surface.noise_gain * surface.roughness * step_noise[step_idx, legs]
    foot_height = np.where(in_stance, ground - sink, 0.0)

    # taller stances respond more to uneven support, in proportion to how soft or rough the ground is
    severity = max(1.0 - surface.hardness, surface.roughness)
    amp = 1.0 + ((height / cfg.ref_height) ** cfg.height_exponent - 1.0) * severity
    n_stance = in_stance.sum(axis=1)

    def side_mean(mask):
        w = in_stance & mask
        return (foot_height * w).sum(axis=1) / np.maximum(w.sum(axis=1), 1)

    right, left = gait.LEG_SIDE > 0, gait.LEG_SIDE < 0
    front, back = gait.LEG_END > 0, gait.LEG_END < 0
    roll_terrain = amp * (side_mean(right) - side_mean(left)) / (2.0 * cfg.hip_half_width)
    pitch_terrain = amp * (side_mean(back) - side_mean(front)) / (2.0 * cfg.hip_half_length)
    twist = (foot_height * gait.LEG_SIDE * gait.LEG_END).sum(axis=1) / np.maximum(n_stance, 1)
    yaw_terrain = cfg.yaw_gain * amp * twist / (2.0 * cfg.hip_half_width)

    # -- support and wag ---------------------------------------------------
    swing_weight = np.where(in_stance, 0.0, np.sin(math.pi * (phases - stance_end) / lift))
    roll_support = cfg.support_tilt * (swing_weight * gait.LEG_SIDE).sum(axis=1) + cfg.wag_gain * wag[:, 0]
    pitch_support = cfg.support_tilt * (swing_weight * gait.LEG_END).sum(axis=1) + cfg.wag_gain * wag[:, 1]

    air = spec.spline
    clearance = min(air.air_back[2], air.air_front[2]) - sink_full - 2.0 * surface.noise_gain * surface.roughness
    stumble = cfg.stumble_gain * max(0.0, cfg.clearance_min - clearance)
    pitch_stumble = stumble * (swing_weight * gait.LEG_END).sum(axis=1)

    drive = np.stack(
        [roll_support + roll_terrain, pitch_support + pitch_terrain + pitch_stumble, yaw_terrain], axis=1
    )
    orient_ticks = _damped_filter(drive, cfg.orientation_rate, dt)

    sunk = (sink * in_stance).sum(axis=1) / np.maximum(n_stance, 1)
    pos_ticks = np.stack([wag[:, 0], forward + wag[:, 1], height - sunk], axis=1) * 1e-3

    # -- 100 Hz sensor trace -----------------------------------------------
    ts = np.arange(n_samples) / cfg.sample_rate
    positions = np.stack([np.interp(ts, tk, pos_ticks[:, k]) for k in range(3)], axis=1)
    orientations = np.stack([np.interp(ts, tk, orient_ticks[:, k]) for k in range(3)], axis=1)
    sdt = 1.0 / cfg.sample_rate
    acc = np.gradient(np.gradient(positions, sdt, axis=0), sdt, axis=0)
    jitter_scale = cfg.acc_jitter * (surface.roughness + (1.0 - surface.hardness))
    acc = acc + jitter_scale * jitter

    dist = np.linalg.norm(positions - positions[0], axis=1)
    reached = np.flatnonzero(dist >= cfg.stop_distance)
    if reached.size:
        end = int(reached[0]) + 1
        terminated = "distance"
    else:
        end = n_samples
        terminated = "timeout"
    return EvaluationTrace(
        ts[:end], positions[:end], orientations[:end], acc[:end], 0.0, float(ts[end - 1]), terminated
    )


def _stance_tracking(spline, spec, geom, cfg, height, tk, phases) -> np.ndarray:
    """Per tick and leg, the fraction of the stance push the joints can deliver."""
    stance_end = spline.stance_end
    a, b = phases[:-1], phases[1:]
    a_in, b_in = a < stance_end, b < stance_end
    start = np.where(a_in, a, 0.0)
    stop = np.where(b_in & (b >= start), b, stance_end)
    gf, gb = spline.knots[0], spline.knots[1]

    def path(phi, t):
        p = gf + (gb - gf) * (phi[..., None] / stance_end)
        w = gait.wag_offset(np.mod(t * spec.gait.frequency, 1.0), spec.gait)
        p[..., 0] -= w[:, None, 0]
        p[..., 1] -= w[:, None, 1]
        return _hip_frame(p, geom, cfg, height)

    q0 = inverse_kinematics(path(start, tk[:-1]), geom)
    q1 = inverse_kinematics(path(stop, tk[1:]), geom)
    omega = np.abs(q1 - q0).max(axis=-1) * cfg.control_rate
    ratio = np.minimum(1.0, cfg.joint_speed_limit / np.maximum(omega, 1e-12))
    return np.where(a_in | b_in, ratio, 1.0)
