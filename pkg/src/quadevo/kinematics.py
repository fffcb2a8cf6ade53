"""Three-joint leg kinematics (coxa yaw, femur pitch, tibia pitch).

Hip frame axes: x points outward from the body, y cranial, z dorsal. At zero
joint angles the leg is straight along +x. The femur and tibia move in the
vertical plane selected by the coxa yaw; the inverse solution takes the
knee-up branch (tibia angle <= 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

COXA_LENGTH = 60.0
FEMUR_BASE = 180.0
TIBIA_BASE = 190.0

JOINT_LIMITS = {
    "coxa": (-1.2, 1.2),
    "femur": (-1.5, 0.8),
    "tibia": (-2.6, 0.0),
}


class UnreachableError(ValueError):
    """Foot target outside the reachable annulus around the femur pivot."""

    def __init__(self, shortfall: float):
        super().__init__(f"foot target unreachable (shortfall {shortfall:.6g} mm)")
        self.shortfall = shortfall


@dataclass(frozen=True)
class LegGeometry:
    coxa_length: float = COXA_LENGTH
    femur_length: float = FEMUR_BASE
    tibia_length: float = TIBIA_BASE

    def __post_init__(self):
        if min(self.coxa_length, self.femur_length, self.tibia_length) <= 0:
            raise ValueError("leg segment lengths must be positive")

    @classmethod
    def from_extensions(cls, femur_extension: float, tibia_extension: float) -> "LegGeometry":
        if not (0.0 <= femur_extension <= 50.0 and 0.0 <= tibia_extension <= 100.0):
            raise ValueError("femur extension must be in [0, 50] mm and tibia extension in [0, 100] mm")
        return cls(COXA_LENGTH, FEMUR_BASE + femur_extension, TIBIA_BASE + tibia_extension)

    @property
    def reach(self) -> float:
        return self.femur_length + self.tibia_length


def forward_kinematics(angles, geom: LegGeometry) -> np.ndarray:
    """Foot position for joint angles (coxa, femur, tibia); broadcasts over leading axes."""
    a = np.asarray(angles, dtype=float)
    q1, q2, q3 = a[..., 0], a[..., 1], a[..., 2]
    planar = geom.coxa_length + geom.femur_length * np.cos(q2) + geom.tibia_length * np.cos(q2 + q3)
    z = geom.femur_length * np.sin(q2) + geom.tibia_length * np.sin(q2 + q3)
    return np.stack([np.cos(q1) * planar, np.sin(q1) * planar, z], axis=-1)


def inverse_kinematics(foot, geom: LegGeometry) -> np.ndarray:
    """Joint angles placing the foot at ``foot`` (hip frame, mm).

    Raises:
        UnreachableError: if any target lies outside the annulus
            [|Lf - Lt|, Lf + Lt] around the femur pivot. ``shortfall`` is the
            largest distance to the annulus.
    """
    p = np.asarray(foot, dtype=float)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    lf, lt = geom.femur_length, geom.tibia_length
    q1 = np.arctan2(y, x)
    rho = np.hypot(x, y) - geom.coxa_length
    d2 = rho * rho + z * z
    d = np.sqrt(d2)
    outer = d - (lf + lt)
    inner = abs(lf - lt) - d
    shortfall = np.maximum(outer, inner)
    # tolerate rounding at the annulus boundary
    if np.any(shortfall > 1e-9):
        raise UnreachableError(float(np.max(shortfall)))
    c3 = np.clip((d2 - lf * lf - lt * lt) / (2.0 * lf * lt), -1.0, 1.0)
    q3 = -np.arccos(c3)
    q2 = np.arctan2(z, rho) - np.arctan2(lt * np.sin(q3), lf + lt * np.cos(q3))
    q2 = np.mod(q2 + np.pi, 2.0 * np.pi) - np.pi
    return np.stack([q1, q2, q3], axis=-1)


def within_limits(angles) -> np.ndarray:
    a = np.asarray(angles, dtype=float)
    ok = np.ones(a.shape[:-1], dtype=bool)
    for i, (lo, hi) in enumerate(JOINT_LIMITS.values()):
        ok &= (a[..., i] >= lo) & (a[..., i] <= hi)
    return ok
