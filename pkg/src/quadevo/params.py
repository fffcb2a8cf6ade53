"""Search space: the 18 normalized genes and their physical ranges.

Gene order is frozen so that run logs stay replayable. The first eleven genes
shape the foot trajectory (control point rows, then lateral/cranial/dorsal
columns), the last seven are the global gait timing, wag and leg extensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

WAG_PHASE_LIMIT = math.pi / 8

# (name, lo, hi, unit) in genome order
SCHEMA: tuple[tuple[str, float, float, str], ...] = (
    ("ground_front_cranial", 0.0, 100.0, "mm"),
    ("ground_back_cranial", -150.0, -50.0, "mm"),
    ("air_front_lateral", -12.5, 12.5, "mm"),
    ("air_front_cranial", 25.0, 125.0, "mm"),
    ("air_front_dorsal", 19.0, 41.0, "mm"),
    ("air_top_lateral", -12.5, 12.5, "mm"),
    ("air_top_cranial", -30.0, 30.0, "mm"),
    ("air_top_dorsal", 39.0, 61.0, "mm"),
    ("air_back_lateral", -12.5, 12.5, "mm"),
    ("air_back_cranial", -125.0, -25.0, "mm"),
    ("air_back_dorsal", 19.0, 41.0, "mm"),
    ("wag_phase", -WAG_PHASE_LIMIT, WAG_PHASE_LIMIT, "rad"),
    ("wag_amp_lateral", 0.0, 14.0, "mm"),
    ("wag_amp_cranial", 0.0, 14.0, "mm"),
    ("lift_duration", 0.13, 0.20, "fraction"),
    ("frequency", 0.25, 1.0, "Hz"),
    ("femur_extension", 0.0, 50.0, "mm"),
    ("tibia_extension", 0.0, 100.0, "mm"),
)

GENE_NAMES: tuple[str, ...] = tuple(s[0] for s in SCHEMA)
N_GENES = len(SCHEMA)
N_SPLINE_GENES = 11
LOWER = np.array([s[1] for s in SCHEMA])
UPPER = np.array([s[2] for s in SCHEMA])
BOUNDS: dict[str, tuple[float, float]] = {s[0]: (s[1], s[2]) for s in SCHEMA}
MORPHOLOGY_GENES = ("femur_extension", "tibia_extension")


class GenomeError(ValueError):
    """Raised for malformed genomes; ``index`` points at the offending gene."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class PhenotypeError(ValueError):
    """Raised when a phenotype value is outside its allowed range."""


@dataclass(frozen=True)
class SplineParams:
    """Foot trajectory control points in mm (lateral, cranial, dorsal).

    Both ground points sit at lateral 0 and dorsal 0, so only their cranial
    coordinate is stored.
    """

    ground_front_cranial: float
    ground_back_cranial: float
    air_front: tuple[float, float, float]
    air_top: tuple[float, float, float]
    air_back: tuple[float, float, float]

    @property
    def ground_front(self) -> tuple[float, float, float]:
        return (0.0, self.ground_front_cranial, 0.0)

    @property
    def ground_back(self) -> tuple[float, float, float]:
        return (0.0, self.ground_back_cranial, 0.0)

    @property
    def step_length(self) -> float:
        return self.ground_front_cranial - self.ground_back_cranial


@dataclass(frozen=True)
class GaitParams:
    wag_phase: float
    wag_amp_lateral: float
    wag_amp_cranial: float
    lift_duration: float
    frequency: float

    @property
    def period(self) -> float:
        return 1.0 / self.frequency


@dataclass(frozen=True)
class MorphologyParams:
    femur_extension: float
    tibia_extension: float


@dataclass(frozen=True)
class GaitSpec:
    spline: SplineParams
    gait: GaitParams
    morphology: MorphologyParams

    def as_vector(self) -> np.ndarray:
        """Phenotype values in genome order."""
        s, g, m = self.spline, self.gait, self.morphology
        return np.array(
            [s.ground_front_cranial, s.ground_back_cranial, *s.air_front, *s.air_top, *s.air_back]
            + [getattr(g, f.name) for f in fields(g)]
            + [m.femur_extension, m.tibia_extension],
            dtype=float,
        )

    @classmethod
    def from_vector(cls, values) -> "GaitSpec":
        v = [float(x) for x in values]
        if len(v) != N_GENES:
            raise PhenotypeError(f"expected {N_GENES} phenotype values, got {len(v)}")
        spline = SplineParams(v[0], v[1], tuple(v[2:5]), tuple(v[5:8]), tuple(v[8:11]))
        gait = GaitParams(*v[11:16])
        return cls(spline, gait, MorphologyParams(v[16], v[17]))


def check_genome(genome) -> np.ndarray:
    g = np.asarray(genome, dtype=float)
    if g.ndim != 1 or g.shape[0] != N_GENES:
        raise GenomeError(f"genome must have exactly {N_GENES} elements, got shape {g.shape}")
    for i, x in enumerate(g):
        if not math.isfinite(x) or x < 0.0 or x > 1.0:
            raise GenomeError(f"gene {i} ({GENE_NAMES[i]}) = {x!r} is outside [0, 1]", index=i)
    return g


def decode(genome) -> GaitSpec:
    """Map a normalized genome onto physical parameters, gene by gene."""
    g = check_genome(genome)
    return GaitSpec.from_vector(LOWER + g * (UPPER - LOWER))


def encode(spec: GaitSpec) -> np.ndarray:
    problems = validate(spec)
    if problems:
        raise PhenotypeError("; ".join(str(p) for p in problems))
    g = (spec.as_vector() - LOWER) / (UPPER - LOWER)
    return np.clip(g, 0.0, 1.0)


@dataclass(frozen=True)
class Violation:
    field: str
    value: float
    lo: float
    hi: float

    def __str__(self) -> str:
        return f"{self.field}={self.value!r} outside [{self.lo}, {self.hi}]"


def validate(spec: GaitSpec) -> list[Violation]:
    """List every out-of-range phenotype value, in genome order."""
    out = []
    for (name, lo, hi, _), value in zip(SCHEMA, spec.as_vector()):
        if not (math.isfinite(value) and lo <= value <= hi):
            out.append(Violation(name, float(value), lo, hi))
    return out


def random_genome(rng: np.random.Generator) -> np.ndarray:
    return rng.random(N_GENES)


def format_genome(genome) -> list[str]:
    """Full-precision text for each gene, suitable for CSV round trips."""
    return [repr(float(x)) for x in genome]
