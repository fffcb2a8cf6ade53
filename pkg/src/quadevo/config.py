"""Experiment definitions in an INI-style, sectioned key/value file.

Example::

    [experiment]
    name = exp1
    train_surfaces = A, B
    runs_per_surface = 5
    base_seed = 1000

    [evolution]
    population_size = 8
    generations = 32
    mutation_sigma = 1/6

    [fitness]
    alpha = 1/50

    [surface E]          ; adds a surface, or overrides a library one
    hardness = 0.5
    roughness = 0.3

Numbers may be written as fractions. Unknown keys are rejected.
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .fitness import FitnessConfig
from .nsga2 import EvolutionConfig
from .surrogate import SurfaceModel, SurrogateConfig, surface_library

OUTPUT_ENV = "QUADEVO_OUTPUT_ROOT"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ReevalSettings:
    selection_count: int = 6
    repeats: int = 20
    surfaces: tuple[str, ...] = ("A", "B", "C", "D")
    seed: int = 0


@dataclass(frozen=True)
class RunSpec:
    run_id: str
    surface: str
    seed: int
    order: int


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    output_dir: Path | None = None
    train_surfaces: tuple[str, ...] = ("A", "B")
    runs_per_surface: int = 5
    base_seed: int = 1000
    seeds: tuple[int, ...] = ()
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    surrogate: SurrogateConfig = field(default_factory=SurrogateConfig)
    surfaces: dict[str, SurfaceModel] = field(default_factory=surface_library)
    reeval: ReevalSettings = field(default_factory=ReevalSettings)

    def run_matrix(self) -> list[RunSpec]:
        """Runs alternate between training surfaces, as A1, B1, A2, B2, ..."""
        runs = []
        order = 0
        for k in range(self.runs_per_surface):
            for surface in self.train_surfaces:
                seed = self.seeds[order] if self.seeds else self.base_seed + order
                runs.append(RunSpec(f"{surface}-{k + 1:02d}", surface, seed, order))
                order += 1
        return runs

    def resolve_output(self) -> Path:
        if self.output_dir is not None:
            return Path(self.output_dir)
        root = os.environ.get(OUTPUT_ENV, "quadevo-output")
        return Path(root) / self.name

    def validate(self) -> None:
        for s in self.train_surfaces:
            if s not in self.surfaces:
                raise ConfigError(f"[experiment] train_surfaces: unknown surface {s}")
        for s in self.reeval.surfaces:
            if s not in self.surfaces:
                raise ConfigError(f"[reevaluation] surfaces: unknown surface {s}")
        if self.runs_per_surface < 1:
            raise ConfigError("[experiment] runs_per_surface must be at least 1")
        n_runs = self.runs_per_surface * len(self.train_surfaces)
        if self.seeds:
            if len(self.seeds) != n_runs:
                raise ConfigError(f"[experiment] seeds: expected {n_runs} seeds, got {len(self.seeds)}")
            if len(set(self.seeds)) != len(self.seeds):
                raise ConfigError("[experiment] seeds: seeds must be unique")


def _number(section: str, key: str, text: str) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"[{section}] {key}: not a number: {text!r}") from exc


def _integer(section: str, key: str, text: str) -> int:
    value = _number(section, key, text)
    if value != int(value):
        raise ConfigError(f"[{section}] {key}: expected an integer, got {text!r}")
    return int(value)


def _boolean(section: str, key: str, text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{section}] {key}: expected a boolean, got {text!r}")


def _names(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _coerce_fields(section: str, items, target_cls, skip=()) -> dict:
    hints = {f.name: f.type for f in dataclasses.fields(target_cls)}
    out = {}
    for key, text in items:
        if key not in hints or key in skip:
            raise ConfigError(f"[{section}] {key}: unknown key")
        kind = str(hints[key])
        if kind == "int":
            out[key] = _integer(section, key, text)
        elif kind == "bool":
            out[key] = _boolean(section, key, text)
        elif kind == "float":
            out[key] = _number(section, key, text)
        elif kind == "str":
            out[key] = text.strip()
        else:
            raise ConfigError(f"[{section}] {key}: cannot be set from a config file")
    return out


def load_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    parser.read(path, encoding="utf-8")
    cfg = ExperimentConfig()
    known = {"experiment", "evolution", "fitness", "surrogate", "reevaluation"}

    for section in parser.sections():
        if section in known or section.startswith("surface "):
            continue
        raise ConfigError(f"[{section}]: unknown section")

    if parser.has_section("experiment"):
        sec = parser["experiment"]
        for key, text in sec.items():
            if key == "name":
                cfg.name = text.strip()
            elif key == "output_dir":
                cfg.output_dir = Path(text.strip())
            elif key == "train_surfaces":
                cfg.train_surfaces = _names(text)
            elif key == "runs_per_surface":
                cfg.runs_per_surface = _integer("experiment", key, text)
            elif key == "base_seed":
                cfg.base_seed = _integer("experiment", key, text)
            elif key == "seeds":
                cfg.seeds = tuple(_integer("experiment", key, t) for t in _names(text))
            else:
                raise ConfigError(f"[experiment] {key}: unknown key")

    fitness = FitnessConfig(**_coerce_fields("fitness", parser.items("fitness"), FitnessConfig, skip=("axes",))) \
        if parser.has_section("fitness") else FitnessConfig()
    evo_kw = _coerce_fields("evolution", parser.items("evolution"), EvolutionConfig, skip=("rng_seed", "surface")) \
        if parser.has_section("evolution") else {}
    try:
        cfg.evolution = EvolutionConfig(**evo_kw, fitness=fitness)
    except ValueError as exc:
        raise ConfigError(f"[evolution] {exc}") from exc
    if parser.has_section("surrogate"):
        cfg.surrogate = SurrogateConfig(**_coerce_fields("surrogate", parser.items("surrogate"), SurrogateConfig))

    for section in parser.sections():
        if not section.startswith("surface "):
            continue
        name = section[len("surface "):].strip()
        base = cfg.surfaces.get(name)
        kw = dataclasses.asdict(base) if base else {"name": name}
        kw.update(_coerce_fields(section, parser.items(section), SurfaceModel, skip=("name",)))
        try:
            cfg.surfaces[name] = SurfaceModel(**kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{section}] {exc}") from exc

    if parser.has_section("reevaluation"):
        kw = {}
        for key, text in parser["reevaluation"].items():
            if key in ("selection_count", "repeats", "seed"):
                kw[key] = _integer("reevaluation", key, text)
            elif key == "surfaces":
                kw[key] = _names(text)
            else:
                raise ConfigError(f"[reevaluation] {key}: unknown key")
        cfg.reeval = ReevalSettings(**kw)

    cfg.validate()
    return cfg
