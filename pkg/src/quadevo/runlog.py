"""CSV and JSON persistence for run logs, checkpoints and re-evaluations.

Every file starts with a schema line (``# quadevo-<kind> schema <n>``); CSV
files follow it with a header row. Floats are written with ``repr`` so that
a read-write cycle is lossless and reruns are byte-identical.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
from pathlib import Path

import numpy as np

from .fitness import Fitness, FitnessConfig
from .nsga2 import EvolutionConfig, EvolutionState, Individual, RunLog
from .params import GENE_NAMES, format_genome

SCHEMA_VERSION = 1
RUNLOG_COLUMNS = (
    ["generation", "eval_index", *GENE_NAMES]
    + ["speed_m_per_min", "stability", "surface", "seed", "terminated_by", "sim_time_s"]
)
REEVAL_COLUMNS = [
    "individual", "training_surface", "source_run", "source_eval_index", "eval_surface", "repeat",
    "seed", "speed_m_per_min", "stability", "terminated_by", *GENE_NAMES,
]


class SchemaError(ValueError):
    pass


def schema_line(kind: str) -> str:
    return f"# quadevo-{kind} schema {SCHEMA_VERSION}\n"


def _f(x: float) -> str:
    return repr(float(x))


def runlog_row(ind: Individual) -> list[str]:
    return [
        str(ind.generation), str(ind.eval_index), *format_genome(ind.genome),
        _f(ind.fitness.speed), _f(ind.fitness.stability), ind.surface, str(ind.seed),
        ind.terminated_by, _f(ind.sim_time),
    ]


def _write_rows(fh, rows) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerows(rows)


def start_csv(path, kind: str, columns) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(schema_line(kind))
        _write_rows(fh, [columns])


def append_runlog(path, individuals) -> None:
    with open(path, "a", newline="", encoding="utf-8") as fh:
        _write_rows(fh, [runlog_row(ind) for ind in individuals])


def write_runlog(path, log: RunLog) -> None:
    start_csv(path, "runlog", RUNLOG_COLUMNS)
    append_runlog(path, log.records)


def read_csv(path, kind: str, columns) -> list[dict]:
    """Rows of a quadevo CSV as dicts; schema problems raise SchemaError with a line number."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        first = fh.readline()
        if first != schema_line(kind):
            raise SchemaError(f"{path}:1: expected schema line {schema_line(kind).strip()!r}")
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(columns):
            raise SchemaError(f"{path}:2: unexpected header {header}")
        rows = []
        for lineno, row in enumerate(reader, start=3):
            if len(row) != len(columns):
                raise SchemaError(f"{path}:{lineno}: expected {len(columns)} fields, got {len(row)}")
            rows.append(dict(zip(columns, row)))
        return rows


def _parse(path, lineno, fn, value, column):
    try:
        return fn(value)
    except ValueError as exc:
        raise SchemaError(f"{path}:{lineno}: bad value {value!r} in column {column}") from exc


def read_runlog(path) -> list[Individual]:
    out = []
    for lineno, row in enumerate(read_csv(path, "runlog", RUNLOG_COLUMNS), start=3):
        genome = np.array([_parse(path, lineno, float, row[g], g) for g in GENE_NAMES])
        fit = Fitness(
            _parse(path, lineno, float, row["speed_m_per_min"], "speed_m_per_min"),
            _parse(path, lineno, float, row["stability"], "stability"),
        )
        out.append(Individual(
            genome, fit,
            generation=_parse(path, lineno, int, row["generation"], "generation"),
            eval_index=_parse(path, lineno, int, row["eval_index"], "eval_index"),
            seed=_parse(path, lineno, int, row["seed"], "seed"),
            surface=row["surface"], terminated_by=row["terminated_by"],
            sim_time=_parse(path, lineno, float, row["sim_time_s"], "sim_time_s"),
        ))
    return out


def truncate_runlog(path, next_eval: int) -> None:
    """Drop rows at or beyond ``next_eval`` (left over from an interrupted generation)."""
    keep = [ind for ind in read_runlog(path) if ind.eval_index < next_eval]
    start_csv(path, "runlog", RUNLOG_COLUMNS)
    append_runlog(path, keep)


# -- JSON ------------------------------------------------------------------

def _atomic_json(path, payload) -> None:
    tmp = Path(str(path) + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def config_to_dict(cfg: EvolutionConfig) -> dict:
    return dataclasses.asdict(cfg)


def config_from_dict(d: dict) -> EvolutionConfig:
    d = dict(d)
    d["fitness"] = FitnessConfig(**{**d["fitness"], "axes": tuple(d["fitness"]["axes"])})
    return EvolutionConfig(**d)


def _ind_to_dict(ind: Individual) -> dict:
    return {
        "genome": [float(x) for x in ind.genome],
        "speed": ind.fitness.speed, "stability": ind.fitness.stability,
        "rank": ind.rank, "crowding": ind.crowding, "generation": ind.generation,
        "eval_index": ind.eval_index, "seed": ind.seed, "surface": ind.surface,
        "terminated_by": ind.terminated_by, "sim_time": ind.sim_time,
    }


def _ind_from_dict(d: dict) -> Individual:
    return Individual(
        np.array(d["genome"], dtype=float), Fitness(d["speed"], d["stability"]), rank=d["rank"],
        crowding=d["crowding"], generation=d["generation"], eval_index=d["eval_index"], seed=d["seed"],
        surface=d["surface"], terminated_by=d["terminated_by"], sim_time=d["sim_time"],
    )


def write_checkpoint(path, state: EvolutionState, complete: bool = False) -> None:
    _atomic_json(path, {
        "schema_version": SCHEMA_VERSION,
        "complete": complete,
        "generation": state.generation,
        "next_eval": state.next_eval,
        "sim_time": state.sim_time,
        "rng_state": state.rng_state,
        "population": [_ind_to_dict(ind) for ind in state.population],
    })


def read_checkpoint(path) -> tuple[EvolutionState, bool]:
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    if d.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"{path}: unsupported checkpoint schema {d.get('schema_version')}")
    state = EvolutionState(
        d["generation"], d["next_eval"], d["sim_time"], [_ind_from_dict(p) for p in d["population"]],
        d["rng_state"],
    )
    return state, bool(d["complete"])


def write_json(path, payload: dict) -> None:
    _atomic_json(path, {"schema_version": SCHEMA_VERSION, **payload})


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    if d.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"{path}: unsupported schema {d.get('schema_version')}")
    return d
