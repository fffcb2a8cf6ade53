"""Experiment workflows behind the CLI: evolve, re-evaluate, analyze, export."""

from __future__ import annotations

import dataclasses
import json
import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import runlog as io
from .analysis import (
    distance_matrix,
    hypervolume_2d,
    hypervolume_convergence,
    kde_scott,
    mean_confidence_band,
    mean_spline,
    pareto_front,
    parameter_significance,
)
from .config import ExperimentConfig, RunSpec
from .fitness import FitnessConfig, evaluate_with_trace
from .nsga2 import EvolutionConfig, Individual, run_evolution, surrogate_evaluator
from .params import GENE_NAMES, decode, format_genome
from .surrogate import SurfaceModel, SurrogateConfig

log = logging.getLogger(__name__)

RUNS_DIR = "runs"


class WorkflowError(RuntimeError):
    pass


# -- evolve ------------------------------------------------------------------

def _run_payload(cfg: ExperimentConfig, spec: RunSpec, evo: EvolutionConfig) -> dict:
    return {
        "run_id": spec.run_id,
        "run_order": spec.order,
        "experiment": cfg.name,
        "evolution": io.config_to_dict(evo),
        "surrogate": dataclasses.asdict(cfg.surrogate),
        "surfaces": {name: dataclasses.asdict(s) for name, s in sorted(cfg.surfaces.items())},
        "reevaluation": dataclasses.asdict(cfg.reeval),
    }


def evolve_run(cfg: ExperimentConfig, spec: RunSpec, out_root: Path, stop_after: int | None = None) -> Path:
    """Run (or resume) one evolutionary run; returns its directory.

    A checkpoint is written after every generation. An interrupted run picks up
    from the last checkpoint and produces the same log as an uninterrupted one.
    """
    run_dir = out_root / RUNS_DIR / spec.run_id
    run_dir.mkdir(parents=True, exist_ok=True)
    evo = dataclasses.replace(cfg.evolution, rng_seed=spec.seed, surface=spec.surface)
    csv_path = run_dir / "runlog.csv"
    ckpt_path = run_dir / "checkpoint.json"
    payload = _run_payload(cfg, spec, evo)

    state = None
    if ckpt_path.exists():
        previous = io.read_json(run_dir / "config.json")
        previous.pop("schema_version")
        if previous != json.loads(json.dumps(payload)):
            raise WorkflowError(f"{run_dir}: existing run was started with a different configuration")
        state, complete = io.read_checkpoint(ckpt_path)
        if complete:
            log.info("run %s already complete", spec.run_id)
            return run_dir
        io.truncate_runlog(csv_path, state.next_eval)
        log.info("resuming run %s after generation %d", spec.run_id, state.generation)
    else:
        io.write_json(run_dir / "config.json", payload)
        io.start_csv(csv_path, "runlog", io.RUNLOG_COLUMNS)

    def checkpoint(_log, new_records, st):
        io.append_runlog(csv_path, new_records)
        io.write_checkpoint(ckpt_path, st)

    evaluator = surrogate_evaluator(cfg.surfaces[spec.surface], evo.fitness, cfg.surrogate)
    run_evolution(evo, evaluator, state=state, on_generation=checkpoint, stop_after=stop_after)

    final_state, _ = io.read_checkpoint(ckpt_path)
    if final_state.generation == evo.offspring_generations:
        io.start_csv(run_dir / "final_population.csv", "runlog", io.RUNLOG_COLUMNS)
        io.append_runlog(run_dir / "final_population.csv", final_state.population)
        io.write_checkpoint(ckpt_path, final_state, complete=True)
    return run_dir


def _evolve_job(args):
    cfg, spec, out_root = args
    return evolve_run(cfg, spec, out_root)


def evolve(cfg: ExperimentConfig, jobs: int = 1, out_root: Path | None = None) -> list[Path]:
    cfg.validate()
    out_root = Path(out_root) if out_root else cfg.resolve_output()
    matrix = cfg.run_matrix()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_evolve_job, [(cfg, spec, out_root) for spec in matrix]))
    return [evolve_run(cfg, spec, out_root) for spec in matrix]


# -- loading runs ----------------------------------------------------------

@dataclasses.dataclass
class LoadedRun:
    run_id: str
    surface: str
    order: int
    config: dict
    records: list[Individual]


def load_runs(runs_dir) -> list[LoadedRun]:
    runs_dir = Path(runs_dir)
    if (runs_dir / RUNS_DIR).is_dir():
        runs_dir = runs_dir / RUNS_DIR
    runs = []
    for d in sorted(p for p in runs_dir.iterdir() if (p / "runlog.csv").exists()):
        conf = io.read_json(d / "config.json")
        runs.append(LoadedRun(conf["run_id"], conf["evolution"]["surface"], conf["run_order"], conf,
                              io.read_runlog(d / "runlog.csv")))
    if not runs:
        raise WorkflowError(f"no run logs found under {runs_dir}")
    runs.sort(key=lambda r: r.order)
    return runs


def merged_fronts(runs: list[LoadedRun]) -> dict[str, list[tuple[str, Individual]]]:
    """Union of every run's Pareto front, grouped by training surface."""
    out: dict[str, list[tuple[str, Individual]]] = defaultdict(list)
    for run in runs:
        for ind in pareto_front(run.records).members:
            out[run.surface].append((run.run_id, ind))
    return dict(sorted(out.items()))


def _surfaces_from(conf: dict) -> dict[str, SurfaceModel]:
    return {name: SurfaceModel(**d) for name, d in conf["surfaces"].items()}


def _fitness_from(conf: dict) -> FitnessConfig:
    return io.config_from_dict(conf["evolution"]).fitness


# -- re-evaluation -----------------------------------------------------------

def reevaluation_seed(seed: int, individual: int, surface_index: int, repeat: int) -> int:
    return int(np.random.SeedSequence([seed, individual, surface_index, repeat]).generate_state(1, np.uint32)[0])


def reevaluate(runs_dir, out_path, seed: int, count: int | None = None, repeats: int | None = None,
               surfaces: tuple[str, ...] | None = None) -> Path:
    """Re-test randomly chosen front members on every surface, many times each."""
    runs = load_runs(runs_dir)
    conf = runs[0].config
    settings = conf["reevaluation"]
    count = settings["selection_count"] if count is None else count
    repeats = settings["repeats"] if repeats is None else repeats
    surfaces = tuple(settings["surfaces"]) if surfaces is None else surfaces
    library = _surfaces_from(conf)
    fit_cfg = _fitness_from(conf)
    surrogate = SurrogateConfig(**conf["surrogate"])
    for s in surfaces:
        if s not in library:
            raise WorkflowError(f"unknown surface {s}")

    rng = np.random.default_rng(seed)
    chosen = []
    for train_surface, members in merged_fronts(runs).items():
        if len(members) < count:
            raise WorkflowError(
                f"front for surface {train_surface} has only {len(members)} individuals; "
                f"use a selection count of at most {len(members)}"
            )
        picks = sorted(rng.choice(len(members), size=count, replace=False))
        chosen += [(train_surface, *members[i]) for i in picks]

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    rows = []
    for k, (train_surface, run_id, ind) in enumerate(chosen):
        spec = decode(ind.genome)
        for si, s in enumerate(surfaces):
            for rep in range(repeats):
                eval_seed = reevaluation_seed(seed, k, si, rep)
                fit, trace = evaluate_with_trace(spec, library[s], eval_seed, fit_cfg, surrogate)
                rows.append([
                    str(k), train_surface, run_id, str(ind.eval_index), s, str(rep), str(eval_seed),
                    repr(fit.speed), repr(fit.stability), trace.terminated_by, *format_genome(ind.genome),
                ])
    io.start_csv(out_path, "reeval", io.REEVAL_COLUMNS)
    with open(out_path, "a", newline="", encoding="utf-8") as fh:
        io._write_rows(fh, rows)
    return out_path


def read_reeval(path) -> list[dict]:
    rows = io.read_csv(path, "reeval", io.REEVAL_COLUMNS)
    for lineno, r in enumerate(rows, start=3):
        try:
            r["speed_m_per_min"] = float(r["speed_m_per_min"])
            r["stability"] = float(r["stability"])
        except ValueError as exc:
            raise io.SchemaError(f"{path}:{lineno}: bad fitness value") from exc
    return rows


# -- analysis ----------------------------------------------------------------

def _write_table(path, kind: str, header, rows) -> None:
    io.start_csv(path, kind, header)
    with open(path, "a", newline="", encoding="utf-8") as fh:
        io._write_rows(fh, rows)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def analyze(runs_dir, reeval_path, out_dir, stride: int | None = None, kde_grid: int = 60) -> dict:
    """Produce every analysis table plus summary.txt; returns the headline numbers."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runs = load_runs(runs_dir)
    stride = stride or runs[0].config["evolution"]["population_size"]
    summary_lines = [f"runs: {len(runs)}"]
    result: dict = {}

    # fronts
    fronts = merged_fronts(runs)
    rows = []
    for surface, members in fronts.items():
        for run_id, ind in members:
            rows.append([surface, run_id, ind.eval_index, ind.fitness.speed, ind.fitness.stability,
                         *ind.genome])
    _write_table(out / "fronts.csv", "analysis",
                 ["training_surface", "run", "eval_index", "speed_m_per_min", "stability", *GENE_NAMES],
                 [[_fmt(v) for v in r] for r in rows])

    # hypervolume convergence
    per_surface: dict[str, list] = defaultdict(list)
    hv_rows = []
    for run in runs:
        series = hypervolume_convergence(run.records, stride)
        per_surface[run.surface].append(series)
        hv_rows += [[run.run_id, run.surface, k, hv] for k, hv in series]
    _write_table(out / "hypervolume_runs.csv", "analysis", ["run", "surface", "eval_count", "hypervolume"],
                 [[_fmt(v) for v in r] for r in hv_rows])
    band_rows = []
    finals = {}
    for surface, series_list in sorted(per_surface.items()):
        n = min(len(s) for s in series_list)
        counts = [k for k, _ in series_list[0][:n]]
        mean, half = mean_confidence_band([[hv for _, hv in s[:n]] for s in series_list])
        band_rows += [[surface, c, m, m - h, m + h] for c, m, h in zip(counts, mean, half)]
        finals[surface] = (float(mean[-1]), float(half[-1]))
        summary_lines.append(f"final mean hypervolume {surface}: {mean[-1]:.6f} +/- {half[-1]:.6f} (95% t)")
    _write_table(out / "hypervolume_summary.csv", "analysis",
                 ["surface", "eval_count", "mean", "ci_low", "ci_high"], [[_fmt(v) for v in r] for r in band_rows])
    result["hypervolume_final"] = finals

    # parameter significance between the first two training surfaces
    groups = sorted(fronts)
    if len(groups) >= 2:
        ga, gb = groups[0], groups[1]
        stats = parameter_significance([i.genome for _, i in fronts[ga]], [i.genome for _, i in fronts[gb]])
        _write_table(out / "significance.csv", "analysis",
                     ["parameter", "group_a", "group_b", "n_a", "n_b", "u", "p_raw", "p_adjusted", "significant",
                      "median_a", "median_b"],
                     [[_fmt(v) for v in (s.parameter, ga, gb, len(fronts[ga]), len(fronts[gb]), s.u, s.p_raw,
                                          s.p_adjusted, s.significant, s.median_a, s.median_b)] for s in stats])
        sig = [s.parameter for s in stats if s.significant]
        result["significant"] = sig
        result["significance"] = stats
        summary_lines.append(f"front sizes: {ga}={len(fronts[ga])} {gb}={len(fronts[gb])}")
        summary_lines.append(
            "significant parameters (Mann-Whitney, Holm, alpha=0.01): " + (", ".join(sig) if sig else "none"))
        for s in stats:
            if s.significant:
                summary_lines.append(f"  {s.parameter}: U={s.u:g} p_adj={s.p_adjusted:.3g} "
                                     f"median {ga}={s.median_a:.4g} {gb}={s.median_b:.4g}")

    # mean splines and KDE of control points per training surface
    for surface, members in fronts.items():
        specs = [decode(i.genome) for _, i in members]
        phases, mean = mean_spline(specs)
        _write_table(out / f"mean_spline_{surface}.csv", "analysis", ["phase", "lateral", "cranial", "dorsal"],
                     [[_fmt(p), *(_fmt(v) for v in row)] for p, row in zip(phases, mean)])
        ctrl = np.array([[pt[1], pt[2]] for s in specs for pt in
                         (s.spline.ground_front, s.spline.ground_back, s.spline.air_back, s.spline.air_top,
                          s.spline.air_front)])
        xs, ys, dens = kde_scott(ctrl).grid(kde_grid)
        _write_table(out / f"kde_{surface}.csv", "analysis", ["cranial", "dorsal", "density"],
                     [[_fmt(x), _fmt(y), _fmt(dens[i, j])] for i, x in enumerate(xs) for j, y in enumerate(ys)])

    # cross-surface distances
    if reeval_path is not None:
        reeval = read_reeval(reeval_path)
        names, matrix = distance_matrix(
            [(r["individual"], r["eval_surface"], r["speed_m_per_min"], r["stability"]) for r in reeval])
        _write_table(out / "distance_matrix.csv", "analysis", ["surface", *names],
                     [[n, *(_fmt(v) for v in row)] for n, row in zip(names, matrix)])
        result["distance_names"] = names
        result["distance_matrix"] = matrix
        summary_lines.append("distance matrix (min-max normalized, mean over individuals):")
        summary_lines.append("      " + " ".join(f"{n:>7}" for n in names))
        for n, row in zip(names, matrix):
            summary_lines.append(f"{n:>5} " + " ".join(f"{v:7.3f}" for v in row))

    with open(out / "summary.txt", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(io.schema_line("summary"))
        fh.write("\n".join(summary_lines) + "\n")
    result["summary"] = summary_lines
    return result


# -- plot export -------------------------------------------------------------

def export_plots(analysis_dir, out_dir) -> list[Path]:
    """Reshape analysis tables into tidy per-figure CSVs for external plotting."""
    src, out = Path(analysis_dir), Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    front_cols = ["training_surface", "run", "eval_index", "speed_m_per_min", "stability", *GENE_NAMES]
    fronts = io.read_csv(src / "fronts.csv", "analysis", front_cols)

    _write_table(out / "pareto_points.csv", "plot", ["training_surface", "speed_m_per_min", "stability"],
                 [[r["training_surface"], r["speed_m_per_min"], r["stability"]] for r in fronts])
    written.append(out / "pareto_points.csv")

    long_rows = []
    for r in fronts:
        pheno = decode([float(r[g]) for g in GENE_NAMES]).as_vector()
        long_rows += [[r["training_surface"], g, _fmt(v)] for g, v in zip(GENE_NAMES, pheno)]
    _write_table(out / "parameter_values.csv", "plot", ["training_surface", "parameter", "value"], long_rows)
    written.append(out / "parameter_values.csv")

    band = io.read_csv(src / "hypervolume_summary.csv", "analysis", ["surface", "eval_count", "mean", "ci_low",
                                                                     "ci_high"])
    _write_table(out / "hypervolume_band.csv", "plot", ["surface", "eval_count", "mean", "ci_low", "ci_high"],
                 [[r[k] for k in ("surface", "eval_count", "mean", "ci_low", "ci_high")] for r in band])
    written.append(out / "hypervolume_band.csv")

    for path in sorted(src.glob("mean_spline_*.csv")):
        rows = io.read_csv(path, "analysis", ["phase", "lateral", "cranial", "dorsal"])
        target = out / path.name.replace("mean_spline_", "trajectory_")
        _write_table(target, "plot", ["phase", "lateral", "cranial", "dorsal"],
                     [[r["phase"], r["lateral"], r["cranial"], r["dorsal"]] for r in rows])
        written.append(target)

    if (src / "distance_matrix.csv").exists():
        with open(src / "distance_matrix.csv", encoding="utf-8") as fh:
            fh.readline()
            names = fh.readline().strip().split(",")[1:]
        rows = io.read_csv(src / "distance_matrix.csv", "analysis", ["surface", *names])
        pairs = []
        for i, r in enumerate(rows):
            for j in range(i + 1, len(names)):
                pairs.append([r["surface"], names[j], r[names[j]]])
        _write_table(out / "distance_pairs.csv", "plot", ["surface_a", "surface_b", "distance"], pairs)
        written.append(out / "distance_pairs.csv")
    return written
