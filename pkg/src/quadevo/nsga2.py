"""NSGA-II with Gaussian mutation only, over the normalized genome.

Both objectives are maximized. Survivor selection is (mu + lambda):
parents and offspring are merged, sorted into fronts and truncated by rank,
then crowding distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .fitness import Fitness, FitnessConfig, evaluate_with_trace
from .params import N_GENES, check_genome, decode
from .surrogate import SurfaceModel, SurrogateConfig


@dataclass
class Individual:
    genome: np.ndarray
    fitness: Fitness | None = None
    rank: int | None = None
    crowding: float | None = None
    generation: int = 0
    eval_index: int = -1
    seed: int = 0
    surface: str = ""
    terminated_by: str = ""
    sim_time: float = 0.0

    @property
    def objectives(self) -> tuple[float, float]:
        if self.fitness is None:
            raise ValueError(f"individual {self.eval_index} has not been evaluated")
        return self.fitness.as_tuple()


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True if ``a`` is at least as good everywhere and strictly better somewhere (maximization)."""
    return all(x >= y for x, y in zip(a, b)) and any(x > y for x, y in zip(a, b))


def fast_nondominated_sort(pop: list[Individual]) -> list[list[Individual]]:
    objs = [ind.objectives for ind in pop]
    n = len(pop)
    dominated_by_me: list[list[int]] = [[] for _ in range(n)]
    counts = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if dominates(objs[i], objs[j]):
                dominated_by_me[i].append(j)
                counts[j] += 1
            elif dominates(objs[j], objs[i]):
                dominated_by_me[j].append(i)
                counts[i] += 1
    current = [i for i in range(n) if counts[i] == 0]
    fronts = []
    rank = 0
    while current:
        for i in current:
            pop[i].rank = rank
        fronts.append([pop[i] for i in current])
        nxt = []
        for i in current:
            for j in dominated_by_me[i]:
                counts[j] -= 1
                if counts[j] == 0:
                    nxt.append(j)
        current = sorted(nxt)
        rank += 1
    return fronts


def crowding_distance(front: list[Individual]) -> None:
    """Assign crowding distances in place; boundary points get +inf."""
    n = len(front)
    for ind in front:
        ind.crowding = 0.0
    if n <= 2:
        for ind in front:
            ind.crowding = math.inf
        return
    objs = np.array([ind.objectives for ind in front])
    for m in range(objs.shape[1]):
        other = objs[:, 1 - m] if objs.shape[1] == 2 else np.zeros(n)
        order = np.lexsort((other, objs[:, m]))
        lo, hi = objs[order[0], m], objs[order[-1], m]
        front[order[0]].crowding = math.inf
        front[order[-1]].crowding = math.inf
        if hi == lo:
            continue
        for k in range(1, n - 1):
            ind = front[order[k]]
            if ind.crowding != math.inf:
                ind.crowding += (objs[order[k + 1], m] - objs[order[k - 1], m]) / (hi - lo)


def reflect_into_unit(x: np.ndarray) -> np.ndarray:
    """Mirror values back across 0 and 1 until they land inside [0, 1]."""
    x = np.array(x, dtype=float)
    while True:
        low, high = x < 0.0, x > 1.0
        if not (low.any() or high.any()):
            return x
        x[low] = -x[low]
        x[high] = 2.0 - x[high]


def mutate(genome, rng: np.random.Generator, sigma: float = 1.0 / 6.0, probability: float = 1.0) -> np.ndarray:
    g = np.asarray(genome, dtype=float)
    delta = rng.normal(0.0, sigma, size=g.shape)
    if probability < 1.0:
        delta = np.where(rng.random(g.shape) < probability, delta, 0.0)
    return reflect_into_unit(g + delta)


def _better(a: Individual, b: Individual) -> int:
    """-1 if a wins the tournament, 1 if b wins, 0 on a full tie."""
    if a.rank != b.rank:
        return -1 if a.rank < b.rank else 1
    if a.crowding != b.crowding:
        return -1 if a.crowding > b.crowding else 1
    return 0


def select_parents(pop: list[Individual], rng: np.random.Generator, k: int | None = None) -> list[Individual]:
    """Binary tournaments on (rank ascending, crowding descending)."""
    if any(ind.rank is None or ind.crowding is None for ind in pop):
        raise ValueError("rank and crowding must be assigned before selection")
    k = len(pop) if k is None else k
    parents = []
    for _ in range(k):
        i, j = rng.choice(len(pop), size=2, replace=False)
        verdict = _better(pop[i], pop[j])
        if verdict == 0:
            verdict = -1 if rng.random() < 0.5 else 1
        parents.append(pop[i] if verdict < 0 else pop[j])
    return parents


def environmental_selection(pool: list[Individual], size: int) -> list[Individual]:
    survivors: list[Individual] = []
    for front in fast_nondominated_sort(pool):
        crowding_distance(front)
        if len(survivors) + len(front) <= size:
            survivors.extend(front)
            continue
        # stable: equal crowding keeps pool order
        ranked = sorted(front, key=lambda ind: -ind.crowding)
        survivors.extend(ranked[: size - len(survivors)])
        break
    return survivors


@dataclass(frozen=True)
class EvolutionConfig:
    population_size: int = 8
    generations: int = 32
    mutation_sigma: float = 1.0 / 6.0
    mutation_probability: float = 1.0
    rng_seed: int = 0
    surface: str = "A"
    count_initial: bool = False  # True: the initial population is one of the generations
    fitness: FitnessConfig = field(default_factory=FitnessConfig)

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.generations < 1:
            raise ValueError("generations must be at least 1")
        if self.mutation_sigma <= 0:
            raise ValueError("mutation_sigma must be positive")
        if not (0.0 <= self.mutation_probability <= 1.0):
            raise ValueError("mutation_probability must be in [0, 1]")

    @property
    def offspring_generations(self) -> int:
        return self.generations - 1 if self.count_initial else self.generations

    @property
    def total_evaluations(self) -> int:
        return self.population_size * (self.offspring_generations + 1)


def evaluation_seed(rng_seed: int, eval_index: int) -> int:
    return int(np.random.SeedSequence([int(rng_seed), int(eval_index)]).generate_state(1, np.uint32)[0])


@dataclass
class RunLog:
    config: EvolutionConfig
    records: list[Individual] = field(default_factory=list)
    final_population: list[Individual] = field(default_factory=list)

    def append(self, ind: Individual) -> None:
        if ind.fitness is None:
            raise ValueError("only evaluated individuals are logged")
        self.records.append(ind)


@dataclass
class EvolutionState:
    """Everything needed to continue a run after ``generation``."""

    generation: int
    next_eval: int
    sim_time: float
    population: list[Individual]
    rng_state: dict


Evaluator = Callable[[np.ndarray, int], tuple[Fitness, str, float]]


def surrogate_evaluator(
    surface: SurfaceModel, cfg: FitnessConfig, surrogate: SurrogateConfig | None = None
) -> Evaluator:
    def run(genome: np.ndarray, seed: int):
        fit, trace = evaluate_with_trace(decode(genome), surface, seed, cfg, surrogate)
        return fit, trace.terminated_by, trace.t_end - trace.t_start

    return run


def run_evolution(
    cfg: EvolutionConfig,
    evaluator: Evaluator | None = None,
    surfaces: dict[str, SurfaceModel] | None = None,
    state: EvolutionState | None = None,
    on_generation: Callable[[RunLog, list[Individual], EvolutionState], None] | None = None,
    stop_after: int | None = None,
    map_fn: Callable = map,
) -> RunLog:
    """Run NSGA-II.

    Args:
        cfg: search settings; ``cfg.surface`` names the surface to evolve on.
        evaluator: maps (genome, seed) to (fitness, terminated_by, duration).
            Defaults to the surrogate on ``surfaces[cfg.surface]``.
        surfaces: surface lookup, defaults to the built-in library.
        state: resume point from a checkpoint; records already logged are not
            repeated in the returned log.
        on_generation: called after every generation with the new records and
            the resume state (used for per-generation checkpoints).
        stop_after: stop after this many generations in this call (simulates
            an interruption).
        map_fn: map used to evaluate a generation; evaluations are seeded per
            index, so a parallel map gives identical results.
    """
    if evaluator is None:
        from .surrogate import surface_library

        surfaces = surfaces or surface_library()
        if cfg.surface not in surfaces:
            raise KeyError(f"unknown surface {cfg.surface}")
        evaluator = surrogate_evaluator(surfaces[cfg.surface], cfg.fitness)

    log = RunLog(cfg)
    rng = np.random.default_rng(cfg.rng_seed)

    def evaluate_batch(genomes: list[np.ndarray], generation: int, first_index: int, sim_time: float):
        seeds = [evaluation_seed(cfg.rng_seed, first_index + k) for k in range(len(genomes))]
        results = list(map_fn(evaluator, genomes, seeds))
        batch = []
        for k, (genome, seed, (fit, term, duration)) in enumerate(zip(genomes, seeds, results)):
            sim_time += duration
            ind = Individual(
                check_genome(genome), fit, generation=generation, eval_index=first_index + k,
                seed=seed, surface=cfg.surface, terminated_by=term, sim_time=sim_time,
            )
            log.append(ind)
            batch.append(ind)
        return batch, sim_time

    if state is None:
        genomes = [rng.random(N_GENES) for _ in range(cfg.population_size)]
        pop, sim_time = evaluate_batch(genomes, 0, 0, 0.0)
        pop = environmental_selection(pop, cfg.population_size)
        state = EvolutionState(0, len(pop), sim_time, pop, rng.bit_generator.state)
        if on_generation:
            on_generation(log, list(log.records), state)
        done = 1
    else:
        rng.bit_generator.state = state.rng_state
        pop = state.population
        done = 0

    gen = state.generation
    while gen < cfg.offspring_generations:
        if stop_after is not None and done >= stop_after:
            break
        n_before = len(log.records)
        gen += 1
        parents = select_parents(pop, rng)
        children = [mutate(p.genome, rng, cfg.mutation_sigma, cfg.mutation_probability) for p in parents]
        offspring, sim_time = evaluate_batch(children, gen, state.next_eval, state.sim_time)
        pop = environmental_selection(pop + offspring, cfg.population_size)
        state = EvolutionState(gen, state.next_eval + len(offspring), sim_time, pop, rng.bit_generator.state)
        if on_generation:
            on_generation(log, log.records[n_before:], state)
        done += 1

    log.final_population = list(pop)
    return log


def pareto_mask(points: np.ndarray) -> np.ndarray:
    """Boolean mask of points not dominated by any other (maximization)."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    mask = np.ones(n, dtype=bool)
    for i in range(n):
        ge = np.all(pts >= pts[i], axis=1)
        gt = np.any(pts > pts[i], axis=1)
        if np.any(ge & gt):
            mask[i] = False
    return mask

