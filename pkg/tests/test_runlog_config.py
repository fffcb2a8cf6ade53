import textwrap

import numpy as np
import pytest

from quadevo import runlog as io
from quadevo.config import OUTPUT_ENV, ConfigError, ExperimentConfig, load_config
from quadevo.fitness import Fitness
from quadevo.nsga2 import EvolutionConfig, Individual, run_evolution


def toy(genome, seed):
    x = float(genome[0])
    return Fitness(20 * x, -x), "timeout", 10.0


def write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text), encoding="utf-8")
    return p


def test_runlog_roundtrip_is_lossless(tmp_path):
    log = run_evolution(EvolutionConfig(rng_seed=3, generations=2), toy)
    path = tmp_path / "log.csv"
    io.write_runlog(path, log)
    raw = path.read_bytes()
    assert raw.startswith(b"# quadevo-runlog schema 1\ngeneration,eval_index,")
    assert b"\r" not in raw
    back = io.read_runlog(path)
    assert len(back) == 24
    for a, b in zip(log.records, back):
        assert np.array_equal(a.genome, b.genome) and a.fitness == b.fitness and a.seed == b.seed
    io.write_runlog(tmp_path / "again.csv", type(log)(log.config, back))
    assert (tmp_path / "again.csv").read_bytes() == raw


def test_schema_errors_carry_line_numbers(tmp_path):
    log = run_evolution(EvolutionConfig(rng_seed=3, generations=1), toy)
    path = tmp_path / "log.csv"
    io.write_runlog(path, log)
    lines = path.read_text().splitlines()
    bad = tmp_path / "bad.csv"
    bad.write_text("\n".join(lines[:4] + [lines[4].replace(lines[4].split(",")[1], "x", 1)] + lines[5:]) + "\n")
    with pytest.raises(io.SchemaError, match=r"bad\.csv:5"):
        io.read_runlog(bad)
    bad.write_text("\n".join(lines[:3] + ["1,2,3"]) + "\n")
    with pytest.raises(io.SchemaError, match=r":4: expected"):
        io.read_runlog(bad)
    bad.write_text("# quadevo-runlog schema 99\n" + "\n".join(lines[1:]) + "\n")
    with pytest.raises(io.SchemaError, match=r":1:"):
        io.read_runlog(bad)


def test_truncate_drops_unfinished_generation(tmp_path):
    log = run_evolution(EvolutionConfig(rng_seed=3, generations=2), toy)
    path = tmp_path / "log.csv"
    io.write_runlog(path, log)
    io.truncate_runlog(path, 16)
    assert [r.eval_index for r in io.read_runlog(path)] == list(range(16))


def test_checkpoint_roundtrip(tmp_path):
    states = []
    run_evolution(EvolutionConfig(rng_seed=1, generations=3), toy, on_generation=lambda l, n, s: states.append(s))
    io.write_checkpoint(tmp_path / "c.json", states[1])
    state, complete = io.read_checkpoint(tmp_path / "c.json")
    assert not complete and state.generation == 1 and state.next_eval == 16
    assert state.rng_state == states[1].rng_state
    assert [p.fitness for p in state.population] == [p.fitness for p in states[1].population]
    assert all(isinstance(p, Individual) for p in state.population)


def test_evolution_config_dict_roundtrip():
    cfg = EvolutionConfig(population_size=6, rng_seed=5, surface="B")
    assert io.config_from_dict(io.config_to_dict(cfg)) == cfg


def test_load_full_config(tmp_path):
    p = write(tmp_path, """
        [experiment]
        name = demo
        train_surfaces = A, B
        runs_per_surface = 2
        base_seed = 10

        [evolution]
        population_size = 6
        generations = 4
        mutation_sigma = 1/6

        [fitness]
        alpha = 1/50

        [surrogate]
        joint_speed_limit = 1.0

        [surface E]          ; a new surface
        hardness = 0.5
        roughness = 0.3

        [reevaluation]
        selection_count = 3
        repeats = 2
        surfaces = A, E
    """)
    cfg = load_config(p)
    assert cfg.name == "demo"
    assert cfg.evolution.population_size == 6 and cfg.evolution.mutation_sigma == 1 / 6
    assert cfg.evolution.fitness.alpha == 1 / 50
    assert cfg.surfaces["E"].hardness == 0.5
    assert cfg.reeval.surfaces == ("A", "E")
    assert [(r.run_id, r.seed) for r in cfg.run_matrix()] == [("A-01", 10), ("B-01", 11), ("A-02", 12), ("B-02", 13)]


def test_unknown_surface_is_named(tmp_path):
    p = write(tmp_path, """
        [experiment]
        train_surfaces = A, E
    """)
    with pytest.raises(ConfigError, match="unknown surface E"):
        load_config(p)


@pytest.mark.parametrize("text, field", [
    ("[evolution]\npopulation_size = many\n", "population_size"),
    ("[evolution]\npopulation_size = 2.5\n", "population_size"),
    ("[evolution]\ncolour = red\n", "colour"),
    ("[evolution]\nrng_seed = 4\n", "rng_seed"),
    ("[extras]\nx = 1\n", "extras"),
    ("[evolution]\ncount_initial = maybe\n", "count_initial"),
    ("[surface Z]\nhardness = 2\n", "surface Z"),
    ("[experiment]\nseeds = 1, 2\n", "seeds"),
])
def test_bad_fields_are_named(tmp_path, text, field):
    with pytest.raises(ConfigError, match=field):
        load_config(write(tmp_path, text))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="does not exist"):
        load_config(tmp_path / "none.ini")


def test_output_root_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path))
    assert ExperimentConfig(name="x").resolve_output() == tmp_path / "x"
    assert ExperimentConfig(name="x", output_dir=tmp_path / "y").resolve_output() == tmp_path / "y"


def test_shipped_config_loads():
    from pathlib import Path

    cfg = load_config(Path(__file__).parents[1] / "configs" / "exp1.ini")
    assert len(cfg.run_matrix()) == 10
    assert cfg.evolution.total_evaluations == 264
