import textwrap

import pytest

from quadevo import experiments as ex
from quadevo import runlog as io
from quadevo.cli import main
from quadevo.config import OUTPUT_ENV, load_config

SMALL = """
[experiment]
name = small
train_surfaces = A, B
runs_per_surface = 2
base_seed = 50

[evolution]
population_size = 6
generations = 4

[reevaluation]
selection_count = 2
repeats = 2
"""


@pytest.fixture
def small_config(tmp_path):
    p = tmp_path / "small.ini"
    p.write_text(textwrap.dedent(SMALL), encoding="utf-8")
    return p


def tree_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture
def pipeline(tmp_path, small_config):
    out = tmp_path / "out"
    assert main(["evolve", "--config", str(small_config), "--out", str(out)]) == 0
    assert main(["reevaluate", "--runs", str(out), "--out", str(tmp_path / "re.csv"), "--seed", "4"]) == 0
    assert main(["analyze", "--runs", str(out), "--reeval", str(tmp_path / "re.csv"),
                 "--out", str(tmp_path / "an")]) == 0
    assert main(["export-plots", "--analysis", str(tmp_path / "an"), "--out", str(tmp_path / "plots")]) == 0
    return tmp_path


def test_evolve_writes_one_log_per_run(pipeline):
    runs = sorted((pipeline / "out" / "runs").iterdir())
    assert [r.name for r in runs] == ["A-01", "A-02", "B-01", "B-02"]
    for r in runs:
        assert len(io.read_runlog(r / "runlog.csv")) == 6 * 5
        assert len(io.read_runlog(r / "final_population.csv")) == 6
        assert io.read_checkpoint(r / "checkpoint.json")[1] is True
    conf = io.read_json(runs[2] / "config.json")
    assert conf["run_order"] == 1 and conf["evolution"]["surface"] == "B" and conf["evolution"]["rng_seed"] == 51


def test_reevaluation_rows(pipeline):
    rows = ex.read_reeval(pipeline / "re.csv")
    assert len(rows) == 2 * 2 * 4 * 2
    assert {r["training_surface"] for r in rows} == {"A", "B"}
    assert {r["eval_surface"] for r in rows} == {"A", "B", "C", "D"}
    assert len({r["seed"] for r in rows}) == len(rows)


def test_every_output_has_schema_line_and_lf(pipeline):
    for p in list((pipeline / "an").iterdir()) + list((pipeline / "plots").iterdir()) + [pipeline / "re.csv"]:
        raw = p.read_bytes()
        assert raw.startswith(b"# quadevo-") and b"schema 1\n" in raw.split(b"\n", 1)[0] + b"\n", p
        assert b"\r" not in raw
        raw.decode("utf-8")


def test_analysis_contents(pipeline):
    an = pipeline / "an"
    sig = io.read_csv(an / "significance.csv", "analysis",
                      ["parameter", "group_a", "group_b", "n_a", "n_b", "u", "p_raw", "p_adjusted", "significant",
                       "median_a", "median_b"])
    assert len(sig) == 18
    names = ["A", "B", "C", "D"]
    dm = io.read_csv(an / "distance_matrix.csv", "analysis", ["surface", *names])
    m = [[float(r[n]) for n in names] for r in dm]
    assert all(m[i][j] == m[j][i] for i in range(4) for j in range(4))
    assert all(m[i][i] == 0.0 for i in range(4))
    text = (an / "summary.txt").read_text()
    assert "significant parameters" in text and "final mean hypervolume A" in text and "distance matrix" in text


def test_analyze_is_idempotent(pipeline):
    before = tree_bytes(pipeline / "an")
    ex.analyze(pipeline / "out", pipeline / "re.csv", pipeline / "an")
    assert tree_bytes(pipeline / "an") == before


def test_rerun_is_byte_identical(pipeline, small_config, tmp_path):
    out2 = tmp_path / "out2"
    main(["evolve", "--config", str(small_config), "--out", str(out2)])
    assert tree_bytes(out2) == tree_bytes(pipeline / "out")


def test_interrupted_run_resumes_to_identical_log(tmp_path, small_config):
    cfg = load_config(small_config)
    spec = cfg.run_matrix()[0]
    ex.evolve_run(cfg, spec, tmp_path / "a")
    ex.evolve_run(cfg, spec, tmp_path / "b", stop_after=2)
    assert not io.read_checkpoint(tmp_path / "b/runs/A-01/checkpoint.json")[1]
    # simulate a crash between logging a generation and checkpointing it: rows past the checkpoint
    log = tmp_path / "b/runs/A-01/runlog.csv"
    last = log.read_text().splitlines()[-1].split(",")
    last[0], last[1] = "3", "18"
    log.write_text(log.read_text() + ",".join(last) + "\n")
    ex.evolve_run(cfg, spec, tmp_path / "b")
    assert tree_bytes(tmp_path / "b") == tree_bytes(tmp_path / "a")


def test_resume_refuses_changed_config(tmp_path, small_config):
    cfg = load_config(small_config)
    spec = cfg.run_matrix()[0]
    ex.evolve_run(cfg, spec, tmp_path, stop_after=1)
    cfg.evolution = type(cfg.evolution)(population_size=8, generations=4)
    with pytest.raises(ex.WorkflowError, match="different configuration"):
        ex.evolve_run(cfg, spec, tmp_path)


def test_parallel_jobs_match_serial(tmp_path, small_config, pipeline):
    assert main(["evolve", "--config", str(small_config), "--out", str(tmp_path / "par"), "--jobs", "2"]) == 0
    assert tree_bytes(tmp_path / "par") == tree_bytes(pipeline / "out")


def test_reevaluate_rejects_oversized_selection(pipeline, capsys):
    assert main(["reevaluate", "--runs", str(pipeline / "out"), "--out", str(pipeline / "x.csv"),
                 "--seed", "1", "--count", "500"]) == 2
    assert "use a selection count of at most" in capsys.readouterr().err


def test_reevaluation_selection_is_seeded(pipeline):
    ex.reevaluate(pipeline / "out", pipeline / "again.csv", 4)
    assert (pipeline / "again.csv").read_bytes() == (pipeline / "re.csv").read_bytes()


def test_bad_reeval_file_reports_line(pipeline, capsys):
    lines = (pipeline / "re.csv").read_text().splitlines()
    lines[5] = lines[5] + ",extra"
    bad = pipeline / "bad.csv"
    bad.write_text("\n".join(lines) + "\n")
    assert main(["analyze", "--runs", str(pipeline / "out"), "--reeval", str(bad), "--out",
                 str(pipeline / "an2")]) == 2
    assert "bad.csv:6" in capsys.readouterr().err


def test_unknown_surface_config_exits_with_message(tmp_path, capsys):
    p = tmp_path / "bad.ini"
    p.write_text("[experiment]\ntrain_surfaces = E\n")
    assert main(["evolve", "--config", str(p)]) == 2
    assert "unknown surface E" in capsys.readouterr().err


def test_default_output_root_from_environment(tmp_path, small_config, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "root"))
    monkeypatch.chdir(tmp_path)
    cfg = load_config(small_config)
    cfg.runs_per_surface = 1
    ex.evolve(cfg)
    assert (tmp_path / "root" / "small" / "runs" / "A-01" / "runlog.csv").exists()


def test_plot_tables(pipeline):
    names = sorted(p.name for p in (pipeline / "plots").iterdir())
    assert names == ["distance_pairs.csv", "hypervolume_band.csv", "parameter_values.csv", "pareto_points.csv",
                     "trajectory_A.csv", "trajectory_B.csv"]
    pairs = io.read_csv(pipeline / "plots" / "distance_pairs.csv", "plot", ["surface_a", "surface_b", "distance"])
    assert len(pairs) == 6
