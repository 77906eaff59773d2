"""Config schema, sweeps, summaries, seed mixing, and the CLI surface.

Claims under test:
    - config JSON round trip, unknown-field and alpha/K exclusivity
      rejection, schema versioning
    - per-trial seeds are a pure function of (base, index)
    - sweeps: empty trials give a header-only CSV, reruns are
      byte-identical, worker count does not affect bytes, the ratio
      statistic lands in the summary
    - summarize: single row, empty file, all-true Wilson bound 0.963,
      schema rejection
    - CLI subcommands end to end with exit codes
"""

import json
import math

import pytest

from densek.cli import main
from densek.errors import SchemaError
from densek.experiment import ExperimentConfig, run_sweep
from densek.results import read_csv, summarize, wilson_interval, write_csv
from densek.seeds import trial_seed


def test_config_roundtrip_and_validation():
    cfg = ExperimentConfig(kind="sweep", n=32, alpha=0.4, trials=3,
                           base_seed=9)
    back = ExperimentConfig.from_json(cfg.to_json())
    assert back == cfg
    assert back.resolved_k() == math.ceil(32 ** 0.4)
    assert cfg.config_hash() == back.config_hash()
    with pytest.raises(SchemaError):
        ExperimentConfig.from_json('{"kind": "sweep", "n": 8, "k": 2, '
                                   '"alpha": 0.5}')
    with pytest.raises(SchemaError):
        ExperimentConfig.from_json('{"kind": "sweep", "n": 8, "k": 2, '
                                   '"frobnicate": 1}')
    with pytest.raises(SchemaError):
        ExperimentConfig.from_json('{"kind": "sweep", "n": 8, "k": 2, '
                                   '"schema_version": 99}')
    with pytest.raises(SchemaError):
        ExperimentConfig(kind="wat", n=8, k=2)


def test_trial_seeds_pure_and_spread():
    assert trial_seed(42, 0) == trial_seed(42, 0)
    seeds = {trial_seed(42, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert trial_seed(43, 0) != trial_seed(42, 0)
    with pytest.raises(ValueError):
        trial_seed(1, -1)


def test_sweep_empty(tmp_path):
    cfg = ExperimentConfig(kind="sweep", n=16, k=3, trials=0, base_seed=0,
                           output_csv=str(tmp_path / "out.csv"))
    run_sweep(cfg)
    lines = (tmp_path / "out.csv").read_text().splitlines()
    assert len(lines) == 1 and lines[0].startswith("schema_version,trial")


def test_sweep_rerun_identical(tmp_path):
    for name in ("one", "two"):
        cfg = ExperimentConfig(kind="sweep", n=20, k=3, trials=5,
                               base_seed=77, threads=1,
                               output_csv=str(tmp_path / f"{name}.csv"))
        run_sweep(cfg)
    assert (tmp_path / "one.csv").read_bytes() == \
        (tmp_path / "two.csv").read_bytes()


def test_sweep_thread_count_invariance(tmp_path):
    for name, threads in (("t1", 1), ("t2", 2)):
        cfg = ExperimentConfig(kind="sweep", n=20, k=3, trials=6,
                               base_seed=5, threads=threads,
                               output_csv=str(tmp_path / f"{name}.csv"))
        run_sweep(cfg)
    assert (tmp_path / "t1.csv").read_bytes() == \
        (tmp_path / "t2.csv").read_bytes()


def test_sweep_summary_ratio(tmp_path):
    cfg = ExperimentConfig(kind="sweep", n=32, alpha=0.4, trials=4,
                           base_seed=3, threads=1,
                           output_csv=str(tmp_path / "r.csv"),
                           output_json=str(tmp_path / "r.json"))
    out = run_sweep(cfg)
    assert "centered_ratio_of_mean" in out["summary"]
    payload = json.loads((tmp_path / "r.json").read_text())
    assert payload["completed"] == 4
    cols, rows = read_csv(tmp_path / "r.csv")
    assert [r["status"] for r in rows] == ["ok"] * 4


def test_worker_count_sources(monkeypatch):
    from densek.experiment import worker_count
    cfg = ExperimentConfig(kind="sweep", n=8, k=2)
    monkeypatch.setenv("DENSEK_WORKERS", "3")
    assert worker_count(cfg) == 3
    monkeypatch.delenv("DENSEK_WORKERS")
    assert worker_count(ExperimentConfig(kind="sweep", n=8, k=2,
                                         threads=5)) == 5


def test_sweep_unwritable_path_fails_fast(tmp_path):
    cfg = ExperimentConfig(kind="sweep", n=16, k=3, trials=2, base_seed=0,
                           output_csv="/proc/definitely/not/writable.csv")
    with pytest.raises(OSError):
        run_sweep(cfg)


def test_summarize_single_row(tmp_path):
    p = tmp_path / "one.csv"
    write_csv(p, ["x", "flag"], [{"x": 4.25, "flag": True}])
    s = summarize(p)
    assert s["row_count"] == 1
    assert s["columns"]["x"]["mean"] == 4.25
    assert s["columns"]["x"]["std"] == 0.0
    assert s["columns"]["flag"]["frequency"] == 1.0


def test_summarize_empty(tmp_path):
    p = tmp_path / "empty.csv"
    write_csv(p, ["x"], [])
    s = summarize(p)
    assert s == {"row_count": 0, "columns": {}}


def test_summarize_wilson_all_true(tmp_path):
    p = tmp_path / "bools.csv"
    write_csv(p, ["ok"], [{"ok": True}] * 100)
    s = summarize(p)
    assert s["columns"]["ok"]["wilson95_lower"] == pytest.approx(0.9630,
                                                                 abs=5e-4)
    lo, hi = wilson_interval(100, 100)
    assert lo == pytest.approx(0.9630, abs=5e-4)
    assert hi == pytest.approx(1.0, abs=1e-12)


def test_summarize_rejects_unknown_schema(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("schema_version,x\n99,1.0\n")
    with pytest.raises(SchemaError):
        summarize(p)
    q = tmp_path / "worse.csv"
    q.write_text("x,y\n1,2\n")
    with pytest.raises(SchemaError):
        summarize(q)


def test_cli_end_to_end(tmp_path, capsys):
    mat = tmp_path / "m.json"
    assert main(["sample", "--n", "16", "--dist", "bernoulli-half",
                 "--seed", "4", "--plant-k", "4", "--out", str(mat)]) == 0
    assert main(["solve", "--matrix", str(mat), "--k", "4", "--z", "2"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["exact"] and len(payload["vertices"]) == 4

    assert main(["formulas", "--n", "64", "--k", "6"]) == 0
    f = json.loads(capsys.readouterr().out)
    assert f["l"] <= f["u"] <= f["v"]

    out_csv = tmp_path / "curve.csv"
    assert main(["curve", "--n", "200", "--k", "12",
                 "--out", str(out_csv)]) == 0
    cols, rows = read_csv(out_csv)
    assert cols == ["z", "gamma", "gaussian_gamma", "increment"]
    assert int(rows[-1]["z"]) == 12

    assert main(["moments", "--n", "20", "--k", "4",
                 "--dist", "rademacher"]) == 0
    mom = json.loads(capsys.readouterr().out)
    assert 0.0 <= mom["pz_ratio_lower"] <= 1.0

    assert main(["solve", "--matrix", str(mat), "--k", "4"]) == 0
    exact = json.loads(capsys.readouterr().out)
    assert main(["solve", "--matrix", str(mat), "--k", "4",
                 "--heuristic", "--restarts", "10", "--seed", "1"]) == 0
    heur = json.loads(capsys.readouterr().out)
    assert not heur["exact"]
    assert heur["value"] <= exact["value"] + 1e-9

    assert main(["lindeberg", "gap", "--n", "10", "--k", "3",
                 "--dist", "bernoulli-half", "--trials", "5",
                 "--seed", "2"]) == 0
    gap = json.loads(capsys.readouterr().out)
    assert gap["trials"] == 5


def test_cli_sweep_and_summarize(tmp_path, capsys):
    cfg = {"kind": "sweep", "n": 16, "k": 3, "trials": 3, "base_seed": 1,
           "threads": 1, "output_csv": str(tmp_path / "s.csv")}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    assert main(["sweep", "--config", str(cfg_path)]) == 0
    capsys.readouterr()
    assert main(["summarize", str(tmp_path / "s.csv")]) == 0
    s = json.loads(capsys.readouterr().out)
    assert s["row_count"] == 3


def test_cli_error_exit_codes(tmp_path, capsys):
    # experiment-level failure: nonexistent matrix file
    assert main(["solve", "--matrix", str(tmp_path / "none.json"),
                 "--k", "3"]) == 1
    # usage error: unknown subcommand exits 2 via argparse
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_cli_ogp_config(tmp_path, capsys):
    cfg = {"kind": "ogp", "n": 24, "k": 4, "distribution": "bernoulli-half",
           "trials": 2, "base_seed": 3,
           "output_csv": str(tmp_path / "ogp.csv"),
           "output_json": str(tmp_path / "ogp.json")}
    path = tmp_path / "ogp_cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["ogp", "--config", str(path)]) == 0
    assert (tmp_path / "ogp.csv").exists()
    summary = json.loads((tmp_path / "ogp.json").read_text())
    assert summary["trials"] == 2


def test_sweep_records_partial_failures(tmp_path):
    # alpha > 1 makes K exceed n and every trial fail; rows still emit
    cfg = ExperimentConfig(kind="sweep", n=8, alpha=1.5, trials=3,
                           base_seed=2, threads=1,
                           output_csv=str(tmp_path / "err.csv"))
    out = run_sweep(cfg)
    assert out["summary"]["completed"] == 0
    _, rows = read_csv(tmp_path / "err.csv")
    assert [r["status"] for r in rows] == ["error"] * 3
    assert all(r["message"] for r in rows)


def test_run_record_replay_invariant(tmp_path):
    from densek.experiment import replay_trial
    cfg = ExperimentConfig(kind="sweep", n=24, k=4, trials=3, base_seed=17,
                           threads=1, output_csv=str(tmp_path / "rr.csv"))
    run_sweep(cfg)
    _, rows = read_csv(tmp_path / "rr.csv")
    for persisted in rows:
        rec = replay_trial(cfg, int(persisted["trial"]))
        assert rec.seed == int(persisted["seed"])
        assert rec.outputs["nodes"] == int(persisted["nodes"])
        assert abs(rec.outputs["psi"] - float(persisted["psi"])) <= 1e-9
        assert rec.config_hash == cfg.config_hash()
