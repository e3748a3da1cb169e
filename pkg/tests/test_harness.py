import csv
import json
import math
import os

import numpy as np
import pytest
import yaml

from qkick.harness import cli
from qkick.harness.config import (ConfigError, apply_overrides, parse_grid, parse_number,
                                  validate_config)
from qkick.harness.presets import FIGURES, figure_jobs
from qkick.harness.runner import grid_points, run_single, run_sweep
from qkick.observables import gibbs_state
from qkick.spin_chain import build_hamiltonian, canonical_config

PI = math.pi


def write_cfg(tmp_path, **keys):
    path = tmp_path / "exp.yaml"
    path.write_text(yaml.safe_dump({"schema_version": 1, **keys}))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ----------------------------------------------------------------- config


def test_parse_number_pi_forms():
    assert parse_number("pi/2") == pytest.approx(PI / 2)
    assert parse_number("3*pi/4") == pytest.approx(3 * PI / 4)
    assert parse_number("2pi") == pytest.approx(2 * PI)
    assert parse_number("-pi") == pytest.approx(-PI)
    assert parse_number(0.25) == 0.25
    with pytest.raises(ValueError):
        parse_number("two")


def test_parse_grid_forms():
    assert parse_grid([1, "pi"]) == pytest.approx([1, PI])
    assert len(parse_grid({"start": 0, "stop": "2pi", "num": 33})) == 33
    g = parse_grid({"start": 0.5, "stop": 40, "step": 0.5})
    assert len(g) == 80 and g[-1] == pytest.approx(40.0)


def test_defaults_are_canonical():
    cfg = validate_config({})
    assert cfg.chain.delta == (1.0, 0.5, 0.25)
    assert cfg.chain.coupling[0, 1] == 0.15 and cfg.chain.coupling[0, 2] == 0.1
    assert cfg.initial_state == 8


def test_q_converts_to_period():
    cfg = validate_config({"kick.q": 8})
    assert cfg.tau_k == pytest.approx(PI / 2)


@pytest.mark.parametrize("raw, key", [
    ({"kick.q": 0}, "kick.q"),
    ({"chain.beta": -0.1}, "chain.beta"),
    ({"chain.temperature": -1}, "chain.temperature"),
    ({"initial_state": 9}, "initial_state"),
    ({"sweep.q_grid": [4, 0]}, "sweep.q_grid"),
    ({"sweep.q_grid": []}, "sweep.q_grid"),
    ({"kick.rotations": [[0, "w", 1.0]]}, "kick.rotations"),
    ({"kick.rotations": [[5, "x", 1.0]]}, "kick.rotations"),
    ({"bogus": 1}, "bogus"),
    ({"schema_version": 2}, "schema_version"),
])
def test_invalid_configs_name_the_key(raw, key):
    with pytest.raises(ConfigError) as exc:
        validate_config(raw)
    assert any(p.startswith(key) for p in exc.value.problems), exc.value.problems


def test_strong_coupling_names_qubit_and_state():
    with pytest.raises(ConfigError) as exc:
        validate_config({"chain.chi": 0.6})
    msg = str(exc.value)
    assert "chain.coupling" in msg and "qubit" in msg and "state" in msg


def test_all_problems_reported_together():
    with pytest.raises(ConfigError) as exc:
        validate_config({"kick.q": 0, "chain.beta": -1, "initial_state": 0})
    assert len(exc.value.problems) == 3


def test_overrides_parse_values():
    raw = apply_overrides({"chain.beta": 0.1}, ["chain.beta=0.2", "kick.tau_k=pi/2"])
    assert raw["chain.beta"] == 0.2
    assert validate_config(raw).tau_k == pytest.approx(PI / 2)
    with pytest.raises(ConfigError):
        apply_overrides({}, ["no-equals"])


def test_content_hash_stable():
    a = validate_config({"kick.q": 8, "chain.beta": 0.1})
    b = validate_config({"chain.beta": 0.1, "kick.q": 8})
    assert a.content_hash() == b.content_hash()
    assert a.content_hash() != validate_config({"kick.q": 4}).content_hash()


# ------------------------------------------------------------------ runs


def test_run_single_no_kick_reaches_gibbs(tmp_path):
    cfg = validate_config({"chain.temperature": 1, "evolve.duration": 500.0,
                           "stepper.sample_every": 1000})
    summary = run_single(cfg, tmp_path)
    rows = read_csv(tmp_path / "series.csv")
    last = rows[-1]
    assert float(last["tau"]) == pytest.approx(500.0)
    gibbs = np.real(np.diag(gibbs_state(build_hamiltonian(canonical_config(1.0)), 1.0)))
    pops = np.array([float(last[f"pop_{k}"]) for k in range(1, 9)])
    np.testing.assert_allclose(pops, gibbs, atol=1e-4)
    assert summary.report is None
    assert set(summary.files) == {"series.csv", "rho_final.csv", "summary.json"}


def test_series_columns_and_kick_rows(tmp_path):
    cfg = validate_config({"kick.rotations": [[2, "x", "pi/2"]], "kick.tau_k": "pi/2",
                           "kick.n_kicks": 6})
    run_single(cfg, tmp_path)
    rows = read_csv(tmp_path / "series.csv")
    cols = rows[0].keys()
    for c in ["tau", "phase", "energy", "purity", "pop_1", "pop_8", "coh_1_2", "log_neg_0",
              "log_neg_2"]:
        assert c in cols
    pre = [r for r in rows if r["phase"] == "pre"]
    post = [r for r in rows if r["phase"] == "post"]
    assert len(pre) == len(post) == 6
    # kicks make the populations jump at the kick instant
    for a, b in zip(pre, post):
        assert a["tau"] == b["tau"]
        jump = max(abs(float(a[f"pop_{k}"]) - float(b[f"pop_{k}"])) for k in range(1, 9))
        assert jump > 1e-3
    flow = [float(r["tau"]) for r in rows]
    assert flow == sorted(flow)


def test_matrix_dump_schema(tmp_path):
    cfg = validate_config({"evolve.duration": 1.0})
    run_single(cfg, tmp_path)
    rows = read_csv(tmp_path / "rho_final.csv")
    assert len(rows) == 64
    assert set(rows[0]) >= {"row", "col", "re", "im", "abs"}
    diag = sum(float(r["re"]) for r in rows if r["row"] == r["col"])
    assert diag == pytest.approx(1.0)


def test_summary_json_has_report(tmp_path):
    cfg = validate_config({"chain.temperature": 1, "kick.rotations": [[0, "x", "pi/2"]],
                           "kick.tau_k": "pi", "kick.n_kicks": 200})
    run_single(cfg, tmp_path)
    data = json.loads((tmp_path / "summary.json").read_text())
    assert data["qss"]["converged"] is True
    assert len(data["config_hash"]) == 40
    assert data["config"]["kick.n_kicks"] == 200


def sweep_cfg(**extra):
    return validate_config({"chain.temperature": 1, "kick.rotations": [[0, "x", "pi/2"]],
                            "kick.tau_k": "pi", "sweep.kappa_grid": [0.5, 1.0, "pi"],
                            "sweep.q_grid": [4, 8], "qss.max_kicks": 600, **extra})


def test_grid_order():
    pts = grid_points(sweep_cfg(), "both")
    assert [(p.tau_k, p.kappa) for p in pts][:3] == [(PI, 0.5), (PI, 1.0), (PI, PI)]
    assert len(pts) == 6
    assert len(grid_points(sweep_cfg(), "kappa")) == 3
    assert all(p.spec.rotations[0].angle == p.kappa for p in pts)


def test_sweep_rows_and_determinism(tmp_path):
    cfg = sweep_cfg()
    rows, failed = run_sweep(cfg, "kappa", tmp_path / "a")
    run_sweep(cfg, "kappa", tmp_path / "b")
    assert failed == 0 and len(rows) == 3
    assert all(r["status"] == "ok" and r["converged"] for r in rows)
    a = (tmp_path / "a" / "sweep.csv").read_bytes()
    assert a == (tmp_path / "b" / "sweep.csv").read_bytes()
    summary = json.loads((tmp_path / "a" / "sweep_summary.json").read_text())
    assert summary["points"] == 3 and summary["failed"] == 0


def test_failed_points_are_recorded(tmp_path):
    cfg = sweep_cfg(**{"qss.max_kicks": 10})
    rows, failed = run_sweep(cfg, "kappa", tmp_path)
    assert failed == 3
    assert all(r["status"] == "failed" and "InsufficientDataError" in r["message"] for r in rows)


def test_thread_pool_preserves_order(tmp_path, monkeypatch):
    cfg = sweep_cfg()
    run_sweep(cfg, "kappa", tmp_path / "serial")
    monkeypatch.setenv("QKICK_THREADS", "2")
    run_sweep(cfg, "kappa", tmp_path / "pool")
    assert ((tmp_path / "serial" / "sweep.csv").read_bytes()
            == (tmp_path / "pool" / "sweep.csv").read_bytes())


def test_presets_validate():
    for number in FIGURES:
        for name, mode, raw, grid in figure_jobs(number):
            cfg = validate_config(raw)
            if mode == "sweep":
                assert grid_points(cfg, grid)
    with pytest.raises(KeyError):
        figure_jobs(2 + 10)


# ------------------------------------------------------------------- cli


def test_cli_validate_ok(tmp_path, capsys):
    assert cli.main(["validate", "--config", write_cfg(tmp_path, **{"kick.q": 8})]) == 0
    assert "ok" in capsys.readouterr().out


def test_cli_config_error_exit_code(tmp_path, capsys):
    path = write_cfg(tmp_path, **{"kick.q": 0, "chain.beta": -1})
    assert cli.main(["validate", "--config", path]) == 1
    err = capsys.readouterr().err
    assert "kick.q" in err and "chain.beta" in err


def test_cli_missing_file(tmp_path):
    assert cli.main(["validate", "--config", str(tmp_path / "none.yaml")]) == 1


def test_cli_set_overrides(tmp_path):
    path = write_cfg(tmp_path, **{"kick.q": 8})
    assert cli.main(["validate", "--config", path, "--set", "kick.q=0"]) == 1


def test_cli_numerical_failure_exit_code(tmp_path):
    path = write_cfg(tmp_path, **{"chain.beta": 50.0, "evolve.duration": 2000.0,
                                  "stepper.dt": 1.0, "stepper.min_steps": 1})
    assert cli.main(["evolve", "--config", path, "--out", str(tmp_path / "o")]) == 2


def test_cli_evolve_writes_outputs(tmp_path):
    path = write_cfg(tmp_path, **{"evolve.duration": 2.0})
    out = tmp_path / "run"
    assert cli.main(["evolve", "--config", path, "--out", str(out)]) == 0
    assert (out / "series.csv").exists() and (out / "summary.json").exists()


def test_cli_sweep_missing_grid_is_config_error(tmp_path):
    path = write_cfg(tmp_path, **{"kick.q": 8, "kick.rotations": [[0, "x", "pi/2"]]})
    assert cli.main(["sweep", "--config", path, "--grid", "kappa",
                     "--out", str(tmp_path / "s")]) == 1


def test_cli_figure_7_period_flag(tmp_path, monkeypatch):
    calls = []
    monkeypatch.setattr(cli, "run_single", lambda cfg: calls.append(cfg.tau_k))
    assert cli.main(["figure", "7", "--tau-k", "pi", "--out", str(tmp_path)]) == 0
    assert calls and all(t == pytest.approx(PI) for t in calls)
