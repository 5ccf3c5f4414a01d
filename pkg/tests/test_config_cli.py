import csv
import json

import numpy as np
import pytest

from ldg_phasefield import cli
from ldg_phasefield.config import ConfigError, RunConfig, config_from_dict, load_config
from ldg_phasefield.dynamics import gradient_check
from ldg_phasefield.energy import evaluate
from ldg_phasefield.fields import load_csv

SMALL = {"grid_n": 16, "lambda": 1e-6, "solver": {"max_iter": 25}, "seed": 3}


def _write(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# configuration

def test_defaults_match_reference_parameters():
    cfg = RunConfig()
    par = cfg.params()
    assert cfg.grid_n == 128 and cfg.eps_bar == 0.005 and cfg.v0_bar == 0.09
    assert cfg.materials().A == pytest.approx(-0.64e4 ** 2 / (3 * 0.35e4))
    assert par.s_plus == pytest.approx(1.8285714285714285)
    assert cfg.solver.method == "lbfgs"


def test_config_roundtrip_and_partial_blocks(tmp_path):
    cfg = load_config(_write(tmp_path, {"lambda": 2e-6, "solver": {"tol": 1e-4},
                                        "material": {"B": 0.7e4}}))
    assert cfg.lam == 2e-6 and cfg.solver.tol == 1e-4 and cfg.solver.max_iter == 40000
    assert cfg.materials().B == 0.7e4 and cfg.materials().C == 0.35e4
    again = config_from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg


@pytest.mark.parametrize("bad", [
    {"grid_n": 8},
    {"lambda": -1.0},
    {"omega_a_over_L": -1.0},
    {"colour": "red"},
    {"solver": {"speed": 3}},
    {"init": {"kind": "spiral"}},
    {"material": {"D": 1.0}},
    {"gamma": {"profile": "erf"}},
    {"material": {"C": 0.0}},
])
def test_config_rejects_invalid(bad):
    with pytest.raises(ConfigError):
        config_from_dict(bad)


def test_load_config_errors(tmp_path):
    missing = tmp_path / "nope.json"
    with pytest.raises(ConfigError, match="nope.json"):
        load_config(missing)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)


# minimize

def test_minimize_missing_config_names_path(tmp_path, capsys):
    path = str(tmp_path / "missing.json")
    assert cli.main(["minimize", "--config", path]) == cli.EXIT_CONFIG
    assert path in capsys.readouterr().err


def test_minimize_zero_iterations_writes_initial_state(tmp_path):
    cfg = _write(tmp_path, {**SMALL, "solver": {"max_iter": 0}})
    out = tmp_path / "run"
    assert cli.main(["minimize", "--config", cfg, "--out", str(out)]) == cli.EXIT_CRITERION
    phi, P = load_csv(out / "fields.csv")
    summary = json.loads((out / "summary.json").read_text())
    assert summary["iterations"] == 0 and summary["stop_reason"] == "max_iter"
    hist = _read_csv(out / "energy_history.csv")
    assert hist[0] == ["iteration", "energy", "volume"] and len(hist) == 2
    ev = evaluate(P.p11, P.p12, phi.values, RunConfig(**{"grid_n": 16, "lam": 1e-6}).params(), phi.grid)
    assert float(hist[1][1]) == pytest.approx(ev.total, rel=1e-12)


def test_io_error_exit_code(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = _write(tmp_path, {**SMALL, "solver": {"max_iter": 0}})
    assert cli.main(["minimize", "--config", cfg, "--out", str(blocker / "sub")]) == cli.EXIT_IO


# sweep

def test_sweep_grid_naming_and_determinism(tmp_path, monkeypatch):
    monkeypatch.setenv("LDG_NUM_THREADS", "2")
    cfg = _write(tmp_path, SMALL)
    args = ["--config", cfg, "--lambda-list", "1e-6,2e-6", "--omega-a-list", "1e7,3e7"]
    assert cli.main(["sweep", "--out", str(tmp_path / "a"), "--jobs", "1"] + args) == 0
    assert cli.main(["sweep", "--out", str(tmp_path / "b"), "--jobs", "8"] + args) == 0
    a = (tmp_path / "a" / "phase_diagram.csv").read_bytes()
    assert a == (tmp_path / "b" / "phase_diagram.csv").read_bytes()
    rows = _read_csv(tmp_path / "a" / "phase_diagram.csv")
    assert rows[0] == cli.PHASE_HEADER and len(rows) == 5
    assert [(float(r[0]), float(r[1])) for r in rows[1:]] == [
        (1e-6, 1e7), (1e-6, 3e7), (2e-6, 1e7), (2e-6, 3e7)]
    dirs = sorted(p.name for p in (tmp_path / "a").iterdir() if p.is_dir())
    assert dirs == ["lam1e-06_oa1e+07", "lam1e-06_oa3e+07", "lam2e-06_oa1e+07", "lam2e-06_oa3e+07"]


def test_single_cell_sweep_matches_minimize(tmp_path):
    cfg = _write(tmp_path, {**SMALL, "lambda": 2e-6, "omega_a_over_L": 3e7})
    cli.main(["minimize", "--config", cfg, "--out", str(tmp_path / "m")])
    assert cli.main(["sweep", "--config", cfg, "--out", str(tmp_path / "s"),
                     "--lambda-list", "2e-6", "--omega-a-list", "3e7"]) == 0
    cell = tmp_path / "s" / cli.cell_name(2e-6, 3e7)
    for name in ("fields.csv", "energy_history.csv"):
        assert (cell / name).read_bytes() == (tmp_path / "m" / name).read_bytes()
    sm = json.loads((tmp_path / "m" / "summary.json").read_text())
    sc = json.loads((cell / "summary.json").read_text())
    sm["config"].pop("output")
    sc["config"].pop("output")
    assert sm == sc


def test_sweep_records_failed_cell(tmp_path, monkeypatch):
    real = cli.run_minimization

    def flaky(cfg, outdir):
        if cfg.lam > 1.5e-6:
            raise FloatingPointError("boom")
        return real(cfg, outdir)
    monkeypatch.setattr(cli, "run_minimization", flaky)
    cfg = _write(tmp_path, SMALL)
    code = cli.main(["sweep", "--config", cfg, "--out", str(tmp_path / "o"),
                     "--lambda-list", "1e-6,2e-6", "--omega-a-list", "1e7"])
    assert code == cli.EXIT_CRITERION
    rows = _read_csv(tmp_path / "o" / "phase_diagram.csv")
    assert [r[2] for r in rows[1:]][1] == "failed" and rows[1][2] != "failed"


def test_max_workers_respects_env(monkeypatch):
    monkeypatch.setenv("LDG_NUM_THREADS", "3")
    assert cli.max_workers(8, 30) == 3
    assert cli.max_workers(8, 2) == 2
    assert cli.main(["sweep", "--jobs", "0"]) == cli.EXIT_CONFIG


# gamma-check

def test_gamma_check_default_circle_no_anchoring(tmp_path):
    cfg = _write(tmp_path, {"omega_a_over_L": 0.0})
    assert cli.main(["gamma-check", "--config", cfg, "--out", str(tmp_path)]) == cli.EXIT_OK
    rows = _read_csv(tmp_path / "gamma_gap.csv")
    assert len(rows) == 5
    assert float(rows[-1][2]) == pytest.approx(2 * np.pi * 0.169257 / 3, abs=5e-5)
    assert float(rows[-1][2]) == pytest.approx(0.3545, abs=5e-5)


def test_gamma_check_single_eps_only_threshold(tmp_path):
    cfg = _write(tmp_path, {"omega_a_over_L": 0.0})
    assert cli.main(["gamma-check", "--config", cfg, "--out", str(tmp_path),
                     "--eps-list", "0.01"]) == cli.EXIT_OK
    assert cli.main(["gamma-check", "--config", cfg, "--out", str(tmp_path),
                     "--eps-list", "0.04"]) == cli.EXIT_CRITERION


def test_gamma_check_underresolved_grid_fails(tmp_path):
    cfg = _write(tmp_path, {"omega_a_over_L": 0.0, "gamma": {"grid_n": 33}})
    assert cli.main(["gamma-check", "--config", cfg, "--out", str(tmp_path),
                     "--eps-list", "0.005"]) == cli.EXIT_CRITERION


def test_gamma_check_rejects_increasing_list(tmp_path):
    assert cli.main(["gamma-check", "--out", str(tmp_path), "--eps-list", "0.01,0.02"]) == cli.EXIT_CONFIG


# verification drivers

def test_sdf_check_passes():
    rep = cli.sdf_check()
    assert rep["identity_max_error"] < 1e-4 and rep["drift"] < 1e-8
    assert rep["sandwich_samples"] >= 1000
    assert rep["sandwich_lower"] and rep["sandwich_upper"] and rep["sign_matches"]
    assert cli.main(["sdf-check"]) == cli.EXIT_OK


def test_gradcheck_passes_for_many_seeds():
    for seed in range(10):
        assert max(gradient_check(seed=seed).values()) < 1e-6
    assert cli.main(["gradcheck"]) == cli.EXIT_OK


def test_gradcheck_detects_corrupted_sign(monkeypatch):
    def corrupted(p11, p12, phi, params, grid, derivatives=False):
        ev = evaluate(p11, p12, phi, params, grid, derivatives)
        if derivatives:
            ev.d_p12 = -ev.d_p12
        return ev
    monkeypatch.setattr(cli, "gradient_check", lambda seed=0: gradient_check(seed=seed, evaluator=corrupted))
    assert cli.main(["gradcheck"]) == cli.EXIT_CRITERION


@pytest.mark.slow
def test_minimize_reference_defaults_is_radial(tmp_path):
    assert cli.main(["minimize", "--out", str(tmp_path)]) == cli.EXIT_OK
    assert json.loads((tmp_path / "summary.json").read_text())["label"] == "radial"


def test_sweep_default_grid_has_thirty_cells(tmp_path):
    cfg = _write(tmp_path, {**SMALL, "solver": {"max_iter": 2}})
    assert cli.main(["sweep", "--config", cfg, "--out", str(tmp_path / "o")]) == cli.EXIT_OK
    rows = _read_csv(tmp_path / "o" / "phase_diagram.csv")
    assert len(rows) == 31
    assert sorted({float(r[0]) for r in rows[1:]}) == [0.8e-6, 1e-6, 2e-6, 5e-6, 7.5e-6]
    assert sorted({float(r[1]) for r in rows[1:]}) == [1e7, 3e7, 6e7, 9e7, 1.5e8, 3e8]
