import json

import numpy as np
import pytest

from dickeqme.cli import (ENV_OUT_DIR, ENV_WORKERS, ConfigError, RunConfig, config_from_args,
                          main, parse_config_text, run)


def read_csv(path):
    lines = path.read_text().splitlines()
    meta = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if not ln.startswith("#")]
    return meta, body[0], np.array([[float(x) for x in ln.split(",")] for ln in body[1:]])


def test_parse_config_text():
    vals = parse_config_text("# comment line\nN = 8\nlambdas=1,2.5\nstrict=true\n\ngamma=none\n")
    assert vals == {"n_atoms": 8, "lambdas": (1.0, 2.5), "strict": True, "gamma": None}
    with pytest.raises(ConfigError):
        parse_config_text("bogus=1")
    with pytest.raises(ConfigError):
        parse_config_text("N=eight")


def test_precedence_file_env_flags(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("N=8\nomega_c=300\nworkers=3\nout_dir=from_file\n")
    env = {ENV_OUT_DIR: str(tmp_path / "env"), ENV_WORKERS: "2"}
    cfg = config_from_args(["quench", "--config", str(cfg_file), "--N", "10"], environ=env)
    assert cfg.n_atoms == 10 and cfg.omega_c == 300.0
    assert cfg.workers == 2 and cfg.out_dir == str(tmp_path / "env")
    cfg = config_from_args(["quench", "--config", str(cfg_file), "--workers", "1",
                            "--out", "flag"], environ=env)
    assert cfg.workers == 1 and cfg.out_dir == "flag"


def test_gamma_derived_from_reservoir():
    cfg = config_from_args(["validate", "--gamma", "none", "--eta", "0.125", "--beta", "0.02"],
                           environ={})
    cfg.validate()
    assert cfg.gamma == pytest.approx(100.0, rel=1e-14)
    bad = config_from_args(["validate", "--gamma", "99", "--eta", "0.125", "--beta", "0.02"],
                           environ={})
    with pytest.raises(ConfigError):
        bad.validate()


def test_config_errors_exit_2(tmp_path, capsys):
    assert main(["validate", "--gamma", "99", "--eta", "0.125", "--beta", "0.02"]) == 2
    assert main(["validate", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert main(["steady-state", "--N", "0"]) == 2
    assert main(["quench", "--eta", "0.1"]) == 2
    with pytest.raises(SystemExit):
        main(["unknown-experiment"])


def test_validate_reports_four_ratios(capsys):
    assert main(["validate", "--N", "16", "--wc", "400", "--lambda", "10", "--beta", "0.02"]) == 0
    out = capsys.readouterr().out
    for name in ("sqrtN_lam/omega_c", "N_omega_a/(2omega_c)", "1/(beta_omega_c)", "beta_max_gap"):
        assert name in out
    assert "FAIL" not in out
    assert main(["validate", "--lambda", "100", "--strict"]) == 2


def test_steady_state_command(capsys):
    assert main(["steady-state", "--N", "16"]) == 0
    out = capsys.readouterr().out
    assert "1/17 = 0.058823529411764" in out and "kernel dimension" in out


def test_quench_outputs_deterministic(tmp_path, monkeypatch):
    monkeypatch.delenv(ENV_OUT_DIR, raising=False)
    args = ["quench", "--lambdas", "5,17.5", "--tmax", "5", "--npoints", "51"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("fig1_lambda5.csv", "fig1_lambda17.5.csv", "fig1_window_average.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    meta, header, data = read_csv(tmp_path / "a" / "fig1_lambda17.5.csv")
    assert header == "t,Re_a,trace,min_eig"
    assert data.shape == (51, 4) and data[0, 1] == pytest.approx(0.175)
    assert b"\r" not in (tmp_path / "a" / "fig1_lambda5.csv").read_bytes()


def test_metadata_round_trip(tmp_path):
    cfg = RunConfig(experiment="quench", lambdas=(2.5,), t_max=2.0, n_points=21,
                    out_dir=str(tmp_path), gamma=None, eta=0.125, beta=0.02, mu0=3.0,
                    fit_window=(1.0, 4.0))
    assert run(cfg) == 0
    meta, _, _ = read_csv(tmp_path / "fig1_lambda2.5.csv")
    restored = RunConfig(**parse_config_text("\n".join(meta)), out_dir=str(tmp_path))
    assert restored == cfg


def test_g1_and_sweep_schemas(tmp_path):
    assert main(["g1", "--lambdas", "2.5,20", "--out", str(tmp_path)]) == 0
    _, header, data = read_csv(tmp_path / "fig2_lambda20.csv")
    assert header == "t,Re_g1,Im_g1" and data.shape == (2000, 3)
    assert data[0, 1] == 1.0 and np.all(data[:, 1] > 0)
    assert main(["tau-sweep", "--lambdas", "25,30", "--gammas", "400", "--Ns", "16",
                 "--out", str(tmp_path)]) == 0
    _, header, data = read_csv(tmp_path / "fig4.csv")
    assert header == "N,gamma,lambda,tau_c,C,residual,R2"
    assert data.shape == (2, 7) and data[1, 3] > data[0, 3]


def test_numerical_failure_exit_3(tmp_path, capsys):
    # a window holding too few points makes the fit fail
    assert main(["tau-sweep", "--lambdas", "25", "--gammas", "100", "--Ns", "4",
                 "--fit-window", "1,1.01", "--out", str(tmp_path)]) == 3
    assert "numerical failure" in capsys.readouterr().out


def test_oracle_command_writes_report(tmp_path):
    assert main(["oracle", "--out", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "oracle_report.json").read_text())
    assert payload[0]["name"] == "dressed_subspace"
