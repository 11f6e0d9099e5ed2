"""
Command-line runner: ``dicke-qme {quench,g1,tau-sweep,steady-state,validate,oracle}``.

Configuration comes from (lowest to highest precedence) built-in defaults,
a flat ``key = value`` config file (``--config``), the environment variables
``DICKE_QME_OUT_DIR`` / ``DICKE_QME_WORKERS``, and command-line flags.

Config keys::

    N, omega_a, omega_c, lambda, gamma      model (gamma may be derived from eta, beta)
    eta, beta, cutoff                       reservoir (optional)
    lambdas, gammas, Ns                     comma-separated sweep lists
    t_max, n_points, rtol, atol, method     time grid and integrator
    mu0                                     quench initial label (default -J)
    fit_t_start, fit_floor, fit_window      fit policy (fit_window = lo,hi)
    excitation_loss, strict                 booleans (true/false)
    out_dir, workers

Every CSV begins with ``# key=value`` lines carrying the full configuration;
feeding those lines back through :func:`parse_config_text` reproduces it.

Exit codes: 0 success, 2 configuration error (or regime failure with
``--strict``), 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .correlation import FitError, FitPolicy, g1, steady_photon_number, tau_c_sweep
from .dynamics import IntegrationError, InvariantViolation, quench_experiment
from .liouvillian import build, kernel_dimension, steady_state
from .model import ModelParams, validate_regime
from .oracle import FockTruncation, dissipator_numeric_oracle, dressed_subspace_check
from .reservoir import QuadratureError, ReservoirParams, gamma_from_reservoir

SCHEMA_VERSION = 1
EXPERIMENTS = ("quench", "g1", "tau-sweep", "steady-state", "validate", "oracle")
ENV_OUT_DIR = "DICKE_QME_OUT_DIR"
ENV_WORKERS = "DICKE_QME_WORKERS"

FIG1_LAMBDAS = (2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 17.5, 20.0)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    experiment: str
    n_atoms: int = 16
    omega_a: float = 1.0
    omega_c: float = 400.0
    lam: float = 10.0
    gamma: float | None = 100.0
    eta: float | None = None
    beta: float | None = None
    cutoff: float | None = None
    lambdas: tuple = FIG1_LAMBDAS
    gammas: tuple = (100.0, 400.0)
    n_atoms_list: tuple = (16, 32)
    t_max: float = 50.0
    n_points: int = 2001
    rtol: float = 1e-9
    atol: float = 1e-12
    method: str = "rk45"
    mu0: float | None = None
    fit_t_start: float = 1.0
    fit_floor: float = 0.02
    fit_window: tuple | None = None
    excitation_loss: bool = False
    strict: bool = False
    out_dir: str = "."
    workers: int = 1

    # config-file key -> attribute
    KEYS = {
        "N": "n_atoms", "omega_a": "omega_a", "omega_c": "omega_c", "lambda": "lam",
        "gamma": "gamma", "eta": "eta", "beta": "beta", "cutoff": "cutoff",
        "lambdas": "lambdas", "gammas": "gammas", "Ns": "n_atoms_list",
        "t_max": "t_max", "n_points": "n_points", "rtol": "rtol", "atol": "atol",
        "method": "method", "mu0": "mu0", "fit_t_start": "fit_t_start",
        "fit_floor": "fit_floor", "fit_window": "fit_window",
        "excitation_loss": "excitation_loss", "strict": "strict",
        "out_dir": "out_dir", "workers": "workers", "experiment": "experiment",
    }

    @property
    def model(self) -> ModelParams:
        return ModelParams(n_atoms=self.n_atoms, omega_c=self.omega_c, lam=self.lam,
                           gamma=self.gamma, omega_a=self.omega_a)

    @property
    def reservoir(self) -> ReservoirParams | None:
        if self.eta is None or self.beta is None:
            return None
        return ReservoirParams(self.eta, self.beta, self.cutoff)

    @property
    def fit_policy(self) -> FitPolicy:
        return FitPolicy(t_start_min=self.fit_t_start, floor=self.fit_floor,
                         window=self.fit_window)

    def validate(self) -> "RunConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.eta is not None and self.beta is None:
            raise ConfigError("eta requires beta")
        if self.beta is not None and not self.beta > 0:
            raise ConfigError("beta must be positive")
        r = None
        try:
            r = self.reservoir
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if r is not None:
            g = gamma_from_reservoir(r)
            if self.gamma is None:
                self.gamma = g
            elif abs(self.gamma - g) > 1e-12 * max(1.0, abs(g)):
                raise ConfigError(f"gamma={self.gamma!r} disagrees with 16 eta / beta = {g!r}")
        if self.gamma is None:
            raise ConfigError("gamma is required when eta and beta are not given")
        try:
            self.model
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.method not in ("rk45", "rk4", "expm"):
            raise ConfigError(f"unknown method {self.method!r}")
        if self.n_points < 2 or self.t_max <= 0:
            raise ConfigError("need t_max > 0 and n_points >= 2")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self

    def to_lines(self) -> list[str]:
        """``key=value`` lines that :func:`parse_config_text` turns back into this config."""
        lines = []
        for key, attr in self.KEYS.items():
            if attr == "out_dir":
                continue
            lines.append(f"{key}={_format_value(getattr(self, attr))}")
        return lines


def _format_value(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (tuple, list)):
        return ",".join(_format_value(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def _opt_float(s):
    return None if str(s).strip().lower() == "none" else float(s)


def _float_list(s) -> tuple:
    return tuple(float(x) for x in str(s).split(",") if x.strip())


def _int_list(s) -> tuple:
    return tuple(int(x) for x in str(s).split(",") if x.strip())


def _window(s):
    if str(s).strip().lower() == "none":
        return None
    lo, hi = _float_list(s)
    return (lo, hi)


_CONVERT = {
    "n_atoms": int, "omega_a": float, "omega_c": float, "lam": float,
    "gamma": _opt_float, "eta": _opt_float, "beta": _opt_float, "cutoff": _opt_float,
    "lambdas": _float_list, "gammas": _float_list, "n_atoms_list": _int_list,
    "t_max": float, "n_points": int, "rtol": float, "atol": float, "method": str,
    "mu0": _opt_float, "fit_t_start": float, "fit_floor": float, "fit_window": _window,
    "excitation_loss": _parse_bool, "strict": _parse_bool, "out_dir": str,
    "workers": int, "experiment": str,
}


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` text into attribute-keyed, typed values.

    Blank lines are skipped; a leading ``#`` is stripped so CSV metadata
    headers parse too.  Lines without ``=`` and unknown keys listed in
    ``IGNORED_KEYS`` are ignored; other unknown keys are an error.
    """
    out = {}
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("#"):
            line = line[1:].strip()
        if not line or "=" not in line:
            continue
        key, value = (x.strip() for x in line.split("=", 1))
        if key in IGNORED_KEYS:
            continue
        if key not in RunConfig.KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        attr = RunConfig.KEYS[key]
        try:
            out[attr] = _CONVERT[attr](value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return out


IGNORED_KEYS = {"schema", "version", "columns", "note", "output"}


def metadata_lines(cfg: RunConfig, columns, extra=()) -> list[str]:
    return [f"schema={SCHEMA_VERSION}", f"version={__version__}",
            "note=deterministic output; no random numbers are used",
            f"columns={','.join(columns)}", *extra, *cfg.to_lines()]


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _csv(columns, rows, header) -> str:
    out = [f"# {h}" for h in header]
    out.append(",".join(columns))
    for row in rows:
        out.append(",".join(_cell(x) for x in row))
    return "\n".join(out) + "\n"


def _cell(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def _tag(x: float) -> str:
    return f"{x:g}"


# --- experiments --------------------------------------------------------------

def emit_figure_data(cfg: RunConfig, experiment: str, result) -> list[Path]:
    """Write the series behind each figure; returns the paths written."""
    out = Path(cfg.out_dir)
    written = []
    if experiment == "quench":
        cols = ("t", "Re_a", "trace", "min_eig")
        for res in result:
            header = metadata_lines(cfg, cols, [f"output=fig1 lambda={res.lam!r}"])
            text = res.trajectory.to_csv(columns=cols[1:], header_lines=header)
            path = out / f"fig1_lambda{_tag(res.lam)}.csv"
            write_text(path, text)
            written.append(path)
        cols = ("lambda", "alpha_edge", "window_average")
        rows = [(r.lam, r.alpha_edge, r.window_average) for r in result]
        path = out / "fig1_window_average.csv"
        write_text(path, _csv(cols, rows, metadata_lines(cfg, cols)))
        written.append(path)
    elif experiment == "g1":
        cols = ("t", "Re_g1", "Im_g1")
        for lam, (t, g) in result.items():
            header = metadata_lines(cfg, cols, [f"output=fig2 lambda={lam!r}"])
            rows = zip(t, g.real, g.imag)
            path = out / f"fig2_lambda{_tag(lam)}.csv"
            write_text(path, _csv(cols, rows, header))
            written.append(path)
    elif experiment == "tau-sweep":
        cols = ("N", "gamma", "lambda", "tau_c", "C", "residual", "R2")
        path = out / "fig4.csv"
        write_text(path, result.to_csv(header_lines=metadata_lines(cfg, cols)))
        written.append(path)
    else:
        raise ValueError(f"no figure data for {experiment!r}")
    return written


def run(cfg: RunConfig, stream=None) -> int:
    """Execute one experiment; returns the process exit status."""
    stream = sys.stdout if stream is None else stream
    say = lambda *a: print(*a, file=stream)
    try:
        cfg.validate()
    except ConfigError as exc:
        say(f"configuration error: {exc}")
        return 2
    p = cfg.model
    regime = validate_regime(p, cfg.reservoir or cfg.beta)
    if cfg.experiment != "validate" and not regime.ok:
        say("warning: parameters outside the dispersive/Markov window "
            + ", ".join(k for k, v in regime.passed.items() if not v))
        if cfg.strict:
            return 2
    try:
        return _dispatch(cfg, p, regime, say)
    except (IntegrationError, InvariantViolation, FitError, QuadratureError, RuntimeError) as exc:
        say(f"numerical failure: {exc}")
        return 3


def _dispatch(cfg, p, regime, say) -> int:
    exp = cfg.experiment
    if exp == "validate":
        say(regime.summary())
        if cfg.strict and not regime.ok:
            return 2
        return 0
    if exp == "steady-state":
        L = build(p)
        rho = steady_state(L)
        resid = float(np.max(np.abs(L.apply(rho))))
        say(f"steady state: diagonal value 1/{p.dim} = {float(rho[0, 0].real)!r}")
        say(f"max |L(rho_ss)| = {resid:.3e}")
        if p.dim ** 2 <= 4096:
            say(f"kernel dimension = {kernel_dimension(L)}")
        return 0
    if exp == "quench":
        results = quench_experiment(p, cfg.lambdas, t_max=cfg.t_max, n_points=cfg.n_points,
                                    mu0=cfg.mu0, workers=cfg.workers, rtol=cfg.rtol,
                                    atol=cfg.atol, method=cfg.method)
        paths = emit_figure_data(cfg, "quench", results)
        say(f"{'lambda':>8s} {'alpha_-J':>10s} {'late avg Re<a>':>15s}")
        for r in results:
            say(f"{r.lam:8g} {r.alpha_edge:10.5f} {r.window_average:15.6e}")
        say(f"wrote {len(paths)} files to {cfg.out_dir}")
        return 0
    if exp == "g1":
        t = np.linspace(0.0, cfg.t_max, cfg.n_points)
        out = {}
        for lam in cfg.lambdas:
            q = p.replace(lam=float(lam))
            out[float(lam)] = (t, g1(q, t_grid=t, method=cfg.method, rtol=cfg.rtol, atol=cfg.atol))
        paths = emit_figure_data(cfg, "g1", out)
        for lam, (_, g) in out.items():
            say(f"lambda={lam:g}: min Re g1 = {g.real.min():.4f}, "
                f"<a^dag a>_ss = {steady_photon_number(p.replace(lam=lam)):.4e}")
        say(f"wrote {len(paths)} files to {cfg.out_dir}")
        return 0
    if exp == "tau-sweep":
        t = np.linspace(0.0, cfg.t_max, cfg.n_points)
        table = tau_c_sweep(p, cfg.lambdas, cfg.gammas, cfg.n_atoms_list, t_grid=t,
                            policy=cfg.fit_policy, method=cfg.method, workers=cfg.workers)
        emit_figure_data(cfg, "tau-sweep", table)
        for (n, g), s in table.groups.items():
            taus = ", ".join(f"{x:.1f}" for x in table.tau(n, g))
            say(f"N={n} gamma={g:g}: tau_c = [{taus}]  slope={s['slope']:.3f}  R2={s['r2']:.4f}")
        say(f"wrote fig4.csv to {cfg.out_dir}")
        return 0
    if exp == "oracle":
        reports = [dressed_subspace_check(p, FockTruncation())]
        r = cfg.reservoir
        if r is not None:
            reports.append(dissipator_numeric_oracle(p, r))
        else:
            say("no eta/beta given: skipping the dissipator oracle")
        payload = [json.loads(rep.to_json()) for rep in reports]
        write_text(Path(cfg.out_dir) / "oracle_report.json",
                   json.dumps(payload, indent=2, sort_keys=True) + "\n")
        for rep in reports:
            say(rep.summary())
        if cfg.strict and not all(rep.ok for rep in reports):
            return 3
        return 0
    raise ConfigError(f"unknown experiment {exp!r}")


# --- argument parsing -----------------------------------------------------------

_SUBCOMMAND_DEFAULTS = {
    "quench": {},
    "g1": {"n_points": 2000, "method": "expm"},
    "tau-sweep": {"n_points": 2000, "method": "expm", "lambdas": (25.0, 30.0, 35.0, 40.0)},
    "steady-state": {},
    "validate": {},
    "oracle": {"n_atoms": 4},
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument("--N", dest="n_atoms", type=int, default=S)
    common.add_argument("--wa", dest="omega_a", type=float, default=S)
    common.add_argument("--wc", dest="omega_c", type=float, default=S)
    common.add_argument("--lambda", dest="lam", type=float, default=S)
    common.add_argument("--gamma", dest="gamma", type=_opt_float, default=S)
    common.add_argument("--eta", type=float, default=S)
    common.add_argument("--beta", type=float, default=S)
    common.add_argument("--cutoff", type=float, default=S)
    common.add_argument("--lambdas", type=_float_list, default=S)
    common.add_argument("--gammas", type=_float_list, default=S)
    common.add_argument("--Ns", dest="n_atoms_list", type=_int_list, default=S)
    common.add_argument("--tmax", dest="t_max", type=float, default=S)
    common.add_argument("--npoints", dest="n_points", type=int, default=S)
    common.add_argument("--rtol", type=float, default=S)
    common.add_argument("--atol", type=float, default=S)
    common.add_argument("--method", choices=("rk45", "rk4", "expm"), default=S)
    common.add_argument("--mu0", type=float, default=S)
    common.add_argument("--fit-start", dest="fit_t_start", type=float, default=S)
    common.add_argument("--fit-floor", dest="fit_floor", type=float, default=S)
    common.add_argument("--fit-window", dest="fit_window", type=_window, default=S)
    common.add_argument("--excitation-loss", dest="excitation_loss", action="store_true", default=S)
    common.add_argument("--strict", action="store_true", default=S)
    common.add_argument("--out", dest="out_dir", default=S)
    common.add_argument("--workers", type=int, default=S)

    parser = argparse.ArgumentParser(prog="dicke-qme", description=__doc__.splitlines()[1])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sub.add_parser(name, parents=[common])
    return parser


def config_from_args(argv=None, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    ns = vars(build_parser().parse_args(argv))
    exp = ns.pop("experiment")
    values = dict(_SUBCOMMAND_DEFAULTS.get(exp, {}))
    cfg_path = ns.pop("config", None)
    if cfg_path:
        with open(cfg_path, encoding="utf-8") as fh:
            file_values = parse_config_text(fh.read())
        file_values.pop("experiment", None)
        values.update(file_values)
    if ENV_OUT_DIR in environ:
        values["out_dir"] = environ[ENV_OUT_DIR]
    if ENV_WORKERS in environ:
        try:
            values["workers"] = int(environ[ENV_WORKERS])
        except ValueError as exc:
            raise ConfigError(f"{ENV_WORKERS} must be an integer") from exc
    values.update(ns)
    known = {f.name for f in fields(RunConfig)}
    return RunConfig(experiment=exp, **{k: v for k, v in values.items() if k in known})


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
