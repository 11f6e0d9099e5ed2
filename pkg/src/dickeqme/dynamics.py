"""
Time integration of the dressed-basis master equation and the quench
observable ``Re <a>``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from . import __version__
from .liouvillian import Liouvillian, build, superoperator_matrix
from .model import ModelParams, alphas, mu_index

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-8


class IntegrationError(RuntimeError):
    """The integrator failed (step-size underflow or similar)."""


class InvariantViolation(RuntimeError):
    """A density-matrix invariant was broken beyond tolerance."""


def initial_state_phi(p: ModelParams, mu0: float) -> np.ndarray:
    """Projector onto the displaced vacuum with label ``mu0``."""
    i = mu_index(p.n_atoms, mu0)
    rho = np.zeros((p.dim, p.dim), dtype=complex)
    rho[i, i] = 1.0
    return rho


def expect_re_a(p: ModelParams, rho: np.ndarray) -> float:
    """``Re <a> = sum_mu alpha_mu rho_{mu mu}``."""
    return float(np.dot(alphas(p), np.real(np.diagonal(rho))))


def density_diagnostics(rho: np.ndarray) -> dict:
    return {
        "trace": float(np.real(np.trace(rho))),
        "herm_err": float(np.max(np.abs(rho - rho.conj().T))),
        "min_eig": float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]),
    }


def check_density_matrix(rho: np.ndarray, loss: bool = False, where: str = "") -> dict:
    """Validate Hermiticity, trace and positivity; return the diagnostics.

    Raises
    ------
    InvariantViolation
    """
    d = density_diagnostics(rho)
    problems = []
    if d["herm_err"] > HERMITIAN_TOL:
        problems.append(f"hermiticity error {d['herm_err']:.3g}")
    if loss:
        if not 0 < d["trace"] <= 1 + TRACE_TOL:
            problems.append(f"trace {d['trace']:.12g} outside (0, 1]")
    elif abs(d["trace"] - 1) > TRACE_TOL:
        problems.append(f"trace deviation {d['trace'] - 1:.3g}")
    if d["min_eig"] < -POSITIVITY_TOL:
        problems.append(f"negative eigenvalue {d['min_eig']:.3g}")
    if problems:
        raise InvariantViolation(f"{where}: " + "; ".join(problems))
    return d


def propagate(L: Liouvillian, y0: np.ndarray, t_grid, method: str = "rk45",
              rtol: float = 1e-9, atol: float = 1e-12, step: float | None = None) -> np.ndarray:
    """Solve ``dY/dt = L(Y)`` for a matrix ``Y`` and return ``Y`` on ``t_grid``.

    Parameters
    ----------
    L : Liouvillian
    y0 : ndarray
        Initial matrix (any operator, not necessarily a state).
    t_grid : array_like
        Strictly increasing output times starting at ``t_grid[0]``.
    method : {"rk45", "rk4", "expm"}
        ``rk45``: adaptive Dormand-Prince 5(4) with dense output.
        ``rk4``: classical fixed-step fourth order, ``step`` no larger than
        the requested value and landing exactly on every output time.
        ``expm``: exact propagation with superoperator exponentials.
    rtol, atol : float
        Tolerances for ``rk45``.
    step : float, optional
        Step for ``rk4`` (default 1e-3).

    Returns
    -------
    ndarray of shape ``(len(t_grid), dim, dim)``
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 1:
        raise ValueError("t_grid must be a non-empty 1-d array")
    if np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    n = L.dim
    y0 = np.asarray(y0, dtype=complex)
    if y0.shape != (n, n):
        raise ValueError(f"initial matrix has shape {y0.shape}, expected {(n, n)}")
    out = np.empty((t.size, n, n), dtype=complex)
    out[0] = y0
    if t.size == 1:
        return out

    if method == "rk45":
        def rhs(_, y):
            return L.apply(y.reshape(n, n)).ravel()

        sol = solve_ivp(rhs, (t[0], t[-1]), y0.ravel(), method="RK45", t_eval=t,
                        rtol=rtol, atol=atol)
        if not sol.success:
            raise IntegrationError(sol.message)
        out[1:] = sol.y.T[1:].reshape(-1, n, n)
    elif method == "rk4":
        h_max = 1e-3 if step is None else float(step)
        y = y0.copy()
        for k in range(1, t.size):
            span = t[k] - t[k - 1]
            m = max(1, int(np.ceil(span / h_max - 1e-12)))
            h = span / m
            for _ in range(m):
                k1 = L.apply(y)
                k2 = L.apply(y + 0.5 * h * k1)
                k3 = L.apply(y + 0.5 * h * k2)
                k4 = L.apply(y + h * k3)
                y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            out[k] = y
    elif method == "expm":
        m = superoperator_matrix(L)
        dts = np.diff(t)
        v = y0.ravel()
        uniform = np.allclose(dts, dts[0], rtol=1e-12, atol=0)
        step_prop = expm(m * dts[0]) if uniform else None
        for k in range(1, t.size):
            prop = step_prop if uniform else expm(m * dts[k - 1])
            v = prop @ v
            out[k] = v.reshape(n, n)
    else:
        raise ValueError(f"unknown method {method!r}")
    return out


@dataclass
class Trajectory:
    """Sampled time evolution.

    ``observables`` maps a name to a series aligned with ``times``;
    ``states`` holds the density matrices when they were kept.
    """

    times: np.ndarray
    observables: dict
    states: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        for name, series in self.observables.items():
            if len(series) != self.times.size:
                raise ValueError(f"observable {name!r} has the wrong length")

    def __getitem__(self, name):
        return self.observables[name]

    def to_csv(self, columns=("Re_a", "trace", "min_eig"), header_lines=()) -> str:
        """CSV text with ``t`` first; ``header_lines`` become ``# ``-prefixed lines."""
        buf = io.StringIO(newline="")
        for line in header_lines:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", *columns])
        for i, t in enumerate(self.times):
            w.writerow([_fmt(t)] + [_fmt(self.observables[c][i]) for c in columns])
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "metadata": self.metadata,
            "times": self.times.tolist(),
            "observables": {k: _jsonable(v) for k, v in self.observables.items()},
        }
        return json.dumps(payload, sort_keys=True)


def _fmt(x) -> str:
    return repr(float(x))


def _jsonable(series):
    arr = np.asarray(series)
    if np.iscomplexobj(arr):
        return {"real": arr.real.tolist(), "imag": arr.imag.tolist()}
    return arr.tolist()


def evolve(L: Liouvillian, rho0: np.ndarray, t_grid, rtol: float = 1e-9,
           atol: float = 1e-12, method: str = "rk45", step: float | None = None,
           observables: dict | None = None, keep_states: bool = False,
           check: bool = True) -> Trajectory:
    """Integrate the master equation from ``rho0`` and sample observables.

    ``trace``, ``min_eig`` and ``herm_err`` are always recorded; ``Re_a`` is
    added when ``L`` carries its model parameters.  Extra observables are
    callables ``rho -> value``.

    Raises
    ------
    InvariantViolation
        If ``check`` and a density-matrix invariant fails at an output time.
    IntegrationError
    """
    loss = L.include_excitation_loss
    if check:
        check_density_matrix(rho0, loss=loss, where="initial state")
    states = propagate(L, rho0, t_grid, method=method, rtol=rtol, atol=atol, step=step)
    obs_fns = {}
    if L.params is not None:
        p = L.params
        obs_fns["Re_a"] = lambda rho: expect_re_a(p, rho)
    obs_fns.update(observables or {})
    series = {k: [] for k in ("trace", "min_eig", "herm_err", *obs_fns)}
    t = np.asarray(t_grid, dtype=float)
    for k, rho in enumerate(states):
        if check:
            d = check_density_matrix(rho, loss=loss, where=f"t={t[k]:.6g}")
        else:
            d = density_diagnostics(rho)
        for name in ("trace", "min_eig", "herm_err"):
            series[name].append(d[name])
        for name, fn in obs_fns.items():
            series[name].append(fn(rho))
    series = {k: np.asarray(v) for k, v in series.items()}
    meta = {"method": method, "rtol": rtol, "atol": atol, "step": step,
            "include_excitation_loss": loss, "version": __version__}
    if L.params is not None:
        meta["params"] = _params_dict(L.params)
    return Trajectory(times=t, observables=series,
                      states=states if keep_states else None, metadata=meta)


def _params_dict(p: ModelParams) -> dict:
    return {"n_atoms": p.n_atoms, "omega_c": p.omega_c, "lam": p.lam,
            "gamma": p.gamma, "omega_a": p.omega_a}


def propagator_expm(L: Liouvillian, t: float) -> np.ndarray:
    """Superoperator ``exp(M t)`` (scaling and squaring, row-major stacking)."""
    return expm(superoperator_matrix(L) * float(t))


@dataclass
class QuenchResult:
    lam: float
    trajectory: Trajectory
    window: tuple
    window_average: float
    alpha_edge: float


def _quench_one(args):
    p, t_grid, window, mu0, kw = args
    L = build(p)
    traj = evolve(L, initial_state_phi(p, mu0), t_grid, **kw)
    t = traj.times
    sel = (t >= window[0]) & (t <= window[1])
    w_avg = float(np.mean(traj["Re_a"][sel]))
    return QuenchResult(lam=p.lam, trajectory=traj, window=tuple(window),
                        window_average=w_avg, alpha_edge=float(alphas(p)[0]))


def quench_experiment(p_base: ModelParams, lambdas, t_max: float = 50.0,
                      n_points: int = 2001, mu0: float | None = None,
                      window: tuple | None = None, workers: int = 1,
                      **evolve_kw) -> list[QuenchResult]:
    """Quench from ``|phi_{mu0}><phi_{mu0}|`` (default ``mu0 = -J``) for each coupling.

    ``window`` (default ``[t_max/2, t_max]``) sets the late-time average of
    ``Re <a>``.  ``alpha_edge`` is ``alpha_{-J}`` at that coupling.
    """
    if mu0 is None:
        mu0 = -p_base.j
    if window is None:
        window = (t_max / 2, t_max)
    t_grid = np.linspace(0.0, t_max, n_points)
    jobs = [(p_base.replace(lam=float(lam)), t_grid, window, mu0, evolve_kw) for lam in lambdas]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_quench_one, jobs))
    return [_quench_one(j) for j in jobs]
