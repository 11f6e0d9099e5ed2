"""
Steady-state first-order correlation function and coherence times.

The numerator ``<a^dag(t) a(0)>_ss = Tr[a exp(L t)(a rho_ss)]`` is obtained
by propagating the operator ``a rho_ss`` with the same generator as the
density matrix (quantum regression).
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .dynamics import propagate
from .liouvillian import Liouvillian, build, steady_state
from .model import ModelParams, a_subspace

MIN_FIT_POINTS = 8


class FitError(ValueError):
    """No usable decay window, or too few points for a fit."""


def steady_photon_number(p: ModelParams) -> float:
    """``<a^dag a>_ss = sum_mu alpha_mu^2 / (N+1) = 4 lam^2 J(J+1) / (3 N omega_c^2)``."""
    if p.lam == 0:
        raise ValueError("photon number vanishes at lam = 0; g1 is undefined")
    j = p.j
    return 4.0 * p.lam**2 * j * (j + 1) / (3.0 * p.n_atoms * p.omega_c**2)


def default_time_grid(t_max: float = 50.0, n_points: int = 2000) -> np.ndarray:
    return np.linspace(0.0, t_max, n_points)


def g1(p: ModelParams, L: Liouvillian | None = None, t_grid=None,
       method: str = "expm", **propagate_kw) -> np.ndarray:
    """Normalized first-order correlation ``g1(t)`` on the steady state.

    Parameters
    ----------
    p : ModelParams
    L : Liouvillian, optional
        Defaults to ``build(p)``.
    t_grid : array_like, optional
        Must start at 0; defaults to 2000 points on ``[0, 50]``.
    method : str
        Propagation method, see :func:`dickeqme.dynamics.propagate`.

    Returns
    -------
    ndarray of complex, aligned with ``t_grid``; ``g1[0] == 1`` exactly.
    """
    if p.lam == 0:
        raise ValueError("photon number vanishes at lam = 0; g1 is undefined")
    L = build(p) if L is None else L
    t = default_time_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    if t[0] != 0:
        raise ValueError("t_grid must start at 0")
    a = a_subspace(p)
    b0 = a @ steady_state(L)
    traj = propagate(L, b0, t, method=method, **propagate_kw)
    numer = np.einsum("ij,tji->t", a, traj)
    # normalized by the t = 0 value of the same expression, so g1(0) is exactly 1
    return numer / numer[0].real


@dataclass(frozen=True)
class FitPolicy:
    """How the decay window of ``Re g1`` is chosen.

    The default starts at the first local maximum of ``|Re g1|`` after
    ``t_start_min`` (or at ``t_start_min`` when there is none) and ends
    where ``Re g1`` first drops below ``floor`` or the grid ends.  An
    explicit ``window = (t_lo, t_hi)`` overrides both rules.  Only strictly
    positive values enter the log-linear fit.
    """

    t_start_min: float = 1.0
    floor: float = 0.02
    window: tuple | None = None


@dataclass(frozen=True)
class FitResult:
    amplitude: float
    tau_c: float
    residual: float
    window: tuple
    n_points: int
    policy: FitPolicy = field(default_factory=FitPolicy)


def select_window(t, y, policy: FitPolicy) -> tuple[int, int]:
    """Index range ``[lo, hi)`` of the decay window."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if policy.window is not None:
        lo_t, hi_t = policy.window
        if not lo_t < hi_t:
            raise FitError("window must satisfy t_lo < t_hi")
        lo = int(np.searchsorted(t, lo_t, side="left"))
        hi = int(np.searchsorted(t, hi_t, side="right"))
        return lo, hi
    i0 = max(int(np.searchsorted(t, policy.t_start_min, side="left")), 1)
    ay = np.abs(y)
    lo = i0
    for i in range(i0, len(t) - 1):
        if ay[i] >= ay[i - 1] and ay[i] >= ay[i + 1]:
            lo = i
            break
    below = np.nonzero(y[lo:] < policy.floor)[0]
    hi = lo + int(below[0]) if below.size else len(t)
    return lo, hi


def fit_exponential(t, y, policy: FitPolicy | None = None) -> FitResult:
    """Fit ``y ~ C exp(-t / tau_c)`` by least squares on ``log y``.

    Raises
    ------
    FitError
        If the window holds no positive values, fewer than eight usable
        points, or the fitted slope is not a decay.
    """
    policy = FitPolicy() if policy is None else policy
    t = np.asarray(t, dtype=float)
    y = np.real(np.asarray(y))
    lo, hi = select_window(t, y, policy)
    tt, yy = t[lo:hi], y[lo:hi]
    keep = yy > 0
    if not np.any(keep):
        raise FitError("no positive values in the decay window")
    tt, yy = tt[keep], yy[keep]
    if tt.size < MIN_FIT_POINTS:
        raise FitError(f"only {tt.size} usable points (need {MIN_FIT_POINTS})")
    design = np.column_stack([np.ones_like(tt), tt])
    coef, *_ = np.linalg.lstsq(design, np.log(yy), rcond=None)
    intercept, slope = coef
    if not slope < 0:
        raise FitError(f"fitted slope {slope:.3g} is not a decay")
    resid = np.log(yy) - design @ coef
    return FitResult(amplitude=float(np.exp(intercept)), tau_c=float(-1.0 / slope),
                     residual=float(np.sqrt(np.mean(resid**2))),
                     window=(float(tt[0]), float(tt[-1])), n_points=int(tt.size),
                     policy=policy)


@dataclass
class SweepTable:
    """Rows ``(N, gamma, lambda, tau_c, C, residual)`` plus per-(N, gamma) line fits."""

    rows: list
    groups: dict

    def tau(self, n_atoms, gamma) -> np.ndarray:
        return np.array([r["tau_c"] for r in self.rows
                         if r["N"] == n_atoms and r["gamma"] == gamma])

    def to_csv(self, header_lines=()) -> str:
        buf = io.StringIO(newline="")
        for line in header_lines:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "gamma", "lambda", "tau_c", "C", "residual", "R2"])
        for r in self.rows:
            r2 = self.groups[(r["N"], r["gamma"])]["r2"]
            w.writerow([r["N"], repr(float(r["gamma"])), repr(float(r["lambda"])),
                        repr(r["tau_c"]), repr(r["C"]), repr(r["residual"]), repr(r2)])
        return buf.getvalue()


def _sweep_cell(args):
    p, t_grid, policy, method = args
    fit = fit_exponential(t_grid, g1(p, t_grid=t_grid, method=method).real, policy)
    return {"N": p.n_atoms, "gamma": p.gamma, "lambda": p.lam, "tau_c": fit.tau_c,
            "C": fit.amplitude, "residual": fit.residual, "window": fit.window}


def tau_c_sweep(p_base: ModelParams, lambdas, gammas, n_atoms_list, t_grid=None,
                policy: FitPolicy | None = None, method: str = "expm",
                workers: int = 1) -> SweepTable:
    """Coherence time over a grid of couplings, dephasing strengths and sizes.

    For every ``(N, gamma)`` group the slope, intercept and ``R^2`` of a
    straight-line fit of ``tau_c`` against ``lambda`` are reported.
    """
    t = default_time_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    policy = FitPolicy() if policy is None else policy
    cells = [(p_base.replace(n_atoms=int(n), gamma=float(g), lam=float(lam)), t, policy, method)
             for n in n_atoms_list for g in gammas for lam in lambdas]
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(c) for c in cells]
    groups = {}
    for n in n_atoms_list:
        for g in gammas:
            sel = [r for r in rows if r["N"] == int(n) and r["gamma"] == float(g)]
            lam = np.array([r["lambda"] for r in sel])
            tau = np.array([r["tau_c"] for r in sel])
            if lam.size >= 2:
                lr = stats.linregress(lam, tau)
                groups[(int(n), float(g))] = {"slope": float(lr.slope),
                                              "intercept": float(lr.intercept),
                                              "r2": float(lr.rvalue**2)}
            else:
                groups[(int(n), float(g))] = {"slope": float("nan"),
                                              "intercept": float("nan"), "r2": float("nan")}
    return SweepTable(rows=rows, groups=groups)
