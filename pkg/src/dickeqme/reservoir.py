"""
Ohmic thermal reservoir: spectral density, correlation functions and the
rates that enter the dressed-basis master equation.

Conventions::

    C(t)       = int_0^inf dw J(w) [2 n_B(w) cos(w t) + exp(-i w t)]
    C~(w)      = (1/2pi) int dt C(t) exp(i w t) = J(|w|) [n_B(|w|) + theta(w)]
    J(w)       = eta * w            (closed forms, cutoff -> infinity)
    J_L(w)     = eta * w exp(-w/L)  (quadrature and diagnostic paths)
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import integrate

from .model import ModelParams, mu_index


class QuadratureError(RuntimeError):
    """A numerical integral did not reach the requested accuracy."""


@dataclass(frozen=True)
class ReservoirParams:
    """Ohmic bath.

    Parameters
    ----------
    eta : float
        Dimensionless dissipation strength.
    beta : float
        Inverse temperature (units of ``1/omega_a``).
    cutoff : float, optional
        Exponential cutoff frequency; only used by quadrature and diagnostics.
    """

    eta: float
    beta: float
    cutoff: float | None = None

    def __post_init__(self):
        if not self.eta >= 0:
            raise ValueError("eta must be non-negative")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.cutoff is not None and not self.cutoff > 0:
            raise ValueError("cutoff must be positive")


def _cutoff(r: ReservoirParams, cutoff):
    lam = cutoff if cutoff is not None else r.cutoff
    if lam is None:
        raise ValueError("a finite cutoff is required on this path")
    if not lam > 0:
        raise ValueError("cutoff must be positive")
    return float(lam)


def spectral_density(r: ReservoirParams, omega, with_cutoff: bool = False):
    """``eta * omega``, times ``exp(-omega/cutoff)`` when ``with_cutoff``."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("spectral density is defined for omega >= 0")
    out = r.eta * w
    if with_cutoff:
        out = out * np.exp(-w / _cutoff(r, None))
    return out[()] if out.ndim == 0 else out


def bose_einstein(beta: float, omega):
    """Bose-Einstein occupation ``1 / (exp(beta omega) - 1)``."""
    w = np.asarray(omega, dtype=float)
    if not beta > 0:
        raise ValueError("beta must be positive")
    if np.any(w <= 0):
        raise ValueError("bose_einstein requires omega > 0")
    with np.errstate(over="ignore"):
        out = 1.0 / np.expm1(beta * w)
    return out[()] if out.ndim == 0 else out


def correlation_closed_form(r: ReservoirParams, t):
    """``C(t) = -eta pi^2 / (beta^2 sinh^2(pi |t| / beta))`` (cutoff -> infinity).

    Real, even in ``t`` and strictly negative; singular at ``t = 0``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t == 0):
        raise ValueError("C(t) diverges at t = 0")
    x = np.pi * np.abs(t) / r.beta
    with np.errstate(over="ignore"):
        out = -r.eta * np.pi**2 / (r.beta**2 * np.sinh(x) ** 2)
    return out[()] if out.ndim == 0 else out


def correlation_quadrature(r: ReservoirParams, t: float, cutoff: float | None = None,
                           complex_result: bool = False, rtol: float = 1e-12,
                           limit: int = 20000):
    """Numerical ``C(t)`` from its frequency integral with an exponential cutoff.

    The thermal piece ``2 eta w exp(-w/L) n_B(w) cos(w t)`` is integrated on
    ``[0, 80/beta]`` and the vacuum piece ``eta w exp(-w/L) exp(-i w t)``,
    in the scaled variable ``u = w / L``, on ``[0, 60]``; both use QUADPACK's
    oscillatory (QAWO) rule and the neglected tails are below ``exp(-60)``
    of the integrand scale.

    Parameters
    ----------
    r : ReservoirParams
    t : float
        Nonzero time.
    cutoff : float, optional
        Overrides ``r.cutoff``.
    complex_result : bool
        Return ``Re + i Im`` instead of the real part only.

    Raises
    ------
    QuadratureError
        If QUADPACK reports non-convergence.
    """
    t = float(t)
    if t == 0:
        raise ValueError("C(t) diverges at t = 0")
    lam = _cutoff(r, cutoff)
    if r.eta == 0:
        return 0j if complex_result else 0.0
    beta, eta = r.beta, r.eta
    at = abs(t)
    # absolute floor relative to the size of either piece (~ eta / t^2)
    epsabs = rtol * eta / at**2

    def thermal(w):
        if w == 0.0:
            return 2 * eta / beta
        return 2 * eta * w * np.exp(-w / lam) / np.expm1(beta * w)

    def vacuum(u):
        return u * np.exp(-u)

    # the vacuum integrand is ~eta L^2 while its integral is ~eta / t^2, so it
    # is integrated in u = w / L with the absolute floor mapped accordingly
    scale = eta * lam**2
    re = (_oscillatory_quad(thermal, 80.0 / beta, "cos", at, epsabs, rtol, limit)
          + scale * _oscillatory_quad(vacuum, 60.0, "cos", lam * at, epsabs / scale, rtol, limit))
    if not complex_result:
        return re
    im = -np.sign(t) * scale * _oscillatory_quad(vacuum, 60.0, "sin", lam * at, epsabs / scale,
                                                        rtol, limit)
    return complex(re, im)


def _oscillatory_quad(f, upper, weight, wvar, epsabs, epsrel, limit, slack=1e3):
    # QUADPACK flags roundoff once the requested tolerance is at machine level;
    # accept that case while its own error estimate stays within `slack`.
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        val, err = integrate.quad(f, 0.0, upper, weight=weight, wvar=wvar,
                                  epsabs=epsabs, epsrel=epsrel, limit=limit)
    if caught and err > slack * max(epsabs, epsrel * abs(val)):
        raise QuadratureError(f"oscillatory quadrature did not converge "
                              f"(error estimate {err:.3g}): {caught[0].message}")
    return float(val)


def correlation_cutoff_series(r: ReservoirParams, t: float, cutoff: float | None = None,
                              dps: int = 30) -> complex:
    """Exact ``C(t)`` at finite cutoff via the Bose-series resummation.

    ``J_L(w) n_B(w) = eta w sum_k exp(-(k beta + 1/L) w)`` integrates term by
    term, and the sum is a trigamma function::

        C_L(t) = eta / (1/L + i t)^2 + (2 eta / beta^2) Re psi_1(1 + (1/L + i t)/beta)

    Finite at ``t = 0``.  Evaluated with mpmath at ``dps`` digits.
    """
    lam = _cutoff(r, cutoff)
    with mpmath.workdps(dps):
        return complex(_cutoff_series_mp(r.eta, r.beta, lam, mpmath.mpf(t)))


def _cutoff_series_mp(eta, beta, lam, t):
    eta, beta, lam = mpmath.mpf(eta), mpmath.mpf(beta), mpmath.mpf(lam)
    z = 1 / lam + 1j * t
    vac = eta / z**2
    thermal = 2 * eta / beta**2 * mpmath.re(mpmath.psi(1, 1 + z / beta))
    return vac + thermal


def correlation_limit_quadrature(r: ReservoirParams, t: float, dps: int = 40) -> float:
    """``C(t)`` in the infinite-cutoff limit, by quadrature.

    The thermal part ``2 int dw eta w n_B(w) cos(w t)`` converges without a
    cutoff and is integrated numerically at ``dps`` digits; the vacuum part
    tends to ``-eta / t^2``.  Working precision is high because the two
    pieces cancel to many digits once ``t`` exceeds a few ``beta``.
    """
    t = abs(float(t))
    if t == 0:
        raise ValueError("C(t) diverges at t = 0")
    with mpmath.workdps(dps):
        eta, beta, tt = mpmath.mpf(r.eta), mpmath.mpf(r.beta), mpmath.mpf(t)
        f = lambda w: 2 * eta * w * mpmath.cos(w * tt) / mpmath.expm1(beta * w)
        period = 2 * mpmath.pi / tt
        span = 120 / beta
        n_seg = int(mpmath.ceil(span / period)) + 1
        pts = [mpmath.mpf(0)] + [min(k * period, span) for k in range(1, n_seg + 1)]
        pts = sorted(set(pts)) + [mpmath.inf]
        thermal = mpmath.quad(f, pts)
        return float(thermal - eta / tt**2)


def spectral_correlation(r: ReservoirParams, omega, with_cutoff: bool = False):
    """``C~(w) = J(|w|) [n_B(|w|) + theta(w)]`` with ``C~(0) = eta / beta``."""
    w = np.asarray(omega, dtype=float)
    aw = np.abs(w)
    out = np.empty_like(aw)
    zero = aw == 0
    nz = ~zero
    # J(|w|) n_B(|w|) written as eta |w| / expm1(beta |w|) for small |w|
    with np.errstate(over="ignore"):
        occ = r.eta * aw[nz] / np.expm1(r.beta * aw[nz])
    out[nz] = occ + np.where(w[nz] > 0, r.eta * aw[nz], 0.0)
    out[zero] = r.eta / r.beta
    if with_cutoff:
        out = out * np.exp(-aw / _cutoff(r, None))
    return out[()] if out.ndim == 0 else out


def gamma_from_reservoir(r: ReservoirParams) -> float:
    """Dephasing parameter ``gamma = 16 eta / beta``."""
    return 16.0 * r.eta / r.beta


def excitation_rate(r: ReservoirParams, omega_c: float, with_cutoff: bool = False) -> float:
    """Leakage rate out of the low-energy sector, ``2 C~(-omega_c)``."""
    if not omega_c > 0:
        raise ValueError("omega_c must be positive")
    return float(2.0 * spectral_correlation(r, -omega_c, with_cutoff=with_cutoff))


def dephasing_rate(p: ModelParams, mu, nu):
    """``gamma lam^2 (mu - nu)^2 / (N omega_c^2)``."""
    for m in np.atleast_1d(mu):
        mu_index(p.n_atoms, m)
    for m in np.atleast_1d(nu):
        mu_index(p.n_atoms, m)
    d = np.asarray(mu, dtype=float) - np.asarray(nu, dtype=float)
    out = p.gamma * p.lam**2 * d**2 / (p.n_atoms * p.omega_c**2)
    return float(out) if np.ndim(out) == 0 else out


def principal_value_integral(r: ReservoirParams, cutoff: float | None = None,
                             eps: float | None = None, levels: int = 4,
                             rtol: float = 1e-9) -> float:
    """``PV int dw C~_L(w) / w`` over the real line.

    Symmetric exclusion of ``(-eps, eps)``, i.e. ``F(eps) = int_eps^inf
    [C~(w) - C~(-w)] / w dw``, followed by Richardson extrapolation of
    ``F(eps / 2^k)`` to ``eps -> 0`` (``F`` is analytic in ``eps``).
    """
    lam = _cutoff(r, cutoff)
    if r.eta == 0:
        return 0.0
    if eps is None:
        eps = 1e-2 * min(1.0 / r.beta, lam)

    sub = ReservoirParams(r.eta, r.beta, lam)

    def g(w):
        return (spectral_correlation(sub, w, True) - spectral_correlation(sub, -w, True)) / w

    def f_eps(e):
        total, err = 0.0, 0.0
        edges = [e, lam, 10 * lam, np.inf]
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            for a, b in zip(edges[:-1], edges[1:]):
                try:
                    v, ev = integrate.quad(g, a, b, epsabs=0.0, epsrel=1e-13, limit=400)
                except integrate.IntegrationWarning as exc:
                    raise QuadratureError(f"PV quadrature did not converge: {exc}") from exc
                total += v
                err += ev
        if err > rtol * abs(total):
            raise QuadratureError(f"PV quadrature error {err:.3g} exceeds tolerance")
        return total

    # Richardson table with step ratio 2 and error expansion in powers of eps
    table = [[f_eps(eps / 2**k)] for k in range(levels)]
    for k in range(1, levels):
        for m in range(1, k + 1):
            table[k].append(table[k][m - 1] + (table[k][m - 1] - table[k - 1][m - 1]) / (2**m - 1))
    best, prev = table[-1][-1], table[-2][-1]
    if abs(best - prev) > 1e-6 * abs(best):
        raise QuadratureError("Richardson extrapolation of the PV integral did not settle")
    return float(best)


def lamb_shift_diagnostic(r: ReservoirParams, cutoff: float | None = None, **kw) -> float:
    """Cavity frequency shift ``4 PV int dw C~(w) / w`` at a finite cutoff.

    Grows linearly with the cutoff for an ohmic bath.  Diagnostic only:
    ``omega_c`` elsewhere is taken as already shifted.
    """
    return 4.0 * principal_value_integral(r, cutoff=cutoff, **kw)
