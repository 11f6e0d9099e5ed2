"""
Brute-force validators for the dressed-subspace construction and for the
dissipator rates.

Nothing here reuses the closed-form machinery it checks: the collective spin
basis comes from diagonalizing ``J1`` numerically, displaced vacua from a
truncated-Fock matrix exponential, and the Markov rates from a direct
time-domain integral of the bath correlation function.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.linalg import eigh, expm
from scipy.stats import poisson

from .model import ModelParams, alphas, build_h1, j3_in_j1_basis
from .reservoir import (ReservoirParams, _cutoff_series_mp, excitation_rate,
                        gamma_from_reservoir, principal_value_integral)

MAX_FULL_DIM = 4000


class TruncationError(ValueError):
    """The Fock cutoff cannot represent the displaced vacua accurately."""


@dataclass(frozen=True)
class FockTruncation:
    n_max: int = 40

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 10:
            raise ValueError("n_max must be an integer >= 10")


@dataclass
class Check:
    name: str
    value: float
    bound: float
    passed: bool
    note: str = ""


@dataclass
class OracleReport:
    name: str
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def add(self, name, value, bound, note="", passed=None):
        value = float(value)
        if passed is None:
            passed = value <= bound
        self.checks.append(Check(name, value, float(bound), bool(passed), note))

    def __getitem__(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> str:
        return json.dumps({
            "name": self.name,
            "ok": self.ok,
            "checks": [c.__dict__ for c in self.checks],
            "data": self.data,
        }, indent=2, sort_keys=True, default=float)

    def summary(self) -> str:
        lines = [f"{self.name}:"]
        for c in self.checks:
            flag = "pass" if c.passed else "FAIL"
            lines.append(f"  {c.name:<34s} {c.value:12.4g}  (bound {c.bound:.3g})  {flag}")
        return "\n".join(lines)


# --- collective spin and Fock helpers ---------------------------------------

def spin_matrices(n_atoms: int):
    """``J1, J2, J3`` in the ``J3`` eigenbasis, labels ``m = -J, ..., J``."""
    j = n_atoms / 2
    m = np.arange(-j, j + 1.0)
    up = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    jp = np.diag(up, -1)  # <m+1|J+|m>
    jm = jp.T
    return (jp + jm) / 2, (jp - jm) / 2j, np.diag(m)


def j1_eigenbasis(n_atoms: int) -> np.ndarray:
    """Real orthogonal ``U`` whose columns are ``J1`` eigenvectors (ascending).

    Column signs are fixed so that ``U.T @ J3 @ U`` has positive entries
    just above the diagonal.
    """
    j1, _, j3 = spin_matrices(n_atoms)
    _, u = eigh(j1)
    u = np.real(u)
    for k in range(n_atoms):
        if (u[:, k] @ j3 @ u[:, k + 1]) < 0:
            u[:, k + 1] = -u[:, k + 1]
    return u


def _ladder(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1.0, n_max + 1)), 1)


def full_dicke_hamiltonian(p: ModelParams, trunc: FockTruncation = FockTruncation()) -> np.ndarray:
    """``omega_a J3 + omega_c a^dag a + (lam / sqrt N)(a + a^dag)(J+ + J-)``.

    Basis: ``J1`` eigenbasis (ascending, phase convention of
    :func:`j1_eigenbasis`) tensor truncated Fock states; spin index is the
    slow one.
    """
    n_f = trunc.n_max + 1
    dim = p.dim * n_f
    if dim > MAX_FULL_DIM:
        raise ValueError(f"full Hilbert-space dimension {dim} exceeds {MAX_FULL_DIM}")
    u = j1_eigenbasis(p.n_atoms)
    j1, _, j3 = spin_matrices(p.n_atoms)
    j1r, j3r = u.T @ j1 @ u, u.T @ j3 @ u
    a = _ladder(trunc.n_max)
    num = a.T @ a
    eye_s, eye_f = np.eye(p.dim), np.eye(n_f)
    h = (p.omega_a * np.kron(j3r, eye_f)
         + p.omega_c * np.kron(eye_s, num)
         + p.lam / np.sqrt(p.n_atoms) * np.kron(2 * j1r, a + a.T))
    return 0.5 * (h + h.T)


def displaced_vacuum(alpha_mu: float, n_max: int) -> np.ndarray:
    a = _ladder(n_max)
    vac = np.zeros(n_max + 1)
    vac[0] = 1.0
    return expm(alpha_mu * a.T - np.conj(alpha_mu) * a) @ vac


def _check_truncation(p: ModelParams, n_max: int, tol: float = 1e-10):
    # probability weight of the exact coherent state beyond n_max
    deficit = float(np.max(poisson.sf(n_max, alphas(p) ** 2)))
    if deficit > tol:
        raise TruncationError(f"displaced vacuum weight beyond n_max={n_max} is {deficit:.3g}")
    return deficit


def dressed_vacua(p: ModelParams, trunc: FockTruncation = FockTruncation()) -> np.ndarray:
    """Columns ``|mu> (x) D_mu |0>`` in the basis of :func:`full_dicke_hamiltonian`."""
    _check_truncation(p, trunc.n_max)
    n_f = trunc.n_max + 1
    phi = np.zeros((p.dim * n_f, p.dim))
    for i, a_mu in enumerate(alphas(p)):
        phi[i * n_f:(i + 1) * n_f, i] = displaced_vacuum(a_mu, trunc.n_max)
    return phi


def dressed_subspace_check(p: ModelParams, trunc: FockTruncation = FockTruncation(),
                           tol: float = 1e-10, n_levels: int = 3) -> OracleReport:
    """Project the full Hamiltonian onto the displaced vacua and compare.

    Checks: orthonormality of the vacua; projected Hamiltonian (minus the
    constant part of its diagonal) against ``build_h1(p, dressed_overlap=True)``;
    the collective-spin form ``build_h1(p)`` against the perturbative scale
    ``(sqrt(N) lam / omega_c) max|H1|``; the spin rotation against
    :func:`dickeqme.model.j3_in_j1_basis`; and the ``(2J+1)``-fold degeneracy
    of the lowest displaced-oscillator levels ``n omega_c``.
    """
    rep = OracleReport("dressed_subspace")
    deficit = _check_truncation(p, trunc.n_max)
    rep.data["truncation_deficit"] = deficit

    u = j1_eigenbasis(p.n_atoms)
    _, _, j3 = spin_matrices(p.n_atoms)
    rep.add("j3_rotation_vs_closed_form",
            np.max(np.abs(u.T @ j3 @ u - j3_in_j1_basis(p.n_atoms))), tol)

    phi = dressed_vacua(p, trunc)
    gram = phi.T @ phi
    rep.add("gram_minus_identity", np.max(np.abs(gram - np.eye(p.dim))), tol)

    hd = full_dicke_hamiltonian(p, trunc)
    proj = phi.T @ hd @ phi
    h_exact = build_h1(p, dressed_overlap=True)
    e0 = float(np.mean(np.diag(proj - h_exact)))
    rep.data["constant_shift"] = e0
    rep.add("projected_hd_vs_h1", np.max(np.abs(proj - e0 * np.eye(p.dim) - h_exact)), tol)

    h_lmg = build_h1(p)
    scale = np.sqrt(p.n_atoms) * p.lam / p.omega_c * np.max(np.abs(h_lmg))
    rep.add("projected_hd_vs_collective_spin_h1",
            np.max(np.abs(proj - e0 * np.eye(p.dim) - h_lmg)), max(scale, tol),
            note="overlap factors of the displaced vacua are second order")

    # H0 restricted to each spin sector: omega_c (a^dag - alpha)(a - alpha)
    a = _ladder(trunc.n_max)
    worst = 0.0
    for a_mu in alphas(p):
        b = a - a_mu * np.eye(trunc.n_max + 1)
        ev = np.linalg.eigvalsh(p.omega_c * b.T @ b)[:n_levels]
        worst = max(worst, np.max(np.abs(ev - p.omega_c * np.arange(n_levels))))
    rep.add("h0_levels_n_omega_c_degenerate", worst / p.omega_c, tol)
    return rep


# --- dissipator ---------------------------------------------------------------

def _sector_moments(alpha_mu: float, n_max: int):
    """First and second moments of the cavity part of ``S(t)`` in one spin sector.

    ``S(t) = sum_k O_k exp(-i k omega_c t)`` with ``O_1 = a - alpha``,
    ``O_-1 = O_1^dag`` and ``O_0 = (alpha + alpha^*) 1``.  Returns dicts keyed
    by ``k`` and ``(k, l)`` holding ``<O_k>`` and ``<O_k O_l>`` on ``D|0>``.
    """
    a = _ladder(n_max)
    eye = np.eye(n_max + 1)
    x = a - alpha_mu * eye
    ops = {1: x, -1: x.conj().T, 0: (alpha_mu + np.conj(alpha_mu)) * eye}
    v = displaced_vacuum(alpha_mu, n_max)
    m1 = {k: complex(v.conj() @ o @ v) for k, o in ops.items()}
    m2 = {(k, l): complex(v.conj() @ ops[k] @ ops[l] @ v) for k in ops for l in ops}
    return m1, m2


def _markov_integral(r: ReservoirParams, cutoff: float, freq: float, s_max: float,
                     dps: int) -> tuple[complex, complex]:
    """``int_0^inf ds exp(i freq s) C_L(s)`` split as (head on [0, s_max], tail)."""
    with mpmath.workdps(dps):
        w = mpmath.mpf(freq)
        f = lambda s: mpmath.exp(1j * w * s) * _cutoff_series_mp(r.eta, r.beta, cutoff, s)
        inv = 1 / mpmath.mpf(cutoff)
        b = mpmath.mpf(r.beta)
        pts = {mpmath.mpf(0), mpmath.mpf(s_max)}
        pts |= {k * inv for k in (1, 4, 16, 64, 256)}
        pts |= {k * b for k in (0.25, 1, 3, 10, 30)}
        if freq != 0:
            period = 2 * mpmath.pi / abs(w)
            pts |= {k * period for k in range(1, int(s_max / period) + 1)}
        pts = sorted(x for x in pts if x <= s_max)
        head = mpmath.quad(f, pts)
        if freq == 0:
            tail = mpmath.quad(f, [s_max, mpmath.inf])
        else:
            tail = mpmath.quadosc(f, [s_max, mpmath.inf], omega=abs(w))
        return complex(head), complex(tail)


def dissipator_numeric_oracle(p: ModelParams, r: ReservoirParams, s_max: float | None = None,
                              cutoff: float | None = None, n_max: int = 12, dps: int = 20,
                              rtol: float = 1e-6, tail_tol: float = 1e-2) -> OracleReport:
    """Dissipator matrix elements from the Born-Markov integral, done numerically.

    For ``rho = |phi_mu><phi_nu|`` the reservoir term of the Born equation is
    ``-kappa_{mu nu} rho`` with ::

        kappa = int_0^inf ds { [<S(t)S(t-s)>_mu - <S(t-s)>_mu <S(t)>_nu] C(s)
                             + [<S(t-s)S(t)>_nu - <S(t)>_mu <S(t-s)>_nu] C(s)^* }

    The sector moments of ``S(t)`` come from the truncated-Fock
    representation of ``a(t) = (a - alpha_mu) e^{-i omega_c t} + alpha_mu``;
    ``C(s)`` is the exact finite-cutoff correlation function; the
    ``s``-integrals are done with mpmath quadrature out to ``s_max`` plus an
    oscillatory tail to infinity.  The extracted ``Re kappa`` are compared
    with :func:`~dickeqme.reservoir.excitation_rate` (cutoff matched) and
    with ``gamma_from_reservoir(r) lam^2 (mu-nu)^2 / (N omega_c^2)``; the
    ``Im kappa`` with the principal-value level shift at the same cutoff.

    Parameters
    ----------
    p, r : ModelParams, ReservoirParams
        ``p.gamma`` is ignored; the bath sets the rates.
    s_max : float, optional
        End of the main integration range (default ``60 beta``).
    cutoff : float, optional
        Bath cutoff (default ``r.cutoff`` or ``100 / beta``).

    Raises
    ------
    RuntimeError
        If the tail beyond ``s_max`` exceeds ``tail_tol`` of an integral.
    """
    lam_c = cutoff if cutoff is not None else (r.cutoff if r.cutoff is not None else 100.0 / r.beta)
    s_max = 60.0 * r.beta if s_max is None else float(s_max)
    if s_max <= 10 * r.beta / (2 * np.pi):
        raise RuntimeError("s_max must be much larger than the bath time beta / 2pi")
    rb = ReservoirParams(r.eta, r.beta, lam_c)
    al = alphas(p)
    moments = [_sector_moments(a_mu, n_max) for a_mu in al]

    # coefficients per (secular frequency, s-frequency, conjugated?) for each (mu, nu)
    n = p.dim
    coeffs = {}
    for i in range(n):
        m1_mu, m2_mu = moments[i]
        for j in range(n):
            m1_nu, m2_nu = moments[j]
            c = {}
            for k in (1, 0, -1):
                for l in (1, 0, -1):
                    # exp(-i omega_c (k t + l (t - s))) C(s)
                    val = m2_mu[(k, l)] - m1_mu[l] * m1_nu[k]
                    key = (k + l, l, False)
                    c[key] = c.get(key, 0) + val
                    # exp(-i omega_c (k (t - s) + l t)) C(s)^*
                    val = m2_nu[(k, l)] - m1_mu[l] * m1_nu[k]
                    key = (k + l, k, True)
                    c[key] = c.get(key, 0) + val
            coeffs[(i, j)] = c

    nonsecular = max(abs(v) for c in coeffs.values() for key, v in c.items() if key[0] != 0)
    needed = sorted({key[1] * (-1 if key[2] else 1) for c in coeffs.values()
                     for key, v in c.items() if key[0] == 0 and abs(v) > 1e-14})
    # exp(+i l omega_c s) C(s)        -> K(l omega_c)
    # exp(+i k omega_c s) C(s)^*      -> conj K(-k omega_c)
    kint, tails = {}, {}
    for l in needed:
        head, tail = _markov_integral(rb, lam_c, l * p.omega_c, s_max, dps)
        total = head + tail
        tails[l] = abs(tail) / max(abs(total), 1e-300)
        if tails[l] > tail_tol:
            raise RuntimeError(f"s_max too small: tail fraction {tails[l]:.3g} at frequency {l}")
        kint[l] = total

    kappa = np.zeros((n, n), dtype=complex)
    for (i, j), c in coeffs.items():
        tot = 0j
        for (sec, sf, conj), v in c.items():
            if sec != 0 or abs(v) <= 1e-14:
                continue
            tot += v * (np.conj(kint[-sf]) if conj else kint[sf])
        kappa[i, j] = tot

    rep = OracleReport("dissipator")
    mu = p.mu
    g_ex_meas = float(np.mean(np.real(np.diag(kappa))))
    g_ex_cf = excitation_rate(rb, p.omega_c, with_cutoff=True)
    rep.data.update(cutoff=lam_c, s_max=s_max, kappa_real=kappa.real.tolist(),
                    kappa_imag=kappa.imag.tolist(), tail_fractions=tails,
                    gamma_ex_measured=g_ex_meas, gamma_ex_closed_form=g_ex_cf)
    rep.add("nonsecular_terms_vanish", nonsecular, 1e-12)
    rep.add("gamma_ex_uniform_over_mu", np.ptp(np.real(np.diag(kappa))) / max(abs(g_ex_meas), 1e-300), 1e-10)
    rep.add("gamma_ex_rel_err", _rel(g_ex_meas, g_ex_cf), rtol)
    rep.data["gamma_ex_ratio"] = g_ex_meas / g_ex_cf if g_ex_cf else float("nan")

    d2 = (mu[:, None] - mu[None, :]) ** 2
    g_de_meas = np.real(kappa) - g_ex_meas
    g_de_cf = gamma_from_reservoir(r) * p.lam**2 * d2 / (p.n_atoms * p.omega_c**2)
    off = d2 > 0
    rel = [_rel(a, b) for a, b in zip(g_de_meas[off], g_de_cf[off])]
    rep.add("gamma_de_rel_err", max(rel) if rel else 0.0, rtol)
    diag_abs = np.max(np.abs(g_de_meas[~off]))
    rep.add("gamma_de_zero_on_diagonal", diag_abs / max(abs(g_ex_meas), 1.0), 1e-10)
    if np.any(off) and p.lam > 0:
        per_unit = g_de_meas[off] / d2[off]
        spread = float(np.ptp(per_unit) / np.mean(np.abs(per_unit)))
        rep.data["gamma_de_ratio"] = float(np.mean(per_unit / (g_de_cf[off] / d2[off])))
    else:
        spread = float(np.max(np.abs(g_de_meas[off]))) if np.any(off) else 0.0
    rep.add("gamma_de_quadratic_scaling", spread, 1e-8)

    pv = principal_value_integral(rb, cutoff=lam_c)
    sigma_cf = -4.0 * (al[:, None] ** 2 - al[None, :] ** 2) * pv
    rep.data["principal_value"] = pv
    sig_scale = max(np.max(np.abs(sigma_cf)), 1e-300)
    rep.add("sigma_rel_err", np.max(np.abs(np.imag(kappa) - sigma_cf)) / sig_scale
            if p.lam > 0 else np.max(np.abs(np.imag(kappa))), rtol)
    return rep


def _rel(measured, expected):
    if expected == 0:
        return abs(measured)
    return abs(measured - expected) / abs(expected)
