"""
Dressed low-energy subspace of the dispersive Dicke model.

Operators are represented as dense ``(N+1, N+1)`` numpy arrays indexed by the
dressed label ``mu = -J, ..., J`` through ``i = mu + J``.  The collective spin
basis is the eigenbasis of ``J1``; phases are fixed so that ``J3`` is real with
non-negative off-diagonal entries, which makes every model matrix real.

Frequencies are measured in units of the atomic splitting ``omega_a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_MUCH_LESS = 0.2


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the Dicke system and its dephasing strength.

    Parameters
    ----------
    n_atoms : int
        Number of two-level atoms ``N`` (``J = N/2``).
    omega_c : float
        Cavity frequency.
    lam : float
        Atom-cavity coupling ``lambda``.
    gamma : float
        Dephasing parameter ``gamma``.
    omega_a : float
        Atomic level splitting, 1 in internal units.
    """

    n_atoms: int
    omega_c: float
    lam: float
    gamma: float = 0.0
    omega_a: float = 1.0

    def __post_init__(self):
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 1:
            raise ValueError(f"n_atoms must be a positive integer, got {self.n_atoms!r}")
        object.__setattr__(self, "n_atoms", int(self.n_atoms))
        if not self.omega_a >= 0:
            raise ValueError("omega_a must be non-negative")
        if not self.omega_c > 0:
            raise ValueError("omega_c must be positive")
        if not self.lam >= 0:
            raise ValueError("lam must be non-negative")
        if not self.gamma >= 0:
            raise ValueError("gamma must be non-negative")

    @property
    def j(self) -> float:
        return self.n_atoms / 2

    @property
    def dim(self) -> int:
        return self.n_atoms + 1

    @property
    def mu(self) -> np.ndarray:
        """Dressed labels ``-J, ..., J`` in index order."""
        return dressed_labels(self.n_atoms)

    def replace(self, **changes) -> "ModelParams":
        fields = dict(n_atoms=self.n_atoms, omega_c=self.omega_c, lam=self.lam,
                      gamma=self.gamma, omega_a=self.omega_a)
        fields.update(changes)
        return ModelParams(**fields)


def dressed_labels(n_atoms: int) -> np.ndarray:
    if int(n_atoms) != n_atoms or n_atoms < 1:
        raise ValueError(f"n_atoms must be a positive integer, got {n_atoms!r}")
    j = n_atoms / 2
    return np.arange(-j, j + 1.0)


def mu_index(n_atoms: int, mu: float) -> int:
    """Array index of dressed label ``mu``; raises if ``mu`` is not a valid label."""
    j = n_atoms / 2
    idx = mu + j
    if abs(idx - round(idx)) > 1e-9 or not 0 <= round(idx) <= n_atoms:
        raise ValueError(f"mu={mu!r} is not in {{-{j}, ..., {j}}}")
    return int(round(idx))


def j3_in_j1_basis(n_atoms: int) -> np.ndarray:
    """Matrix of ``J3`` in the ``J1`` eigenbasis.

    Real symmetric tridiagonal with zero diagonal; the entry between ``mu``
    and ``mu + 1`` is ``sqrt(J(J+1) - mu(mu+1)) / 2``.
    """
    mu = dressed_labels(n_atoms)
    j = n_atoms / 2
    lower = mu[:-1]
    off = 0.5 * np.sqrt(j * (j + 1) - lower * (lower + 1))
    return np.diag(off, 1) + np.diag(off, -1)


def alpha(p: ModelParams, mu) -> np.ndarray | float:
    """Cavity displacement ``alpha_mu = -2 lam mu / (sqrt(N) omega_c)``."""
    mu_arr = np.asarray(mu, dtype=float)
    for m in np.atleast_1d(mu_arr):
        mu_index(p.n_atoms, m)
    out = -2.0 * p.lam * mu_arr / (np.sqrt(p.n_atoms) * p.omega_c)
    return float(out) if out.ndim == 0 else out


def alphas(p: ModelParams) -> np.ndarray:
    return -2.0 * p.lam * p.mu / (np.sqrt(p.n_atoms) * p.omega_c)


def build_h1(p: ModelParams, dressed_overlap: bool = False) -> np.ndarray:
    """Low-energy Hamiltonian ``-4 lam^2 J1^2 / (N omega_c) + omega_a J3``.

    Parameters
    ----------
    p : ModelParams
    dressed_overlap : bool
        If True, multiply each ``J3`` element by the overlap
        ``<0|D_mu^dag D_nu|0> = exp(-(alpha_mu - alpha_nu)^2 / 2)`` of the
        displaced vacua, giving the exact matrix ``<phi_mu|H1|phi_nu>``.
        The default is the collective-spin form, which drops this factor
        (a second-order correction in ``sqrt(N) lam / omega_c``).

    Returns
    -------
    ndarray
        Real symmetric ``(N+1, N+1)`` matrix.
    """
    mu = p.mu
    diag = -4.0 * p.lam**2 * mu**2 / (p.n_atoms * p.omega_c)
    hop = p.omega_a * j3_in_j1_basis(p.n_atoms)
    if dressed_overlap:
        a = alphas(p)
        hop = hop * np.exp(-0.5 * (a[:, None] - a[None, :]) ** 2)
    return np.diag(diag) + hop


def a_subspace(p: ModelParams) -> np.ndarray:
    """Cavity annihilation operator restricted to the displaced vacua: ``diag(alpha_mu)``."""
    return np.diag(alphas(p))


def parity_map(n_atoms: int) -> np.ndarray:
    """Index permutation implementing ``mu -> -mu``.

    ``rho[np.ix_(perm, perm)]`` is the parity-conjugated matrix.
    """
    return np.arange(dressed_labels(n_atoms).size)[::-1].copy()


def parity_conjugate(m: np.ndarray) -> np.ndarray:
    """``P m P`` acting on the last two axes (so stacks of matrices work too)."""
    m = np.asarray(m)
    perm = parity_map(m.shape[-1] - 1)
    return m[..., perm, :][..., perm]


@dataclass(frozen=True)
class RegimeReport:
    """Ratios that must be small for the dressed-subspace Markovian description.

    ``ratios`` maps a short name to its value; ``passed`` maps the same names
    to ``value <= threshold``.  Reservoir-dependent entries are absent when no
    inverse temperature was supplied.
    """

    ratios: dict
    passed: dict
    threshold: float
    tau_s: float
    tau_r: float | None = None
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    def to_dict(self) -> dict:
        return dict(ratios=dict(self.ratios), passed=dict(self.passed),
                    threshold=self.threshold, tau_s=self.tau_s, tau_r=self.tau_r,
                    ok=self.ok)

    def summary(self) -> str:
        lines = [f"regime check (threshold {self.threshold:g}):"]
        for name, value in self.ratios.items():
            flag = "ok" if self.passed[name] else "FAIL"
            lines.append(f"  {name:<28s} {value:12.6g}  {flag}")
        lines.append(f"  tau_S = {self.tau_s:.6g}")
        if self.tau_r is not None:
            lines.append(f"  tau_R = {self.tau_r:.6g}")
        return "\n".join(lines)


def validate_regime(p: ModelParams, r=None, threshold: float = DEFAULT_MUCH_LESS) -> RegimeReport:
    """Check the dispersive and Markov-window conditions; never raises on failure.

    Parameters
    ----------
    p : ModelParams
    r : ReservoirParams or float, optional
        Reservoir (or bare inverse temperature ``beta``) for the two
        temperature bounds.
    threshold : float
        Numerical meaning of "much less than".
    """
    n, wc, wa, lam = p.n_atoms, p.omega_c, p.omega_a, p.lam
    gap = max(n * lam**2 / wc, n * wa / 2)
    ratios = {
        "sqrtN_lam/omega_c": np.sqrt(n) * lam / wc,
        "N_omega_a/(2omega_c)": n * wa / (2 * wc),
    }
    tau_r = None
    if r is not None:
        beta = float(getattr(r, "beta", r))
        if not beta > 0:
            raise ValueError("beta must be positive")
        ratios["1/(beta_omega_c)"] = 1.0 / (beta * wc)
        ratios["beta_max_gap"] = beta * gap
        tau_r = beta / (2 * np.pi)
    ratios = {k: float(v) for k, v in ratios.items()}
    passed = {k: v <= threshold for k, v in ratios.items()}
    tau_s = min(wc / (n * lam**2) if lam > 0 else np.inf, 2 / (n * wa) if wa > 0 else np.inf)
    return RegimeReport(ratios=ratios, passed=passed, threshold=threshold,
                        tau_s=float(tau_s), tau_r=tau_r)
