"""
Markovian generator on the dressed subspace.

    (L rho)_{mu nu} = -i [H1, rho]_{mu nu}
                      - gamma lam^2 (mu - nu)^2 / (N omega_c^2) rho_{mu nu}
                      [- Gamma_ex rho_{mu nu}]            (optional leakage)

Vectorization is row-major throughout: ``vec(rho) = rho.ravel()``, so
``vec(A rho B) = kron(A, B.T) @ vec(rho)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, build_h1, parity_map

STACKING = "row-major"
MAX_SUPEROPERATOR_DIM = 10_000


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """Immutable generator; call :meth:`apply` or use :func:`superoperator_matrix`."""

    h1: np.ndarray
    dephasing_table: np.ndarray
    include_excitation_loss: bool = False
    excitation_rate: float = 0.0
    params: ModelParams | None = None

    def __post_init__(self):
        for arr in (self.h1, self.dephasing_table):
            arr.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.h1.shape[0]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Time derivative ``L(rho)``; matrix-free, ``O(dim^3)``."""
        rho = np.asarray(rho)
        if rho.shape != self.h1.shape:
            raise ValueError(f"rho has shape {rho.shape}, expected {self.h1.shape}")
        h = self.h1
        out = -1j * (h @ rho - rho @ h) - self.dephasing_table * rho
        if self.include_excitation_loss:
            out = out - self.excitation_rate * rho
        return out

    __call__ = apply


def dephasing_table(p: ModelParams) -> np.ndarray:
    mu = p.mu
    return p.gamma * p.lam**2 * (mu[:, None] - mu[None, :]) ** 2 / (p.n_atoms * p.omega_c**2)


def build(p: ModelParams, include_excitation_loss: bool = False,
          excitation_rate: float = 0.0, dressed_overlap: bool = False) -> Liouvillian:
    """Assemble the generator for ``p``.

    Parameters
    ----------
    p : ModelParams
    include_excitation_loss : bool
        Subtract ``excitation_rate`` uniformly from every element (trace
        leakage out of the low-energy sector).  Off by default.
    excitation_rate : float
        Leakage rate, e.g. from :func:`dickeqme.reservoir.excitation_rate`.
    dressed_overlap : bool
        Passed to :func:`dickeqme.model.build_h1`.
    """
    if include_excitation_loss and excitation_rate < 0:
        raise ValueError("excitation_rate must be non-negative")
    return Liouvillian(
        h1=build_h1(p, dressed_overlap=dressed_overlap),
        dephasing_table=dephasing_table(p),
        include_excitation_loss=include_excitation_loss,
        excitation_rate=float(excitation_rate) if include_excitation_loss else 0.0,
        params=p,
    )


def superoperator_matrix(L: Liouvillian) -> np.ndarray:
    """Dense ``dim^2 x dim^2`` matrix ``M`` with ``vec(L(rho)) = M @ vec(rho)``."""
    n = L.dim
    if n * n > MAX_SUPEROPERATOR_DIM:
        raise ValueError(f"superoperator dimension {n * n} exceeds {MAX_SUPEROPERATOR_DIM}")
    eye = np.eye(n)
    m = -1j * (np.kron(L.h1, eye) - np.kron(eye, L.h1.T))
    m -= np.diag(L.dephasing_table.ravel())
    if L.include_excitation_loss:
        m -= L.excitation_rate * np.eye(n * n)
    return m


def save_superoperator(L: Liouvillian, path) -> None:
    """Write the superoperator as ``.npz`` (binary) or ``.json`` (by suffix).

    Both formats record the stacking convention next to the matrix.
    """
    path = str(path)
    m = superoperator_matrix(L)
    meta = {"stacking": STACKING, "dim": L.dim,
            "include_excitation_loss": L.include_excitation_loss,
            "excitation_rate": L.excitation_rate}
    if path.endswith(".json"):
        payload = dict(meta, real=m.real.tolist(), imag=m.imag.tolist())
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh)
    else:
        np.savez(path, matrix=m, meta=json.dumps(meta))


def load_superoperator(path) -> tuple[np.ndarray, dict]:
    path = str(path)
    if path.endswith(".json"):
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        m = np.asarray(payload.pop("real")) + 1j * np.asarray(payload.pop("imag"))
        return m, payload
    with np.load(path) as data:
        return data["matrix"], json.loads(str(data["meta"]))


def steady_state(L: Liouvillian, tol: float = 1e-12) -> np.ndarray:
    """Maximally mixed state ``identity / (N+1)``, verified against ``L``.

    Raises
    ------
    ValueError
        If leakage is enabled (the trace then decays and there is no
        normalized stationary state).
    RuntimeError
        If ``max |L(rho_ss)| >= tol``.
    """
    if L.include_excitation_loss:
        raise ValueError("steady_state requires include_excitation_loss=False")
    rho = np.eye(L.dim, dtype=complex) / L.dim
    resid = np.max(np.abs(L.apply(rho)))
    if not resid < tol:
        raise RuntimeError(f"maximally mixed state is not stationary: residual {resid:.3g}")
    return rho


def kernel_dimension(L: Liouvillian, rtol: float = 1e-10) -> int:
    """Number of (numerically) zero singular values of the superoperator."""
    s = np.linalg.svd(superoperator_matrix(L), compute_uv=False)
    return int(np.sum(s <= rtol * max(s[0], 1.0)))


def parity_covariance_check(L: Liouvillian, n_samples: int = 5, tol: float = 1e-12,
                            seed: int = 0) -> bool:
    """True if ``L(P rho P) == P L(rho) P`` on random Hermitian ``rho``."""
    rng = np.random.default_rng(seed)
    perm = parity_map(L.dim - 1)
    ix = np.ix_(perm, perm)
    for _ in range(n_samples):
        x = rng.normal(size=(L.dim, L.dim)) + 1j * rng.normal(size=(L.dim, L.dim))
        rho = x + x.conj().T
        lhs = L.apply(rho[ix])
        rhs = L.apply(rho)[ix]
        scale = max(1.0, np.max(np.abs(rhs)))
        if np.max(np.abs(lhs - rhs)) > tol * scale:
            return False
    return True
