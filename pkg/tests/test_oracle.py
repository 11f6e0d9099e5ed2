import json

import numpy as np
import pytest

from dickeqme import (FockTruncation, ModelParams, ReservoirParams, TruncationError,
                      dissipator_numeric_oracle, dressed_subspace_check, full_dicke_hamiltonian)
from dickeqme.model import j3_in_j1_basis
from dickeqme.oracle import displaced_vacuum, dressed_vacua
from dickeqme.reservoir import excitation_rate


def test_truncation_bounds():
    with pytest.raises(ValueError):
        FockTruncation(n_max=5)
    p = ModelParams(n_atoms=4, omega_c=20.0, lam=20.0)
    with pytest.raises(TruncationError):
        dressed_vacua(p, FockTruncation(n_max=10))


def test_displaced_vacuum_is_coherent_state():
    v = displaced_vacuum(0.3, 30)
    from scipy.stats import poisson
    np.testing.assert_allclose(v**2, poisson.pmf(np.arange(31), 0.09), atol=1e-14)
    assert np.all(v > 0)


def test_full_hamiltonian_decouples_at_zero_coupling():
    p = ModelParams(n_atoms=4, omega_c=400.0, lam=0.0)
    trunc = FockTruncation(n_max=12)
    h = full_dicke_hamiltonian(p, trunc)
    assert np.allclose(h, h.T)
    assert np.linalg.eigvalsh(h)[0] == pytest.approx(-2.0, abs=1e-12)
    # the spin factor is written in the J1 eigenbasis
    expected = np.kron(j3_in_j1_basis(4), np.eye(13)) + np.kron(np.eye(5), np.diag(400.0 * np.arange(13)))
    np.testing.assert_allclose(h, expected, atol=1e-12)


def test_subspace_at_zero_coupling_is_pure_hopping():
    p = ModelParams(n_atoms=4, omega_c=400.0, lam=0.0)
    rep = dressed_subspace_check(p)
    assert rep.ok
    assert rep["projected_hd_vs_collective_spin_h1"].value < 1e-12


def test_subspace_report(subspace_report):
    rep = subspace_report
    for name in ("gram_minus_identity", "projected_hd_vs_h1", "j3_rotation_vs_closed_form",
                 "h0_levels_n_omega_c_degenerate"):
        assert rep[name].value < 1e-10, name
    # the collective-spin form differs at second order in the displacement
    c = rep["projected_hd_vs_collective_spin_h1"]
    assert 1e-6 < c.value < c.bound
    assert json.loads(rep.to_json())["name"] == "dressed_subspace"


@pytest.mark.slow
def test_dissipator_structure(dissipator_report):
    rep = dissipator_report
    for name in ("nonsecular_terms_vanish", "gamma_ex_uniform_over_mu",
                 "gamma_de_zero_on_diagonal", "gamma_de_quadratic_scaling", "sigma_rel_err"):
        assert rep[name].passed, (name, rep[name].value)


@pytest.mark.slow
def test_dissipator_rates_are_pi_times_closed_forms(dissipator_report):
    # the time integral of the reservoir correlation carries a factor pi that
    # the closed-form rates omit; both rates show exactly that ratio
    assert dissipator_report.data["gamma_ex_ratio"] == pytest.approx(np.pi, rel=1e-8)
    assert dissipator_report.data["gamma_de_ratio"] == pytest.approx(np.pi, rel=1e-8)


@pytest.mark.slow
def test_dissipator_zero_coupling_keeps_only_excitation_term():
    p = ModelParams(n_atoms=2, omega_c=400.0, lam=0.0)
    r = ReservoirParams(0.125, 0.02)
    rep = dissipator_numeric_oracle(p, r)
    kappa = np.array(rep.data["kappa_real"]) + 1j * np.array(rep.data["kappa_imag"])
    g_ex = rep.data["gamma_ex_measured"]
    assert g_ex > 0
    np.testing.assert_allclose(kappa, g_ex * np.ones_like(kappa), rtol=1e-10, atol=1e-14)
    assert rep.data["gamma_ex_closed_form"] == pytest.approx(
        excitation_rate(ReservoirParams(0.125, 0.02, rep.data["cutoff"]), 400.0,
                        with_cutoff=True))
