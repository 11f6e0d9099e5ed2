import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dickeqme import FitError, FitPolicy, fit_exponential, g1, steady_photon_number, tau_c_sweep
from dickeqme.correlation import select_window
from dickeqme.model import a_subspace


def test_photon_number(p_default):
    assert steady_photon_number(p_default) == pytest.approx(3.75e-3, rel=1e-14)
    # independent route: mean of alpha_mu^2 over the maximally mixed state
    assert steady_photon_number(p_default) == pytest.approx(
        np.mean(np.diag(a_subspace(p_default)) ** 2), rel=1e-14)
    with pytest.raises(ValueError):
        steady_photon_number(p_default.replace(lam=0.0))
    with pytest.raises(ValueError):
        g1(p_default.replace(lam=0.0))


def test_g1_normalization_and_reality(p_default):
    t = np.linspace(0, 10, 201)
    g = g1(p_default, t_grid=t)
    assert g[0] == 1.0
    assert np.max(np.abs(g.imag)) < 1e-10
    assert np.max(np.abs(g)) <= 1 + 1e-8


def test_g1_numerator_equals_photon_number(p_default):
    from dickeqme.liouvillian import build, steady_state
    a = a_subspace(p_default)
    rho = steady_state(build(p_default))
    assert np.trace(a @ a @ rho).real == pytest.approx(steady_photon_number(p_default), rel=1e-13)


def test_g1_methods_agree(p_default):
    t = np.linspace(0, 10, 101)
    np.testing.assert_allclose(g1(p_default, t_grid=t, method="rk45"),
                               g1(p_default, t_grid=t, method="expm"), atol=1e-8)
    with pytest.raises(ValueError):
        g1(p_default, t_grid=np.linspace(1, 2, 5))


def test_fit_exact_examples():
    t = np.linspace(0, 20, 401)
    fit = fit_exponential(t, np.exp(-t / 5), FitPolicy(window=(0.0, 20.0)))
    assert fit.tau_c == pytest.approx(5.0, rel=1e-10)
    assert fit.residual < 1e-12
    fit = fit_exponential(t, 0.8 * np.exp(-t / 3), FitPolicy(window=(0.0, 20.0), floor=0.0))
    assert fit.amplitude == pytest.approx(0.8, rel=1e-10)
    assert fit.tau_c == pytest.approx(3.0, rel=1e-10)


@settings(max_examples=50)
@given(st.floats(min_value=0.05, max_value=5.0), st.floats(min_value=0.5, max_value=500.0))
def test_fit_recovers_synthetic_exponentials(c, tau):
    t = np.linspace(0, 50, 501)
    fit = fit_exponential(t, c * np.exp(-t / tau), FitPolicy(window=(0.0, 50.0)))
    assert fit.amplitude == pytest.approx(c, rel=1e-10)
    assert fit.tau_c == pytest.approx(tau, rel=1e-10)


def test_fit_errors():
    t = np.linspace(0, 10, 101)
    with pytest.raises(FitError):
        fit_exponential(t, -np.exp(-t))
    with pytest.raises(FitError):
        fit_exponential(t, np.exp(t / 5), FitPolicy(window=(0.0, 10.0)))
    with pytest.raises(FitError):
        fit_exponential(t, np.exp(-t), FitPolicy(window=(1.0, 1.2)))
    with pytest.raises(FitError):
        fit_exponential(t, np.exp(-t), FitPolicy(window=(2.0, 1.0)))


def test_default_window_starts_at_first_peak_and_stops_at_floor():
    t = np.linspace(0, 50, 2001)
    y = np.exp(-t / 10) * (0.8 + 0.2 * np.cos(2 * t))
    lo, hi = select_window(t, y, FitPolicy())
    assert 1.0 < t[lo] < np.pi and y[lo - 1] <= y[lo] >= y[lo + 1]
    assert y[hi - 1] >= 0.02 and (hi == t.size or y[hi] < 0.02)


def test_coherence_time_orders(p_default):
    t = np.linspace(0, 50, 2000)
    table = tau_c_sweep(p_default, [30.0], [100.0, 400.0], [16], t_grid=t)
    assert table.tau(16, 100.0)[0] > table.tau(16, 400.0)[0]
    text = table.to_csv(header_lines=["x=1"])
    assert text.splitlines()[1] == "N,gamma,lambda,tau_c,C,residual,R2"
