import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dickeqme import (ModelParams, ReservoirParams, bose_einstein, correlation_closed_form,
                      correlation_quadrature, dephasing_rate, excitation_rate,
                      gamma_from_reservoir, lamb_shift_diagnostic, spectral_correlation,
                      spectral_density)
from dickeqme.reservoir import correlation_cutoff_series, correlation_limit_quadrature


def test_spectral_density():
    r = ReservoirParams(0.1, 1.0)
    assert spectral_density(r, 0.0) == 0.0
    assert spectral_density(r, 2.0) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        spectral_density(r, -1.0)


def test_bose_einstein():
    assert bose_einstein(1.0, np.log(2.0)) == pytest.approx(1.0, rel=1e-14)
    assert bose_einstein(1.0, 1.0) == pytest.approx(0.5819767068693265, rel=1e-14)
    assert bose_einstein(1.0, 800.0) == 0.0
    with pytest.raises(ValueError):
        bose_einstein(1.0, 0.0)


def test_closed_form_basics():
    r = ReservoirParams(0.1, 1.0)
    assert correlation_closed_form(ReservoirParams(0.0, 1.0), 1.0) == 0.0
    assert correlation_closed_form(r, 1.0) == pytest.approx(-0.1 * np.pi**2 / np.sinh(np.pi) ** 2)
    assert correlation_closed_form(r, 200.0) == pytest.approx(0.0, abs=1e-300)
    with pytest.raises(ValueError):
        correlation_closed_form(r, 0.0)


def test_closed_form_exponential_tail():
    r = ReservoirParams(0.1, 1.0)
    t = 3.0
    tail = r.eta * np.pi**2 * 4 / r.beta**2 * np.exp(-2 * np.pi * t / r.beta)
    assert abs(correlation_closed_form(r, t)) / tail == pytest.approx(1.0, rel=1e-2)


@pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 2.0, 3.0, 5.0])
def test_closed_form_equals_infinite_cutoff_limit(t):
    r = ReservoirParams(0.1, 1.0)
    assert correlation_limit_quadrature(r, t) == pytest.approx(
        correlation_closed_form(r, t), rel=1e-10)


@pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 2.0, 5.0, -1.0])
def test_quadrature_matches_exact_finite_cutoff(t):
    r = ReservoirParams(0.1, 1.0, cutoff=1e4)
    q = correlation_quadrature(r, t, complex_result=True)
    s = correlation_cutoff_series(r, t)
    assert abs(q.real - s.real) <= 1e-7 * abs(s.real)
    assert abs(q.imag - s.imag) <= 1e-7 * abs(s)


def test_finite_cutoff_offset_scales_inversely_with_cutoff():
    r = ReservoirParams(0.1, 1.0)
    cf = correlation_closed_form(r, 2.0)
    d = [correlation_cutoff_series(r, 2.0, cutoff=c).real - cf for c in (1e3, 1e4, 1e5)]
    assert d[0] / d[1] == pytest.approx(10.0, rel=1e-3)
    assert d[1] / d[2] == pytest.approx(10.0, rel=1e-4)


def test_quadrature_requires_cutoff():
    with pytest.raises(ValueError):
        correlation_quadrature(ReservoirParams(0.1, 1.0), 1.0)
    assert correlation_quadrature(ReservoirParams(0.0, 1.0, 1e4), 1.0) == 0.0


def test_spectral_correlation_values():
    r = ReservoirParams(0.125, 0.02)
    assert spectral_correlation(r, 0.0) == pytest.approx(0.125 / 0.02)
    assert spectral_correlation(r, -400.0) == pytest.approx(
        0.125 * 400 * bose_einstein(0.02, 400.0), rel=1e-14)
    assert spectral_correlation(r, 1e4) == pytest.approx(0.125 * 1e4, rel=1e-12)


@given(st.floats(min_value=1e-3, max_value=30.0), st.floats(min_value=0.05, max_value=10.0))
def test_detailed_balance(omega, beta):
    r = ReservoirParams(0.3, beta)
    lhs = spectral_correlation(r, -omega)
    rhs = np.exp(-beta * omega) * spectral_correlation(r, omega)
    assert lhs == pytest.approx(rhs, rel=1e-12)


@given(st.floats(min_value=-50.0, max_value=50.0))
def test_spectral_correlation_nonnegative(omega):
    assert spectral_correlation(ReservoirParams(0.2, 0.7), omega) >= 0.0


def test_rates():
    r = ReservoirParams(0.125, 0.02)
    assert gamma_from_reservoir(r) == pytest.approx(100.0, rel=1e-14)
    assert gamma_from_reservoir(ReservoirParams(0.0, 0.02)) == 0.0
    assert excitation_rate(r, 400.0) == pytest.approx(100.0 / np.expm1(8.0), rel=1e-14)
    assert excitation_rate(r, 400.0) == pytest.approx(3.36e-2, rel=1e-2)
    assert excitation_rate(ReservoirParams(0.125, 50.0), 400.0) == 0.0


def test_dephasing_rate(p_default=ModelParams(16, 400.0, 10.0, 100.0)):
    assert dephasing_rate(p_default, 3, 3) == 0.0
    assert dephasing_rate(p_default, 0, 1) == pytest.approx(3.90625e-3, rel=1e-14)
    assert dephasing_rate(p_default, -1, 1) == pytest.approx(4 * 3.90625e-3, rel=1e-14)


def test_lamb_shift_grows_linearly_with_cutoff():
    s = [lamb_shift_diagnostic(ReservoirParams(0.1, 1.0, c)) for c in (50.0, 100.0, 200.0)]
    assert s[0] == pytest.approx(4 * 0.1 * 50.0, rel=1e-8)
    assert s[2] / s[1] == pytest.approx(2.0, rel=1e-8)
    assert lamb_shift_diagnostic(ReservoirParams(0.0, 1.0, 100.0)) == 0.0
