import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from locktongue.core import (CircuitParams, DimensionlessParams, FourierSeries, ParameterError,
                             ResonanceRatio, circuit_to_dimensionless, exp_weighted_integral,
                             fourier_eval, fourier_product, harmonic_parity)

coef = st.floats(-1, 1, allow_nan=False)


def random_series(draw_vals, N, base):
    c = np.array(draw_vals[:2 * N + 1]) + 1j * np.array(draw_vals[2 * N + 1:])
    return FourierSeries(c, base)


@st.composite
def series(draw, max_N=6):
    N = draw(st.integers(0, max_N))
    base = draw(st.floats(0.2, 3.0))
    vals = draw(st.lists(coef, min_size=4 * N + 2, max_size=4 * N + 2))
    return random_series(vals, N, base)


def naive(s, t):
    return sum(complex(c) * np.exp(1j * n * s.base_frequency * t) for n, c in zip(s.nu, s.coeffs))


def test_circuit_reduction_examples():
    d = circuit_to_dimensionless(CircuitParams(L=1, C=1, R=1, A=2, B=0, V_DD=1, Omega_drive=3))
    assert (d.alpha, d.beta, d.mu, d.omega) == (1, 2, 0, 3)
    d = circuit_to_dimensionless(CircuitParams(L=2, C=0.5, R=1, A=1.25, B=0.05, V_DD=1, Omega_drive=1))
    assert d.alpha == pytest.approx(4) and d.beta == pytest.approx(5)
    assert d.mu == pytest.approx(0.2) and d.omega == pytest.approx(2)
    with pytest.raises(ParameterError):
        d.validate()


def test_circuit_rejects_nonphysical():
    with pytest.raises(ParameterError):
        CircuitParams(L=-1, C=1, R=1, A=1, B=0, V_DD=1, Omega_drive=1)
    with pytest.raises(ParameterError):
        DimensionlessParams(math.nan, 2.0)


def test_resonance_ratio():
    rr = ResonanceRatio(4, 1)
    assert rr.is_even_integer and str(rr) == "4:1" and float(rr) == 4.0
    assert not ResonanceRatio(2, 3).is_even_integer
    assert ResonanceRatio.from_value(1.5) == ResonanceRatio(3, 2)
    for p, q in ((2, 4), (0, 1), (1, -1)):
        with pytest.raises(ParameterError):
            ResonanceRatio(p, q)


def test_eval_trivial():
    assert fourier_eval(FourierSeries.zeros(3, 1.0), 0.7) == 0.0
    assert fourier_eval(FourierSeries(np.array([0.5, 0, 0.5]), 1.0), 0.0) == pytest.approx(1.0)


@given(series(), st.lists(st.floats(-20, 20), min_size=10, max_size=10))
def test_eval_matches_naive_sum(s, ts):
    ts = np.array(ts)
    ref = np.array([naive(s, t) for t in ts])
    assert np.all(np.abs(ref.imag) <= 1e-12 * max(s.amplitude(), 1e-300) + 1e-15)
    assert np.allclose(s(ts), ref.real, rtol=0, atol=1e-14 * max(s.amplitude(), 1.0) * (2 * s.N + 1))


@given(series())
def test_reality_condition(s):
    assert np.allclose(s.coeffs, np.conj(s.coeffs[::-1]), atol=0)


@given(series(4), series(4))
def test_product_matches_pointwise(a, b):
    b = FourierSeries(b.coeffs, a.base_frequency)
    prod = fourier_product(a, b, headroom=a.N + b.N)
    t = np.linspace(0, 10, 17)
    assert np.allclose(prod(t), a(t) * b(t), atol=1e-12)


def test_product_rejects_mixed_bases():
    with pytest.raises(ValueError):
        fourier_product(FourierSeries.cosine(1, 1.0), FourierSeries.cosine(1, 2.0))


@given(series())
def test_derivative_and_antiderivative(s):
    t = np.linspace(0, 5, 9)
    d = s.derivative()
    ref = sum((1j * n * s.base_frequency * complex(c)) * np.exp(1j * n * s.base_frequency * t)
              for n, c in zip(s.nu, s.coeffs)).real
    assert np.allclose(d(t), ref, atol=1e-12)
    mean_free = s - s.mean
    back = mean_free.antiderivative().derivative()
    assert np.allclose(back.coeffs, mean_free.coeffs, atol=1e-14)


@settings(max_examples=20, deadline=None)
@given(series(3), st.floats(0.05, 2.0))
def test_exp_weighted_integral_against_quadrature(P, C):
    Q, D = exp_weighted_integral(P, C)
    for t in (0.3, 1.7, 4.0):
        ref, _ = quad(lambda s: math.exp(C * s) * float(P(s)), 0, t, epsabs=1e-13, epsrel=1e-12)
        assert D + math.exp(C * t) * float(Q(t)) == pytest.approx(ref, abs=1e-10)


def test_exp_weighted_integral_requires_nonzero_C():
    with pytest.raises(ValueError):
        exp_weighted_integral(FourierSeries.cosine(1, 1.0), 0.0)


@given(series(5), st.integers(1, 4))
def test_embed_preserves_signal(s, factor):
    e = s.embed(factor)
    t = np.linspace(0, 7, 11)
    assert e.base_frequency == pytest.approx(s.base_frequency / factor)
    assert np.allclose(e(t), s(t), atol=1e-13)


@given(series(5))
def test_samples_roundtrip(s):
    back = FourierSeries.from_samples(s.sample(4 * s.N + 4), s.base_frequency, s.N)
    assert np.allclose(back.coeffs, s.coeffs, atol=1e-14)


def test_csv_roundtrip():
    s = FourierSeries(np.array([0.1 - 0.2j, 0.3, 0.5, 0.3, 0.1 + 0.2j]), 0.75)
    back = FourierSeries.from_csv(io.StringIO(s.to_csv()))
    assert back.base_frequency == s.base_frequency
    assert np.array_equal(back.coeffs, s.coeffs)


def test_parity_report():
    s = FourierSeries.sine(1, 1.0, 3) + FourierSeries.sine(3, 1.0, 3)
    assert harmonic_parity(s).even_fraction == 0.0
    assert harmonic_parity(s + FourierSeries.cosine(2, 1.0, 3)).even_fraction > 0.1


def test_tail_adequacy():
    good = FourierSeries.from_function(lambda t: 1 / (2 - np.cos(t)), 1.0, 40)
    assert good.is_adequate(1e-20)
    assert not FourierSeries.cosine(3, 1.0).is_adequate(1e-3)
