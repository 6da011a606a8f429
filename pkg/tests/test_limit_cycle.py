import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from locktongue.core import DimensionlessParams, ParameterError, ResonanceRatio
from locktongue.limit_cycle import find_limit_cycle, harmonic_balance, rescale_cycle
from locktongue.ode import integrate, lienard_jacobian, rhs_circuit, rhs_lienard

from conftest import OMEGA0_25_2, OMEGA0_5_4


def circuit_period(alpha, beta):
    """Period of the unforced circuit form from upward zero crossings of u."""
    def f(t, y):
        u, v = y
        return [alpha * v + beta * u * (1 - u * u), -u - v]

    def up(t, y):
        return y[0]
    up.direction = 1
    sol = solve_ivp(f, (0, 200), [0.5, 0.0], method="DOP853", rtol=1e-12, atol=1e-12, events=up)
    t = sol.t_events[0]
    return float(np.mean(np.diff(t[-6:])))


@pytest.mark.parametrize("ab, frozen", [((2.5, 2.0), OMEGA0_25_2), ((5.0, 4.0), OMEGA0_5_4)])
def test_proper_frequency_against_circuit_form(ab, frozen):
    lc = find_limit_cycle(*ab)
    assert lc.Omega0 == pytest.approx(frozen, abs=1e-11)
    assert lc.Omega0 == pytest.approx(2 * math.pi / circuit_period(*ab), rel=1e-9)


def test_reference_frequency(lc25):
    assert abs(lc25.Omega0 - 1.1434) < 2e-3


def test_cycle_solves_lienard(lc25):
    p = lc25.params
    t = lc25.u0.grid(256)
    u, ud, udd = lc25.u0(t), lc25.udot(t), lc25.uddot(t)
    assert np.max(np.abs(udd + p.h(u) * ud + p.k(u))) < 1e-10


def test_phase_and_jet(lc54):
    assert abs(lc54.udot(0.0)) < 1e-12
    assert lc54.u0(0.0) == pytest.approx(lc54.r0, abs=1e-13)
    assert lc54.uddot(0.0) == pytest.approx(lc54.r1, rel=1e-9)
    assert lc54.uddot_series.derivative()(0.0) == pytest.approx(2 * lc54.r2, rel=1e-8)


def test_rescaled_cycle_period(lc25):
    for p, q in ((1, 1), (2, 1), (2, 3)):
        s = rescale_cycle(lc25, ResonanceRatio(p, q))
        assert s.period == pytest.approx(2 * math.pi * p / q, rel=1e-14)
        assert s.u0(1.3) == pytest.approx(lc25.u0(1.3 / s.time_scale), abs=1e-14)
    with pytest.raises(ValueError):
        rescale_cycle(s, ResonanceRatio(1, 1))


def test_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        find_limit_cycle(2.0, 2.5)
    with pytest.raises(ParameterError):
        find_limit_cycle(2.0, 0.5)


@settings(max_examples=25, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-3, 3), st.floats(1.2, 3.0), st.floats(0.5, 2.0))
def test_jacobian_matches_finite_differences(u, v, beta, scale):
    p = DimensionlessParams(beta + 1.0, beta)
    G_u, G_v = lienard_jacobian(u, v, p, scale)
    h = 1e-6
    fd_u = (rhs_lienard((u + h, v), p, scale)[1] - rhs_lienard((u - h, v), p, scale)[1]) / (2 * h)
    fd_v = (rhs_lienard((u, v + h), p, scale)[1] - rhs_lienard((u, v - h), p, scale)[1]) / (2 * h)
    assert G_u == pytest.approx(fd_u, rel=1e-7, abs=1e-7)
    assert G_v == pytest.approx(fd_v, rel=1e-7, abs=1e-7)


def test_integrator_against_exact_solution():
    traj = integrate(lambda t, y: np.array([y[1], -y[0]]), (1.0, 0.0), 0.0, 10.0, tol=1e-12)
    t = np.linspace(0, 10, 7)
    assert np.allclose(traj(t)[0], np.cos(t), atol=1e-10)


def test_circuit_and_lienard_forms_share_the_cycle(lc25):
    # the circuit variable u obeys the Lienard equation with the same period
    p = DimensionlessParams(2.5, 2.0, 0.0, 1.0)
    traj = integrate(lambda t, y: rhs_circuit(y, t, p), (0.5, 0.0), 0.0, 120.0, tol=1e-11)
    t = np.linspace(100, 100 + lc25.T0, 5)
    assert np.allclose(traj(t)[0], traj(t + lc25.T0)[0], atol=1e-7)


def test_harmonic_balance_keeps_frequency(lc25):
    u, res = harmonic_balance(lc25.u0, lc25.params, lc25.u0.N)
    assert res < 1e-11
    assert u.base_frequency == pytest.approx(lc25.Omega0, rel=1e-12)
