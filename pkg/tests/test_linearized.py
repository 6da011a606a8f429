import math

import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

from locktongue.compatibility import resonance_frame
from locktongue.core import harmonic_parity
from locktongue.linearized import smoothness_probe
from locktongue.ode import rhs_variational

CASES = [(2.5, 2.0, 1, 1), (2.5, 2.0, 2, 1), (5.0, 4.0, 2, 1), (5.0, 4.0, 1, 1), (2.5, 2.0, 2, 3)]


@pytest.fixture(scope="module", params=CASES, ids=lambda c: f"a{c[0]}-b{c[1]}-{c[2]}:{c[3]}")
def frame(request):
    return resonance_frame(*request.param)


def variational_oracle(lc, tau):
    """Fundamental matrix by scipy along the series cycle (not the joint integration)."""
    def f(t, y):
        return np.concatenate([rhs_variational(y[:2], t, lc), rhs_variational(y[2:], t, lc)])
    sol = solve_ivp(f, (0, tau[-1]), [1.0, 0.0, 0.0, 1.0], t_eval=tau, method="DOP853",
                    rtol=1e-12, atol=1e-13)
    return sol.y


def test_splitting_against_independent_integration(frame):
    lc, wd = frame.lc, frame.wd
    tau = np.linspace(0, 1.5 * lc.period, 40)
    Y = variational_oracle(lc, tau)
    scale = np.max(np.abs(Y[0]))
    assert np.max(np.abs(wd.w11(tau) - Y[0])) < 1e-8 * scale
    assert np.max(np.abs(wd.w12(tau) - Y[2])) < 1e-8 * np.max(np.abs(Y[2]))


def test_abel_determinant(frame):
    wd = frame.wd
    ref = np.exp(-wd.F(wd.tau_grid))
    assert np.max(np.abs(np.linalg.det(wd.W_grid) / ref - 1)) < 1e-7


def test_floquet_multipliers(frame):
    wd = frame.wd
    lam = math.exp(-wd.f0 * wd.period)
    assert wd.floquet_multiplier == pytest.approx(lam, rel=1e-14)
    assert np.allclose(wd.multipliers(), [lam, 1.0], atol=1e-8)


def test_initial_values_and_smoothness(frame):
    lc, wd = frame.lc, frame.wd
    assert wd.w11(0.0) == pytest.approx(1.0, abs=1e-10)
    assert abs(wd.w12(0.0)) < 1e-10
    assert wd.b(0.0) == pytest.approx(1.0, abs=1e-12)
    rep = smoothness_probe(lc, wd)
    assert abs(rep.w11dot_at_zero) < 1e-6
    assert abs(rep.jet_identity) < 1e-8
    assert rep.w11dot_right == pytest.approx(rep.w11dot_left, abs=1e-6)


def test_constants(frame):
    lc, wd = frame.lc, frame.wd
    assert wd.c1 * wd.c2 == pytest.approx(-1.0, abs=1e-8)
    assert wd.c2 * lc.r1 == pytest.approx(1.0, abs=1e-8)
    assert wd.n_zeros_w11 == 1 and 0 < wd.bar_tau < math.pi * float(lc.rho)
    assert wd.fit_residual < 1e-9
    assert wd.floquet_discrepancy < 1e-5


def test_damping_mean(frame):
    lc, wd = frame.lc, frame.wd
    t = lc.u0.grid(1024)
    assert wd.f0 == pytest.approx(float(np.mean(lc.f(lc.u0(t)))), rel=1e-12)
    assert wd.f0 > 0
    for s in (0.4, 2.0, 0.9 * lc.period):
        ref, _ = quad(lambda x: float(lc.f(lc.u0(x))), 0, s, epsabs=1e-13, epsrel=1e-12, limit=200)
        assert wd.F(s) - wd.F(0.0) == pytest.approx(ref, abs=1e-10)


def test_odd_harmonics(frame):
    wd = frame.wd
    assert harmonic_parity(wd.a).even_fraction < 1e-8
    assert harmonic_parity(wd.b).even_fraction < 1e-8


def test_rescaled_b_is_consistent(frame):
    wd = frame.wd.rescaled_b(2.5)
    assert wd.c * wd.b(0.3) == pytest.approx(frame.wd.c * frame.wd.b(0.3), rel=1e-14)
