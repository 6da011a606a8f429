import math

import numpy as np
import pytest

from locktongue.compatibility import (MEAN_TOL, ResonanceFrame, compute_A_closed,
                                      compute_A_integral, compute_B_constants, compute_u1,
                                      drive_terms, epsilon1, resonance_frame,
                                      solve_periodic_response)
from locktongue.core import CompatibilityError

PAIRS = [(2.5, 2.0), (5.0, 4.0)]
RATIOS = [(1, 1), (2, 1), (4, 1), (3, 1), (1, 2), (2, 3), (3, 2)]


@pytest.mark.parametrize("ab", PAIRS)
@pytest.mark.parametrize("pq", RATIOS)
def test_closed_form_A(ab, pq):
    fr = resonance_frame(*ab, *pq)
    closed = compute_A_closed(fr.lc)
    assert closed != 0
    assert compute_A_integral(fr) == pytest.approx(closed, rel=1e-9)


@pytest.mark.parametrize("ab", PAIRS)
def test_Abar_independent_of_rho(ab):
    vals = [compute_B_constants(resonance_frame(*ab, *pq)).Abar for pq in RATIOS]
    assert max(vals) - min(vals) < 1e-9 * abs(vals[0])


@pytest.mark.parametrize("ab", PAIRS)
@pytest.mark.parametrize("p", [2, 4])
def test_B_relations(ab, p):
    fr = resonance_frame(*ab, p, 1)
    fc = compute_B_constants(fr)
    s = fr.lc.time_scale
    assert fc.B21 == pytest.approx(-fc.B32 / s, rel=1e-10)
    assert fc.B22 == pytest.approx(fc.B31 / s, rel=1e-10)


@pytest.mark.parametrize("ab", PAIRS)
def test_selection_rule(ab):
    for pq in ((1, 1), (3, 1), (1, 2), (2, 3), (3, 2)):
        assert max(map(abs, compute_B_constants(resonance_frame(*ab, *pq)).B)) < 1e-9
    for p in (2, 4):
        assert max(map(abs, compute_B_constants(resonance_frame(*ab, p, 1)).B)) > 1e-6


def test_reference_constants(frame54_2):
    fc = compute_B_constants(frame54_2)
    assert fc.D2 == pytest.approx(-0.04507, rel=1e-4)
    assert fc.D1 == pytest.approx(0.00735, rel=0.05)
    # frozen values of this implementation
    assert fc.D1 == pytest.approx(0.0070353402355, rel=1e-8)
    assert fc.D2 == pytest.approx(-0.0450695409923, rel=1e-8)


@pytest.mark.parametrize("scale", [3.0, -0.5])
def test_eps1_invariant_under_b_normalization(frame54_2, scale):
    fr = frame54_2
    other = ResonanceFrame.build(fr.lc, fr.wd.rescaled_b(scale), fr.rr)
    fc, fc2 = compute_B_constants(fr), compute_B_constants(other)
    tau0 = np.linspace(0, 2 * math.pi, 9)
    assert np.allclose(epsilon1(fc2, tau0), epsilon1(fc, tau0), rtol=0, atol=1e-10)
    assert fc2.A == pytest.approx(scale * fc.A, rel=1e-12)


def test_extremal_phases(frame54_2):
    fc = compute_B_constants(frame54_2)
    t_max, t_min = fc.extremal_phases()
    grid = np.linspace(0, 2 * math.pi, 2001)
    e = epsilon1(fc, grid)
    assert e.max() <= epsilon1(fc, t_max) < e.max() + 1e-6
    assert e.min() - 1e-6 < epsilon1(fc, t_min) <= e.min()
    assert fc.amplitude() == pytest.approx(epsilon1(fc, t_max), rel=1e-12)


def test_first_order_solvability(frame54_2):
    fr = frame54_2
    fc = compute_B_constants(fr)
    for tau0 in (0.0, 1.1, 4.0):
        psi = drive_terms(fr, tau0) + float(epsilon1(fc, tau0)) * fr.eps_direction
        assert abs(fr.average(fr.eF * fr.b * psi)) < MEAN_TOL


def test_nonzero_mean_is_rejected(frame25_1):
    with pytest.raises(CompatibilityError):
        solve_periodic_response(frame25_1, frame25_1.eps_direction)


def linear_operator(fr, y):
    """L y = y'' + x0 h(u0) y' + x0 (h'(u0) u0' + x0 k'(u0)) y on the frame grid."""
    p = fr.lc.params
    d = y.derivative()
    u, ud = fr.u0, fr.ud0
    coef = fr.x0 * (6 * p.beta * u * ud + fr.x0 * (p.alpha - p.beta + 3 * p.beta * u * u))
    return d.derivative().sample(fr.M) + fr.x0 * p.h(u) * d.sample(fr.M) + coef * y.sample(fr.M)


@pytest.mark.parametrize("pq", [(1, 1), (2, 1), (2, 3)])
def test_response_solves_linear_equation(pq):
    fr = resonance_frame(2.5, 2.0, *pq)
    fc = compute_B_constants(fr)
    tau0 = 0.9
    psi = drive_terms(fr, tau0) + float(epsilon1(fc, tau0)) * fr.eps_direction
    u1 = solve_periodic_response(fr, psi).u
    assert np.max(np.abs(linear_operator(fr, u1) + psi)) < 1e-8


def support_violation(series, p, q, order):
    """Largest coefficient outside nu = q nu' + p sigma, nu' odd, |sigma| <= order."""
    allowed = set()
    for sigma in range(-order, order + 1):
        for nup in range(-series.N, series.N + 1, 1):
            if nup % 2:
                allowed.add(q * nup + p * sigma)
    bad = [abs(c) for n, c in zip(series.nu, series.coeffs) if int(n) not in allowed]
    return max(bad, default=0.0) / np.max(np.abs(series.coeffs))


@pytest.mark.parametrize("pq", [(1, 1), (2, 1), (2, 3), (3, 2)])
def test_u1_harmonic_support(pq):
    fr = resonance_frame(2.5, 2.0, *pq)
    u1 = compute_u1(fr, compute_B_constants(fr), 0.7)
    assert support_violation(u1, *pq, 1) < 1e-10
