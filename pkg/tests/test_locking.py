import math

import numpy as np
import pytest

from locktongue.core import DimensionlessParams, MeasurementError, ResonanceRatio
from locktongue.locking import (LockVerdict, adaptive_horizons, classify_orbit, is_locked,
                                measure_tongue, plateau_width, rotation_ratio, simulate_attractor,
                                staircase_csv, staircase_scan, tag_ratio)

from conftest import OMEGA0_25_2 as W


def params(mu, omega):
    return DimensionlessParams(2.5, 2.0, mu, omega)


def test_decoupled_drive_ratio():
    rot = rotation_ratio(simulate_attractor(params(0.0, 4 * W)))
    assert rot == pytest.approx(4.0, abs=1e-4)


def test_decoupled_orbit_lies_on_the_cycle(lc25):
    orbit = simulate_attractor(params(0.0, 4.3))
    u, v = orbit.points[-50:].T
    # on the cycle, v = (u' - beta u (1 - u^2)) / alpha; compare with the cycle's (u, u') image
    t = lc25.u0.grid(4000)
    cu = lc25.u0(t)
    cv = (lc25.udot(t) - 2.0 * cu * (1 - cu ** 2)) / 2.5
    dist = np.min(np.hypot(u[:, None] - cu[None], v[:, None] - cv[None]), axis=1)
    assert np.max(dist) < 5e-3


def test_locked_example():
    res = is_locked(params(0.1, 4 * W + 0.02), 4, 1)
    assert res.verdict is LockVerdict.LOCKED
    assert res.ratio == pytest.approx(4.0, abs=1e-9)
    rot = rotation_ratio(simulate_attractor(params(0.1, 4 * W + 0.02)))
    assert abs(rot - 4) < 1e-6 and rot.drift < 1e-9


def test_quasi_periodic_example():
    res = is_locked(params(0.1, 4 * W + 0.2), 4, 1)
    assert not res
    rot = rotation_ratio(simulate_attractor(params(0.1, 4 * W + 0.2)))
    assert abs(rot - 4) > 10 * rot.drift


def test_decoupled_drive_never_locks():
    p = params(0.0, 4 * W + 0.2 / W)
    orbit = simulate_attractor(p)
    for pp in range(1, 9):
        for q in (1, 2, 3):
            if math.gcd(pp, q) == 1:
                assert classify_orbit(orbit, ResonanceRatio(pp, q)).verdict is not LockVerdict.LOCKED


def test_sub_period_is_rejected():
    # a 2:1 lock is also a 4-periodic section orbit, but it is not a 4:2 tongue
    omega = 2 * W
    res = is_locked(params(0.1, omega), 2, 1)
    assert res.locked
    orbit = simulate_attractor(params(0.1, omega))
    with pytest.raises(ValueError):
        ResonanceRatio(4, 2)
    fake = classify_orbit(orbit, ResonanceRatio(4, 1))
    assert fake.verdict is LockVerdict.UNLOCKED and fake.sub_period in (1, 2)


@pytest.mark.parametrize("omega", [4 * W - 0.05, 4 * W + 0.01, 4 * W + 0.04, 4 * W + 0.08])
def test_seed_independence(omega):
    a = is_locked(params(0.1, omega), 4, 1, seed=(1.0, 0.0))
    b = is_locked(params(0.1, omega), 4, 1, seed=(-0.3, 0.6))
    assert a.verdict == b.verdict


@pytest.mark.parametrize("omega", [4 * W - 0.04, 4 * W + 0.2, 3 * W + 0.05])
def test_lock_and_rotation_consistency(omega):
    res = is_locked(params(0.1, omega), 4, 1)
    rot = rotation_ratio(simulate_attractor(params(0.1, omega)))
    if res.locked:
        assert abs(rot - 4) < 1e-6
    elif rot.drift < 1e-4:
        assert abs(rot - 4) > 3 * rot.drift


def test_decoupled_staircase_is_linear_and_monotone():
    pts = staircase_scan(4 * W - 0.1, 4 * W + 0.1, 21, 0.0, 2.5, 2.0, threads=2)
    r = np.array([s.ratio_estimate for s in pts])
    om = np.array([s.omega for s in pts])
    drift = np.array([s.drift for s in pts])
    assert np.all(np.abs(r - om / W) <= np.maximum(3 * drift, 1e-9))
    assert np.all(np.diff(r) > 0)
    assert plateau_width(pts, 4, 1) == 0.0


@pytest.fixture(scope="module")
def staircase_4():
    return staircase_scan(4 * W - 0.1, 4 * W + 0.1, 81, 0.1, 2.5, 2.0)


def test_plateau_at_four(staircase_4):
    assert plateau_width(staircase_4, 4, 1) >= 0.05


def test_staircase_monotone_outside_plateaux(staircase_4):
    r = np.array([s.ratio_estimate for s in staircase_4])
    bar = np.array([s.drift for s in staircase_4])
    assert np.all(np.diff(r) >= -3 * (bar[1:] + bar[:-1]) - 1e-9)


def test_staircase_csv(staircase_4, tmp_path):
    path = tmp_path / "s.csv"
    text = staircase_csv(staircase_4, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "omega,ratio,drift,locked,p,q"
    assert len(lines) == 82 and text == path.read_text()
    assert any(ln.endswith(",1,4,1") for ln in lines)


def test_tag_ratio():
    assert tag_ratio(4.0 + 1e-8, 1e-9) == (4, 1)
    assert tag_ratio(1.5, 0.0) == (3, 2)
    assert tag_ratio(4.01, 1e-9) is None
    assert tag_ratio(4.0, 1e-3) is None


def test_even_tongue_dwarfs_odd_tongue():
    w4 = measure_tongue(4, 1, 0.1, 2.5, 2.0).width
    w3 = measure_tongue(3, 1, 0.1, 2.5, 2.0).width
    assert w4 > 10 * w3 > 0


def test_transient_robustness():
    kw = dict(tol_omega=1e-5, horizon_periods=2000)
    a = measure_tongue(4, 1, 0.1, 2.5, 2.0, transient_periods=500, **kw)
    b = measure_tongue(4, 1, 0.1, 2.5, 2.0, transient_periods=1000, **kw)
    assert abs(a.omega_lo - b.omega_lo) < 1e-5 and abs(a.omega_hi - b.omega_hi) < 1e-5


def test_missing_lock_is_reported():
    with pytest.raises(MeasurementError):
        measure_tongue(4, 1, 0.1, 2.5, 2.0, bracket=(4 * W + 0.15, 4 * W + 0.25),
                       seed_omega=4 * W + 0.2, scan_points=5)


def test_adaptive_horizons():
    assert adaptive_horizons(4.5, 0.03) == (500, 2000)
    tr, hz = adaptive_horizons(1.7, 1e-5)
    assert tr == hz and hz > 2000
    assert adaptive_horizons(1.7, 1e-9) == (400_000, 400_000)


def test_simulation_is_deterministic():
    a = simulate_attractor(params(0.1, 4.6), 100, 200)
    b = simulate_attractor(params(0.1, 4.6), 100, 200)
    assert np.array_equal(a.points, b.points) and np.array_equal(a.winding, b.winding)


def test_simulation_validation():
    with pytest.raises(ValueError):
        simulate_attractor(params(0.1, -1.0))
    with pytest.raises(ValueError):
        simulate_attractor(params(0.1, 4.0), 10, 0)
