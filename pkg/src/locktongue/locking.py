"""Direct simulation of the driven circuit: Poincare sections, rotation ratios,
lock detection, tongue boundaries and staircases.

The driven field is integrated by a compiled fixed-step RK4 with an integer
number of steps per drive period, so section points land exactly on
t = 2 pi n / omega and the drive phase at every stage is reproduced without
drift. Rotation is measured by the continuous winding angle of (u, v) about
a center, accumulated step by step.
"""
from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numba import njit

from .core import DimensionlessParams, MeasurementError, ResonanceRatio

DEFAULT_TRANSIENT = 500
DEFAULT_HORIZON = 2000
DEFAULT_LOCK_TOL = 1e-7
DEFAULT_TOL_OMEGA = 1e-5
DEFAULT_MAX_STEP = 0.005
DEFAULT_SEED = (1.0, 0.0)
RATIO_TOL = 1e-6


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("LOCKTONGUE_THREADS", "1")))
    except ValueError:
        return 1


@njit(nogil=True, cache=True)
def _field(alpha, beta, mu, sn, u, v):
    phi = beta + mu * sn
    return alpha * v + phi * u * (1.0 - u * u), -u - v


@njit(nogil=True, cache=True)
def _section_kernel(alpha, beta, mu, omega, u, v, steps, n_transient, n_samples, cu, cv, out):
    """Integrate n_transient + n_samples drive periods.

    Fills out[n] = (u, v, winding) at the start of each sampled period and one
    extra row at the end; winding counts clockwise turns about (cu, cv) in
    radians since the first sample. Returns the minimum distance to the center
    over the sampled part.
    """
    period = 2.0 * math.pi / omega
    h = period / steps
    sins = np.empty(2 * steps + 1)
    for i in range(2 * steps + 1):
        sins[i] = math.sin(math.pi * i / steps)
    theta = 0.0
    rmin = 1e300
    total = n_transient + n_samples
    for n in range(total + 1):
        if n >= n_transient:
            out[n - n_transient, 0] = u
            out[n - n_transient, 1] = v
            out[n - n_transient, 2] = theta
        if n == total:
            break
        for i in range(steps):
            s0, s1, s2 = sins[2 * i], sins[2 * i + 1], sins[2 * i + 2]
            k1u, k1v = _field(alpha, beta, mu, s0, u, v)
            k2u, k2v = _field(alpha, beta, mu, s1, u + 0.5 * h * k1u, v + 0.5 * h * k1v)
            k3u, k3v = _field(alpha, beta, mu, s1, u + 0.5 * h * k2u, v + 0.5 * h * k2v)
            k4u, k4v = _field(alpha, beta, mu, s2, u + h * k3u, v + h * k3v)
            un = u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
            vn = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
            if n >= n_transient:
                x0, y0 = u - cu, v - cv
                x1, y1 = un - cu, vn - cv
                theta -= math.atan2(x0 * y1 - y0 * x1, x0 * x1 + y0 * y1)
                r = math.sqrt(x1 * x1 + y1 * y1)
                if r < rmin:
                    rmin = r
            u, v = un, vn
    return rmin


def steps_per_period(omega: float, max_step: float = DEFAULT_MAX_STEP) -> int:
    return max(16, int(math.ceil(2 * math.pi / omega / max_step)))


@dataclass(frozen=True, eq=False)
class PoincareOrbit:
    """Section points z_n = (u, v) at t = 2 pi n / omega after the transient."""

    points: np.ndarray
    winding: np.ndarray
    omega: float
    params: DimensionlessParams
    transient_periods: int
    steps: int
    center: tuple[float, float] = (0.0, 0.0)
    min_radius: float = math.inf
    warnings: tuple[str, ...] = ()

    @property
    def count(self) -> int:
        return len(self.points)

    @property
    def final_state(self) -> np.ndarray:
        return self.points[-1]

    def to_csv(self, path=None) -> str:
        lines = ["n,u,v,winding"]
        lines += [f"{n},{p[0]!r},{p[1]!r},{w!r}" for n, (p, w) in
                  enumerate(zip(self.points.tolist(), self.winding.tolist()))]
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def simulate_attractor(params: DimensionlessParams, transient_periods: int = DEFAULT_TRANSIENT,
                       sample_periods: int = DEFAULT_HORIZON, seed=DEFAULT_SEED,
                       max_step: float = DEFAULT_MAX_STEP, center=None) -> PoincareOrbit:
    """Section of the driven attractor; sample_periods + 1 points are kept."""
    params.validate()
    if not params.omega > 0:
        raise ValueError("drive frequency must be positive")
    if transient_periods < 0 or sample_periods < 1:
        raise ValueError("need transient_periods >= 0 and sample_periods >= 1")
    steps = steps_per_period(params.omega, max_step)
    out = np.empty((sample_periods + 1, 3))
    cu, cv = (0.0, 0.0) if center is None else center
    rmin = _section_kernel(params.alpha, params.beta, params.mu, params.omega, float(seed[0]),
                           float(seed[1]), steps, transient_periods, sample_periods, cu, cv, out)
    if not np.all(np.isfinite(out)):
        raise MeasurementError("driven orbit diverged")
    notes = ()
    scale = float(np.max(np.hypot(out[:, 0] - cu, out[:, 1] - cv)))
    if center is None and rmin < 1e-3 * scale:
        # orbit passes too close to the origin for a reliable winding count
        centroid = (float(out[:, 0].mean()), float(out[:, 1].mean()))
        orbit = simulate_attractor(params, transient_periods, sample_periods, seed, max_step, centroid)
        return PoincareOrbit(orbit.points, orbit.winding, orbit.omega, params, transient_periods,
                             steps, centroid, orbit.min_radius,
                             ("winding measured about the orbit centroid",))
    return PoincareOrbit(out[:, :2].copy(), out[:, 2].copy(), params.omega, params,
                         transient_periods, steps, (cu, cv), rmin, notes)


def _bump_weights(n: int) -> np.ndarray:
    x = (np.arange(n) + 0.5) / n
    w = np.exp(-1.0 / (x * (1.0 - x)))
    return w / w.sum()


class RotationEstimate(float):
    """omega / Omega as a float, carrying the half-versus-half drift."""

    drift: float

    def __new__(cls, value: float, drift: float):
        obj = super().__new__(cls, value)
        obj.drift = drift
        return obj


def rotation_ratio(orbit: PoincareOrbit, min_samples: int = 16) -> RotationEstimate:
    """omega / Omega from the weighted mean winding per drive period."""
    if orbit.count - 1 < 2 * min_samples:
        raise MeasurementError("orbit too short for a rotation estimate")
    adv = np.diff(orbit.winding)
    if np.mean(adv) <= 0:
        raise MeasurementError("orbit does not wind around the center")

    def est(d):
        return 2 * math.pi / float(np.dot(_bump_weights(len(d)), d))

    half = len(adv) // 2
    value = est(adv)
    return RotationEstimate(value, abs(est(adv[half:]) - est(adv[:half])))


class LockVerdict(enum.Enum):
    LOCKED = "locked"
    UNLOCKED = "unlocked"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class LockResult:
    verdict: LockVerdict
    p: int
    q: int
    omega: float
    ratio: float
    drift: float
    return_distance: float
    retried: bool = False
    sub_period: int | None = None

    @property
    def locked(self) -> bool:
        return self.verdict is LockVerdict.LOCKED

    def __bool__(self) -> bool:
        return self.locked


def _return_distance(points: np.ndarray, p: int) -> np.ndarray:
    return np.hypot(points[p:, 0] - points[:-p, 0], points[p:, 1] - points[:-p, 1])


def classify_orbit(orbit: PoincareOrbit, rr: ResonanceRatio, tol: float = DEFAULT_LOCK_TOL) -> LockResult:
    p, q = rr.p, rr.q
    pts = orbit.points
    n = len(pts)
    quarter = n // 4
    d = _return_distance(pts, p)
    d_last = float(np.max(d[-quarter:]))
    d_prev = float(np.max(d[-2 * quarter:-quarter]))
    rot = rotation_ratio(orbit)
    base = dict(p=p, q=q, omega=orbit.omega, ratio=float(rot), drift=rot.drift, return_distance=d_last)
    if d_last < tol:
        for pp in range(1, p):
            if p % pp == 0 and np.max(_return_distance(pts[-quarter - pp:], pp)) < tol:
                return LockResult(LockVerdict.UNLOCKED, sub_period=pp, **base)
        # the full-horizon average still carries the phase relaxation; a
        # converged cycle is judged on whole p-periods of the final quarter
        span = p * max(1, quarter // p)
        tail = 2 * math.pi * span / float(orbit.winding[-1] - orbit.winding[-1 - span])
        base["ratio"] = tail
        if abs(tail - p / q) < RATIO_TOL:
            return LockResult(LockVerdict.LOCKED, **base)
        return LockResult(LockVerdict.UNLOCKED, **base)
    if d_last < 0.9 * d_prev and d_last < 1e-2 and abs(float(rot) - p / q) < 1e-3:
        return LockResult(LockVerdict.INDETERMINATE, **base)
    return LockResult(LockVerdict.UNLOCKED, **base)


def is_locked(params: DimensionlessParams, p: int, q: int, tol: float = DEFAULT_LOCK_TOL,
              horizon_periods: int = DEFAULT_HORIZON, transient_periods: int = DEFAULT_TRANSIENT,
              seed=DEFAULT_SEED, max_step: float = DEFAULT_MAX_STEP, retry: bool = True) -> LockResult:
    """Whether the section converges to a p-cycle with rotation ratio p/q.

    An indeterminate verdict (contraction still visible at the horizon) is
    followed, when ``retry`` is set, by four more horizons continued from the
    last section point; that run decides.
    """
    rr = ResonanceRatio(p, q)
    orbit = simulate_attractor(params, transient_periods, horizon_periods, seed, max_step)
    res = classify_orbit(orbit, rr, tol)
    if res.verdict is LockVerdict.INDETERMINATE and retry:
        orbit = simulate_attractor(params, 0, 4 * horizon_periods, orbit.final_state, max_step)
        res = classify_orbit(orbit, rr, tol)
        res = LockResult(**{**res.__dict__, "retried": True})
    return res


def relaxation_periods(omega: float, half_width: float) -> float:
    """Drive periods per e-fold of phase relaxation at the center of a tongue.

    The phase of a locked orbit relaxes at a rate of about 2 pi half_width /
    omega per drive period, so narrow tongues need long horizons.
    """
    return omega / (2 * math.pi * max(half_width, 1e-12))


def adaptive_horizons(omega: float, half_width: float, factor: float = 4.0,
                      cap: int = 400_000) -> tuple[int, int]:
    r = factor * relaxation_periods(omega, half_width)
    return (min(cap, max(DEFAULT_TRANSIENT, int(math.ceil(r)))),
            min(cap, max(DEFAULT_HORIZON, int(math.ceil(r)))))


@dataclass(frozen=True)
class TongueMeasurement:
    p: int
    q: int
    mu: float
    alpha: float
    beta: float
    omega_lo: float
    omega_hi: float
    tol_omega: float
    seed_omega: float
    probes: int
    flagged: tuple[float, ...] = ()

    @property
    def rho(self) -> float:
        return self.p / self.q

    @property
    def width(self) -> float:
        return self.omega_hi - self.omega_lo

    @property
    def half_width(self) -> float:
        return 0.5 * self.width

    @property
    def center(self) -> float:
        return 0.5 * (self.omega_hi + self.omega_lo)


@dataclass
class _Prober:
    alpha: float
    beta: float
    mu: float
    rr: ResonanceRatio
    kwargs: dict
    probes: int = 0
    flagged: list = field(default_factory=list)
    log: list = field(default_factory=list)

    def __call__(self, omega: float) -> bool:
        self.probes += 1
        res = is_locked(DimensionlessParams(self.alpha, self.beta, self.mu, omega),
                        self.rr.p, self.rr.q, **self.kwargs)
        if res.verdict is LockVerdict.INDETERMINATE:
            self.flagged.append(omega)
        self.log.append((omega, res.verdict.value, res.ratio))
        return res.locked


def _edge(probe, inside: float, step: float, direction: float, limit: float, tol: float) -> float:
    """Last locked omega before the first unlocked one walking from ``inside``."""
    lo = inside
    while True:
        cand = lo + direction * step
        if direction * (cand - limit) >= 0:
            cand = limit
        if not probe(cand):
            hi = cand
            break
        lo = cand
        if cand == limit:
            return lo
        step *= 2
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        if probe(mid):
            lo = mid
        else:
            hi = mid
    return lo


def measure_tongue(p: int, q: int, mu: float, alpha: float, beta: float, bracket=None,
                   tol_omega: float = DEFAULT_TOL_OMEGA, seed_omega: float | None = None,
                   scan_points: int = 41, threads: int | None = None, **lock_kwargs) -> TongueMeasurement:
    """Locked interval of the p:q resonance by outward stepping and bisection.

    The seed defaults to the predicted tongue center (second order). If the
    seed is not locked, the bracket is scanned for a locked point. Unless
    given, transient and horizon scale with the predicted relaxation time.
    """
    from .perturbation import predict_tongue

    rr = ResonanceRatio(p, q)
    pred = None
    if seed_omega is None or bracket is None:
        pred = predict_tongue(alpha, beta, rr, mu, k_max=2)
    if seed_omega is None:
        seed_omega = pred.center
    if bracket is None:
        half = max(pred.width, 1e-3)
        bracket = (pred.center - 3 * half, pred.center + 3 * half)
    if pred is not None and "horizon_periods" not in lock_kwargs:
        tr, hz = adaptive_horizons(pred.center, 0.5 * pred.width)
        lock_kwargs.setdefault("transient_periods", tr)
        lock_kwargs["horizon_periods"] = hz
    lo_b, hi_b = map(float, bracket)
    if not lo_b < seed_omega < hi_b:
        raise ValueError("seed omega must lie inside the bracket")
    probe = _Prober(alpha, beta, mu, rr, lock_kwargs)
    inside = seed_omega
    if not probe(seed_omega):
        grid = np.linspace(lo_b, hi_b, scan_points)
        grid = grid[np.argsort(np.abs(grid - seed_omega))]
        inside = None
        for w in grid:
            if probe(float(w)):
                inside = float(w)
                break
        if inside is None:
            raise MeasurementError(f"no locked {rr} point in [{lo_b}, {hi_b}]; scan: {probe.log}")
    step = max(tol_omega, 0.05 * (hi_b - lo_b) / 6)
    threads = default_threads() if threads is None else threads
    if threads > 1:
        right_probe = _Prober(alpha, beta, mu, rr, lock_kwargs)
        with ThreadPoolExecutor(2) as ex:
            f_hi = ex.submit(_edge, right_probe, inside, step, +1.0, hi_b, tol_omega)
            w_lo = _edge(probe, inside, step, -1.0, lo_b, tol_omega)
            w_hi = f_hi.result()
        probe.probes += right_probe.probes
        probe.flagged += right_probe.flagged
    else:
        w_lo = _edge(probe, inside, step, -1.0, lo_b, tol_omega)
        w_hi = _edge(probe, inside, step, +1.0, hi_b, tol_omega)
    return TongueMeasurement(p, q, mu, alpha, beta, w_lo, w_hi, tol_omega, seed_omega,
                             probe.probes, tuple(probe.flagged))


@dataclass(frozen=True)
class StaircasePoint:
    omega: float
    ratio_estimate: float
    drift: float
    locked: bool
    p: int | None = None
    q: int | None = None
    error: str = ""


def tag_ratio(ratio: float, drift: float, max_den: int = 8, tol: float = RATIO_TOL):
    """Nearest p/q with q <= max_den if the ratio sits on it within tol."""
    frac = Fraction(ratio).limit_denominator(max_den)
    if abs(ratio - float(frac)) < tol and drift < tol:
        return frac.numerator, frac.denominator
    return None


def staircase_point(omega: float, mu: float, alpha: float, beta: float, max_den: int = 8,
                    transient_periods: int = DEFAULT_TRANSIENT,
                    horizon_periods: int = DEFAULT_HORIZON, seed=DEFAULT_SEED,
                    max_step: float = DEFAULT_MAX_STEP) -> StaircasePoint:
    try:
        orbit = simulate_attractor(DimensionlessParams(alpha, beta, mu, omega), transient_periods,
                                   horizon_periods, seed, max_step)
        rot = rotation_ratio(orbit)
    except Exception as exc:  # recorded in-row, the scan goes on
        return StaircasePoint(omega, math.nan, math.nan, False, error=str(exc))
    tag = tag_ratio(float(rot), rot.drift, max_den)
    if tag is None:
        return StaircasePoint(omega, float(rot), rot.drift, False)
    return StaircasePoint(omega, float(rot), rot.drift, True, *tag)


def staircase_scan(omega_lo: float, omega_hi: float, steps: int, mu: float, alpha: float,
                   beta: float, threads: int | None = None, **kwargs) -> list[StaircasePoint]:
    if not omega_lo < omega_hi:
        raise ValueError("need omega_lo < omega_hi")
    if steps < 2:
        raise ValueError("need at least two grid points")
    grid = np.linspace(omega_lo, omega_hi, steps)
    threads = default_threads() if threads is None else threads

    def one(w):
        return staircase_point(float(w), mu, alpha, beta, **kwargs)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(one, grid))
    return [one(w) for w in grid]


def staircase_csv(points: list[StaircasePoint], path=None) -> str:
    lines = ["omega,ratio,drift,locked,p,q"]
    for s in points:
        lines.append(f"{float(s.omega)!r},{float(s.ratio_estimate)!r},{float(s.drift)!r},{int(s.locked)},"
                     f"{'' if s.p is None else s.p},{'' if s.q is None else s.q}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def plateau_width(points: list[StaircasePoint], p: int, q: int) -> float:
    """Longest run of consecutive grid points locked at p/q, as an omega span."""
    best = 0.0
    start = None
    prev = None
    for s in points:
        if s.locked and (s.p, s.q) == (p, q):
            if start is None:
                start = s.omega
            prev = s.omega
            best = max(best, prev - start)
        else:
            start = None
    return best
