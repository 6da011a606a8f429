"""First-order solvability: A, the B constants, D1, D2, eps1 and u1.

For a p:q resonance every quantity lives on the common period 2 pi p, i.e.
on base frequency 1/p. The cycle data (period 2 pi rho, base q/p) embed into
that base by the harmonic map nu -> q nu, and the drive sin(tau + tau0) sits
at harmonic p. Averages are the zeroth coefficient of products sampled on a
uniform grid wide enough that the spectral tails do not alias.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .core import (DEFAULT_HARMONICS, CompatibilityError, FourierSeries, ResonanceRatio,
                   exp_weighted_integral)
from .limit_cycle import LimitCycle, find_limit_cycle, rescale_cycle
from .linearized import WronskianData, build_wronskian
from .ode import DEFAULT_TOL

MEAN_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ResonanceFrame:
    """Cycle and Wronskian data sampled on the common 2 pi p grid."""

    rr: ResonanceRatio
    lc: LimitCycle
    wd: WronskianData
    N: int
    M: int

    @classmethod
    def build(cls, lc: LimitCycle, wd: WronskianData, rr: ResonanceRatio,
              headroom_orders: int = 4) -> "ResonanceFrame":
        N = lc.u0.N * rr.q + rr.p * headroom_orders
        return cls(rr, lc, wd, N, 4 * N)

    @property
    def base(self) -> float:
        return 1.0 / self.rr.p

    @property
    def period(self) -> float:
        return 2 * math.pi * self.rr.p

    @property
    def x0(self) -> float:
        return 1.0 / self.lc.time_scale

    @property
    def f0(self) -> float:
        return self.wd.f0

    @property
    def c(self) -> float:
        return self.wd.c

    @cached_property
    def tau(self) -> np.ndarray:
        return np.arange(self.M) * self.period / self.M

    def on_grid(self, s: FourierSeries) -> np.ndarray:
        """Samples of a cycle-base or frame-base series on the frame grid."""
        if not math.isclose(s.base_frequency, self.base, rel_tol=1e-12):
            s = s.embed(self.rr.q)
        return s.sample(self.M)

    def to_series(self, values: np.ndarray, N: int | None = None) -> FourierSeries:
        return FourierSeries.from_samples(values, self.base, self.N if N is None else N)

    @cached_property
    def u0(self) -> np.ndarray:
        return self.on_grid(self.lc.u0)

    @cached_property
    def ud0(self) -> np.ndarray:
        return self.on_grid(self.lc.udot_series)

    @cached_property
    def udd0(self) -> np.ndarray:
        return self.on_grid(self.lc.uddot_series)

    @cached_property
    def a(self) -> np.ndarray:
        return self.on_grid(self.wd.a)

    @cached_property
    def b(self) -> np.ndarray:
        return self.on_grid(self.wd.b)

    @cached_property
    def eF(self) -> np.ndarray:
        return self.on_grid(self.wd.exp_tildeF)

    @cached_property
    def eps_direction(self) -> np.ndarray:
        """d/dx of x h(u0) u0' + x^2 k(u0) at x = x0."""
        p = self.lc.params
        return p.h(self.u0) * self.ud0 + 2 * self.x0 * p.k(self.u0)

    def drive(self, tau0: float) -> tuple[np.ndarray, np.ndarray]:
        ph = self.tau + tau0
        return np.sin(ph), np.cos(ph)

    def average(self, values: np.ndarray) -> float:
        return float(np.mean(values))


@lru_cache(maxsize=32)
def cached_limit_cycle(alpha: float, beta: float, tol: float = DEFAULT_TOL,
                       n_harmonics: int = DEFAULT_HARMONICS) -> LimitCycle:
    return find_limit_cycle(alpha, beta, tol=tol, n_harmonics=n_harmonics)


@lru_cache(maxsize=64)
def resonance_frame(alpha: float, beta: float, p: int, q: int, tol: float = DEFAULT_TOL,
                    n_harmonics: int = DEFAULT_HARMONICS) -> ResonanceFrame:
    rr = ResonanceRatio(p, q)
    lc = rescale_cycle(cached_limit_cycle(alpha, beta, tol, n_harmonics), rr)
    return ResonanceFrame.build(lc, build_wronskian(lc, tol), rr)


@dataclass(frozen=True)
class FirstOrderConstants:
    rho: float
    A: float
    Abar: float
    B11: float
    B12: float
    B21: float
    B22: float
    B31: float
    B32: float

    @property
    def D1(self) -> float:
        return -(self.B11 + self.B21 + self.B31)

    @property
    def D2(self) -> float:
        return -(self.B12 + self.B22 + self.B32)

    @property
    def B(self) -> tuple[float, ...]:
        return (self.B11, self.B12, self.B21, self.B22, self.B31, self.B32)

    def amplitude(self) -> float:
        """Peak of |eps1| over tau0."""
        return math.hypot(self.D1, self.D2) / abs(self.A)

    def extremal_phases(self) -> tuple[float, float]:
        """tau0 of the maximum and minimum of eps1 (sign of A included)."""
        t = math.atan2(self.D2, self.D1)
        if self.A < 0:
            t += math.pi
        return t % (2 * math.pi), (t + math.pi) % (2 * math.pi)


def compute_A_integral(frame: ResonanceFrame) -> float:
    return frame.average(frame.eF * frame.b * frame.eps_direction)


def compute_A_closed(lc: LimitCycle) -> float:
    """-r1 rho Omega0, with r1 the scaled-time jet coefficient."""
    return -lc.r1 * lc.time_scale


def compute_B_constants(frame: ResonanceFrame) -> FirstOrderConstants:
    x0, u0 = frame.x0, frame.u0
    w = frame.eF * frame.b
    cubic = u0 * (u0 * u0 - 1.0)
    K1 = w * x0 * frame.ud0 * (3 * u0 * u0 - 1.0)
    K2 = w * x0 * x0 * cubic
    K3 = w * x0 * cubic
    s, c = frame.drive(0.0)
    avg = frame.average
    A = compute_A_integral(frame)
    rho = float(frame.rr)
    return FirstOrderConstants(
        rho=rho, A=A, Abar=rho * A,
        B11=avg(K1 * s), B12=avg(K1 * c), B21=avg(K2 * s), B22=avg(K2 * c),
        B31=avg(K3 * c), B32=-avg(K3 * s),
    )


def epsilon1(fc: FirstOrderConstants, tau0):
    if fc.A == 0:
        raise CompatibilityError("A vanished; the solvability condition is degenerate")
    return (fc.D1 * np.cos(tau0) + fc.D2 * np.sin(tau0)) / fc.A


def drive_terms(frame: ResonanceFrame, tau0: float) -> np.ndarray:
    """First-order drive on the cycle: the mu coefficient of H at eps = 0, u = u0."""
    x0, u0 = frame.x0, frame.u0
    s, c = frame.drive(tau0)
    cubic = u0 * (u0 * u0 - 1.0)
    return x0 * frame.ud0 * (3 * u0 * u0 - 1.0) * s + x0 * x0 * cubic * s + x0 * cubic * c


@dataclass(frozen=True, eq=False)
class PeriodicResponse:
    u: FourierSeries
    Q0: float
    Q1_at_zero: float


def solve_periodic_response(frame: ResonanceFrame, psi: np.ndarray, v_bar: float = 0.0,
                            check: bool = True) -> PeriodicResponse:
    """Periodic y with L y + psi = 0, L the variational operator along u0.

    Variation of constants with w11 = a + exp(-f0 tau) b and w12 = c a gives
    y = c a (v_bar - Q1(0) + Q2 - Q2(0)) - c b Q1, where Q1' + f0 Q1 equals
    exp(F~) a phi and Q2 is the mean-free antiderivative of exp(F~) b phi,
    phi = -psi. Periodicity needs the mean Q0 of exp(F~) b phi to vanish.
    """
    phi = -psi
    P1 = frame.to_series(frame.eF * frame.a * phi)
    P2_vals = frame.eF * frame.b * phi
    Q0 = frame.average(P2_vals)
    if check and abs(Q0) > MEAN_TOL:
        raise CompatibilityError(f"solvability mean {Q0:.3e} exceeds {MEAN_TOL:g}")
    Q1, _ = exp_weighted_integral(P1, frame.f0)
    Q2 = frame.to_series(P2_vals).antiderivative()
    q1 = Q1.sample(frame.M)
    q2 = Q2.sample(frame.M)
    c = frame.c
    q1_0 = float(q1[0])
    y = c * frame.a * (v_bar - q1_0 + q2 - q2[0]) - c * frame.b * q1
    return PeriodicResponse(frame.to_series(y), Q0, q1_0)


def compute_u1(frame: ResonanceFrame, fc: FirstOrderConstants, tau0: float) -> FourierSeries:
    """First-order correction u1 (base 1/p) with eps1(tau0) fixed and v_bar = 0."""
    psi = drive_terms(frame, tau0) + float(epsilon1(fc, tau0)) * frame.eps_direction
    return solve_periodic_response(frame, psi).u
