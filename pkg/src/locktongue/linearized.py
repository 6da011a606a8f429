"""Variational equation along the cycle: Wronskian, damping and Floquet splitting.

The fundamental matrix W(tau) of the linearized Lienard field is integrated
directly. Its (1,1) entry is split as w11 = a + exp(-f0 tau) b with a and b
periodic, a proportional to du0/dtau, via the Floquet formula

    b(tau) = exp(f0 tau) (w11(tau) - w11(tau + P)) / (1 - exp(-f0 P)),

where P = 2 pi rho is the period of the rescaled cycle. The formula divides
by exp(-f0 tau), so integration error near tau = P is amplified by up to
1/lambda; b is therefore refined by collocating its own periodic ODE, with
the Floquet estimate kept as a cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .core import DecompositionError, FourierSeries
from .limit_cycle import LimitCycle, _spectral_diff_matrix
from .ode import DEFAULT_TOL, Trajectory, integrate, lienard_jacobian

FIT_RESIDUAL_MAX = 1e-6
VERIFY_POINTS = 256


@dataclass(frozen=True, eq=False)
class WronskianData:
    rho: Fraction
    f0: float
    f_series: FourierSeries
    tildeF: FourierSeries
    a: FourierSeries
    b: FourierSeries
    c: float
    c1: float
    c2: float
    bar_tau: float
    floquet_multiplier: float
    monodromy: np.ndarray
    tau_grid: np.ndarray
    W_grid: np.ndarray
    fit_residual: float
    floquet_discrepancy: float = 0.0
    n_zeros_w11: int = 1

    @property
    def period(self) -> float:
        return self.a.period

    @cached_property
    def exp_tildeF(self) -> FourierSeries:
        return self.tildeF.map(np.exp)

    def F(self, tau):
        return self.f0 * np.asarray(tau) + self.tildeF(tau)

    def w11(self, tau):
        tau = np.asarray(tau, dtype=float)
        return self.a(tau) + np.exp(-self.f0 * tau) * self.b(tau)

    def w12(self, tau):
        return self.c * self.a(tau)

    def multipliers(self) -> np.ndarray:
        return np.sort(np.linalg.eigvals(self.monodromy).real)

    def rescaled_b(self, s: float) -> "WronskianData":
        """Same data with b -> s b and c -> c / s (normalization probe)."""
        return replace(self, b=self.b * s, c=self.c / s)


def compute_damping(lc: LimitCycle) -> tuple[float, FourierSeries, FourierSeries]:
    """Mean damping f0 and the periodic part tildeF of F(tau) = int_0^tau f(u0).

    Returns ``(f0, tildeF, f_series)`` with tildeF(0) = 0.
    """
    f_series = lc.u0.map(lc.f)
    f0 = f_series.mean
    return f0, f_series.antiderivative(), f_series


def integrate_wronskian(lc: LimitCycle, tol: float = DEFAULT_TOL, periods: float = 2.0) -> Trajectory:
    """Cycle and fundamental matrix together: y = (u0, v0, w11, w12, w21, w22), W(0) = 1."""
    params, s = lc.params, lc.time_scale

    def field(tau, y):
        u, v = y[0], y[1]
        x = 1.0 / s
        G = -x * params.h(u) * v - x * x * params.k(u)
        G_u, G_v = lienard_jacobian(u, v, params, s)
        return np.array([v, G, y[4], y[5], G_u * y[2] + G_v * y[4], G_u * y[3] + G_v * y[5]])

    return integrate(field, [lc.r0, 0.0, 1.0, 0.0, 0.0, 1.0], 0.0, periods * lc.period,
                     tol=max(tol * 1e-2, 3e-14))


def _zeros_of_w11(traj: Trajectory, half_period: float, n_scan: int = 4000):
    ts = np.linspace(0.0, half_period, n_scan + 1)[1:-1]
    w = traj(ts)[2]
    idx = np.nonzero(np.sign(w[:-1]) != np.sign(w[1:]))[0]
    return [brentq(lambda t: traj(t)[2], ts[i], ts[i + 1], xtol=1e-14) for i in idx]


def floquet_b_samples(traj: Trajectory, f0: float, period: float, tau) -> np.ndarray:
    """b(tau) straight from the Floquet formula; needs traj on [0, tau + period]."""
    tau = np.asarray(tau, dtype=float)
    lam = math.exp(-f0 * period)
    return np.exp(f0 * tau) * (traj(tau)[2] - traj(tau + period)[2]) / (1.0 - lam)


def collocate_b(lc: LimitCycle, f0: float, N: int | None = None) -> FourierSeries:
    """Periodic b with exp(-f0 tau) b solving the variational equation and b(0) = 1.

    Substituting psi = exp(-f0 tau) b into psi'' = G_u psi + G_v psi' gives
    b'' - 2 f0 b' + f0^2 b - G_u b - G_v (b' - f0 b) = 0, solved as the
    null vector of its collocation matrix.
    """
    N = lc.u0.N if N is None else N
    M = 2 * N + 1
    w = lc.u0.base_frequency
    D = _spectral_diff_matrix(M) * w
    tau = np.arange(M) * 2 * math.pi / (w * M)
    G_u, G_v = lienard_jacobian(lc.u0(tau), lc.udot(tau), lc.params, lc.time_scale)
    I = np.eye(M)
    L = D @ D - 2 * f0 * D + f0 * f0 * I - np.diag(G_u) - G_v[:, None] * (D - f0 * I)
    rhs = np.zeros(M + 1)
    rhs[-1] = 1.0
    b = np.linalg.lstsq(np.vstack([L, I[0]]), rhs, rcond=None)[0]
    return FourierSeries.from_samples(b, w, N)


def decompose_w11(traj: Trajectory, f0: float, lc: LimitCycle, N: int | None = None):
    """Floquet splitting of w11.

    Returns ``(a, b, c, bar_tau, fit_residual, floquet_discrepancy, n_zeros)``;
    the discrepancy compares the collocated b with the raw Floquet formula.
    """
    if not f0 > 0:
        raise DecompositionError(f"mean damping must be positive, got {f0}")
    P = lc.period
    N = lc.u0.N if N is None else N
    M = 4 * N
    tau = np.arange(M) * P / M
    b_floquet = floquet_b_samples(traj, f0, P, tau)
    b = collocate_b(lc, f0, N)
    b_vals = b(tau)
    discrepancy = float(np.max(np.abs(b_vals - b_floquet)) / np.max(np.abs(b_vals)))
    Y0 = traj(tau)
    a_vals = Y0[2] - np.exp(-f0 * tau) * b_vals
    a = FourierSeries.from_samples(a_vals, lc.u0.base_frequency, N)

    w12 = Y0[3]
    mask = np.abs(a_vals) > 0.1 * np.max(np.abs(a_vals))
    c = float(np.dot(w12[mask], a_vals[mask]) / np.dot(a_vals[mask], a_vals[mask]))
    fit_residual = float(np.max(np.abs(w12 - c * a_vals)) / np.max(np.abs(w12)))
    if fit_residual > FIT_RESIDUAL_MAX:
        raise DecompositionError(f"w12 is not proportional to a (residual {fit_residual:.2e})")

    zeros = _zeros_of_w11(traj, 0.5 * P)
    if not zeros:
        raise DecompositionError("w11 has no zero in (0, pi rho)")
    return a, b, c, zeros[0], fit_residual, discrepancy, len(zeros)


def build_wronskian(lc: LimitCycle, tol: float = DEFAULT_TOL) -> WronskianData:
    """All linearized data for a rescaled cycle."""
    if lc.rho is None:
        raise ValueError("build_wronskian expects a rescaled cycle")
    f0, tildeF, f_series = compute_damping(lc)
    traj = integrate_wronskian(lc, tol)
    a, b, c, bar_tau, fit_residual, discrepancy, n_zeros = decompose_w11(traj, f0, lc)

    P = lc.period
    tau_grid = np.arange(VERIFY_POINTS) * P / VERIFY_POINTS
    Y = traj(tau_grid)
    W_grid = Y[2:].T.reshape(-1, 2, 2)
    v0 = Y[1]
    vdot0 = -lc.f(Y[0]) * v0 - lc.g(Y[0])
    # c2 from w12 = c2 * du0/dtau; c1 from the Abel identity w11 u0'' - w21 u0' = -c1 exp(-F)
    c2 = float(np.dot(Y[3], v0) / np.dot(v0, v0))
    F = f0 * tau_grid + tildeF(tau_grid)
    c1 = float(np.mean(-np.exp(F) * (Y[2] * vdot0 - Y[4] * v0)))
    monodromy = traj(P)[2:].reshape(2, 2)
    return WronskianData(
        rho=lc.rho, f0=f0, f_series=f_series, tildeF=tildeF, a=a, b=b, c=c, c1=c1, c2=c2,
        bar_tau=bar_tau, floquet_multiplier=math.exp(-f0 * P), monodromy=monodromy,
        tau_grid=tau_grid, W_grid=W_grid, fit_residual=fit_residual,
        floquet_discrepancy=discrepancy, n_zeros_w11=n_zeros,
    )


class SmoothnessReport(NamedTuple):
    log_coefficient: float        # 2 r2 / r1 + f(r0)
    jet_identity: float           # 2 r2 + f(r0) r1, with r2 read off the spectral u0'''
    w11dot_at_zero: float
    w11dot_right: float
    w11dot_left: float


def _richardson_slope(func, h: float, sign: float) -> float:
    """One-sided derivative at 0 with two Richardson levels (error O(h^3))."""
    def d(step):
        return (func(sign * step) - func(0.0)) / (sign * step)
    d1, d2, d4 = d(h), d(h / 2), d(h / 4)
    r1, r2 = 2 * d2 - d1, 2 * d4 - d2
    return (4 * r2 - r1) / 3


def smoothness_probe(lc: LimitCycle, wd: WronskianData, h: float = 1e-3) -> SmoothnessReport:
    r0, r1 = lc.r0, lc.r1
    r2_spectral = 0.5 * float(lc.uddot_series.derivative()(0.0))
    w11 = lambda t: float(wd.w11(t))
    return SmoothnessReport(
        log_coefficient=2 * lc.r2 / r1 + float(lc.f(r0)),
        jet_identity=2 * r2_spectral + float(lc.f(r0)) * r1,
        w11dot_at_zero=float(wd.a.derivative()(0.0) + wd.b.derivative()(0.0) - wd.f0 * wd.b(0.0)),
        w11dot_right=_richardson_slope(w11, h, +1.0),
        w11dot_left=_richardson_slope(w11, h, -1.0),
    )
