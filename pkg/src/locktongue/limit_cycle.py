"""Unperturbed limit cycle: shooting, phase normalization and rescaling."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

from .core import (DEFAULT_HARMONICS, ConvergenceError, DimensionlessParams, FourierSeries,
                   ResonanceRatio, validate_alpha_beta)
from .ode import DEFAULT_TOL, integrate, rhs_lienard


@dataclass(frozen=True, eq=False)
class LimitCycle:
    """Periodic orbit of u'' + f(u) u' + g(u) = 0 with u'(0) = 0 and u(0) > 0.

    ``time_scale`` is 1 in original time; after :func:`rescale_cycle` it is
    rho * Omega0 and every time-dependent quantity refers to tau.
    """

    alpha: float
    beta: float
    Omega0: float
    u0: FourierSeries
    r0: float
    r1: float
    r2: float
    time_scale: float = 1.0
    rho: Fraction | None = None
    shooting_residual: float = 0.0

    @property
    def params(self) -> DimensionlessParams:
        return DimensionlessParams(self.alpha, self.beta)

    @property
    def T0(self) -> float:
        return 2 * math.pi / self.Omega0

    @property
    def period(self) -> float:
        return self.u0.period

    def f(self, u):
        return self.params.h(u) / self.time_scale

    def g(self, u):
        return self.params.k(u) / self.time_scale ** 2

    @cached_property
    def udot_series(self) -> FourierSeries:
        return self.u0.derivative()

    @cached_property
    def uddot_series(self) -> FourierSeries:
        return self.udot_series.derivative()

    def udot(self, t):
        return self.udot_series(t)

    def uddot(self, t):
        return self.uddot_series(t)

    def amplitude(self) -> float:
        return self.u0.max_abs()


def _downward_crossings(traj, t_start: float, t_end: float, dt: float = 0.01):
    """Times in [t_start, t_end] where v crosses zero downward with u > 0."""
    ts = np.arange(t_start, t_end, dt)
    ys = traj(ts)
    out = []
    for i in range(len(ts) - 1):
        if ys[1, i] > 0 >= ys[1, i + 1] and ys[0, i] > 0:
            tc = brentq(lambda s: traj(s)[1], ts[i], ts[i + 1], xtol=1e-15)
            out.append(tc)
    return out


def find_limit_cycle(alpha: float, beta: float, tol: float = DEFAULT_TOL,
                     n_harmonics: int = DEFAULT_HARMONICS, seed=(2.0, 0.0),
                     transient: float = 20.0, max_iter: int = 50, polish: bool = True,
                     max_harmonics: int = 256) -> LimitCycle:
    """Locate the cycle by shooting on (u(0), T0) with u'(0) = 0 built in.

    The shooting orbit is sampled into a Fourier series and, with ``polish``,
    refined by harmonic balance so that the series satisfies the truncated
    equation to roundoff. ``n_harmonics`` is then grown in steps of 32 until
    the spectral tail reaches roundoff (capped at ``max_harmonics``).
    """
    validate_alpha_beta(alpha, beta)
    p = DimensionlessParams(alpha, beta)
    int_tol = max(tol * 1e-2, 3e-14)

    def field(t, y):
        return rhs_lienard(y, p)

    traj = integrate(field, seed, 0.0, transient + 40.0, tol=1e-9)
    crossings = _downward_crossings(traj, transient, transient + 40.0)
    if len(crossings) < 2:
        raise ConvergenceError("no oscillation found after the transient")
    T = crossings[1] - crossings[0]
    u_start = float(traj(crossings[0])[0])

    def residual(x):
        end = integrate(field, (x[0], 0.0), 0.0, x[1], tol=int_tol).final
        return np.array([end[0] - x[0], end[1]])

    x = np.array([u_start, T])
    for _ in range(max_iter):
        F = residual(x)
        J = np.empty((2, 2))
        for j in range(2):
            step = 1e-7 * max(1.0, abs(x[j]))
            xs = x.copy()
            xs[j] += step
            J[:, j] = (residual(xs) - F) / step
        dx = np.linalg.solve(J, -F)
        x = x + dx
        if np.max(np.abs(dx)) < tol and np.max(np.abs(F)) < tol:
            break
    else:
        raise ConvergenceError(f"shooting did not converge in {max_iter} iterations")
    r0, T0 = float(x[0]), float(x[1])
    final_res = float(np.max(np.abs(residual(x))))
    if not final_res < tol:
        raise ConvergenceError(f"shooting residual {final_res:.3g} above tol {tol:.3g}")

    orbit = integrate(field, (r0, 0.0), 0.0, T0, tol=int_tol)
    Omega0 = 2 * math.pi / T0
    M = 4 * n_harmonics
    u0 = FourierSeries.from_samples(orbit(np.arange(M) * T0 / M)[0], Omega0, n_harmonics)
    if polish:
        u0 = _polish(u0, p, n_harmonics, max_harmonics)
        Omega0, r0 = u0.base_frequency, float(u0(0.0))
    r1 = -p.k(r0)
    r2 = -0.5 * p.h(r0) * r1
    return LimitCycle(alpha, beta, Omega0, u0, r0, r1, r2, shooting_residual=final_res)


def _spectral_diff_matrix(M: int) -> np.ndarray:
    nu = np.fft.fftfreq(M, 1.0 / M)
    return np.real(np.fft.ifft(1j * nu[:, None] * np.fft.fft(np.eye(M), axis=0), axis=0))


def harmonic_balance(u_guess: FourierSeries, p: DimensionlessParams, N: int,
                     max_iter: int = 40) -> tuple[FourierSeries, float]:
    """Collocation Newton on 2N+1 nodal values and Omega with u'(0) = 0.

    Returns the refined series (base = Omega) and the final nodal residual.
    No symmetry is imposed on the unknowns.
    """
    M = 2 * N + 1
    D = _spectral_diff_matrix(M)
    D2 = D @ D
    U = u_guess.with_base(1.0)(np.arange(M) * 2 * math.pi / M)
    W = u_guess.base_frequency
    b = p.beta
    for _ in range(max_iter):
        DU, D2U = D @ U, D2 @ U
        F = np.append(W * W * D2U + W * p.h(U) * DU + p.k(U), DU[0])
        J = np.zeros((M + 1, M + 1))
        J[:M, :M] = W * W * D2 + W * p.h(U)[:, None] * D
        J[:M, :M] += np.diag(6 * b * W * U * DU + p.alpha - b + 3 * b * U * U)
        J[:M, M] = 2 * W * D2U + p.h(U) * DU
        J[M, :M] = D[0]
        dx = np.linalg.solve(J, -F)
        U = U + dx[:M]
        W = W + dx[M]
        if np.max(np.abs(dx)) < 1e-13:
            break
    else:
        raise ConvergenceError("harmonic balance did not converge")
    DU, D2U = D @ U, D2 @ U
    res = float(np.max(np.abs(W * W * D2U + W * p.h(U) * DU + p.k(U))))
    return FourierSeries.from_samples(U, W, N), res


def _polish(u0: FourierSeries, p: DimensionlessParams, N: int, N_max: int) -> FourierSeries:
    # grow N until the last tenth of the spectrum sits at roundoff
    while True:
        refined, _ = harmonic_balance(u0.truncate(N), p, N)
        tail = np.max(np.abs(refined.coeffs[:max(N // 10, 2)]))
        if tail < 1e-15 * abs(refined.coefficient(1)) or N >= N_max:
            return refined
        N += 32


def rescale_cycle(lc: LimitCycle, rr: ResonanceRatio) -> LimitCycle:
    """Express the cycle in tau = rho Omega0 t, where its period is 2 pi rho."""
    if lc.rho is not None:
        raise ValueError("cycle is already rescaled")
    s = float(rr) * lc.Omega0
    return LimitCycle(
        lc.alpha, lc.beta, lc.Omega0,
        u0=lc.u0.with_base(lc.Omega0 / s),
        r0=lc.r0, r1=lc.r1 / s ** 2, r2=lc.r2 / s ** 3,
        time_scale=s, rho=rr.rho, shooting_residual=lc.shooting_residual,
    )
