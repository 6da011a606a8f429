"""Order-by-order recursion for eps_k(tau0), u_k and the tongue prediction.

Each order k works with truncated power series in mu whose coefficients are
grid samples on the common 2 pi p period. Substituting
u = sum_{j<k} mu^j u_j and x = x0 + sum_{j<k} eps_j mu^j into the driven
equation and reading off the mu^k coefficient gives Xi_k; the unknowns u_k
and eps_k enter that coefficient only through L u_k + eps_k (h u0' + 2 x0 k).
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .compatibility import (MEAN_TOL, ResonanceFrame, compute_B_constants, resonance_frame,
                            solve_periodic_response)
from .core import CompatibilityError, FourierSeries, ResonanceRatio
from .ode import DEFAULT_TOL

DEFAULT_ORDER = 3
DEFAULT_GRID = 64
DEGENERATE_AMPLITUDE = 1e-12


def _ps_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cauchy product of two truncated mu-series with rows as coefficients."""
    K = a.shape[0] - 1
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    for i in range(K + 1):
        out[i:] += a[i] * b[:K + 1 - i]
    return out


def _ps_shift(a: np.ndarray) -> np.ndarray:
    """Multiply by mu."""
    out = np.zeros_like(a)
    out[1:] = a[:-1]
    return out


def driven_operator_series(frame: ResonanceFrame, U, Ud, Udd, X, tau0: float) -> np.ndarray:
    """mu-series of H(u; x, mu) for series U, Ud, Udd (K+1, M) and X (K+1,)."""
    p = frame.lc.params
    X = np.asarray(X, dtype=float)[:, None] * np.ones((1, U.shape[1]))
    s, c = frame.drive(tau0)
    U2 = _ps_mul(U, U)
    U3 = _ps_mul(U2, U)
    one = np.zeros_like(U)
    one[0] = 1.0
    h = (1 - p.beta) * one + 3 * p.beta * U2
    k = (p.alpha - p.beta) * U + p.beta * U3
    X2 = _ps_mul(X, X)
    cubic = U3 - U
    drive = (_ps_mul(_ps_mul(X, Ud), 3 * U2 - one) * s + _ps_mul(X2, cubic) * s
             + _ps_mul(X, cubic) * c)
    return Udd + _ps_mul(_ps_mul(X, h), Ud) + _ps_mul(X2, k) + _ps_shift(drive)


def assemble_Hk(frame: ResonanceFrame, k: int, eps, us: list[FourierSeries], tau0: float) -> np.ndarray:
    """Xi_k on the frame grid: the mu^k coefficient with u_k = 0 and eps_k = 0.

    ``eps`` holds eps_1..eps_{k-1}; ``us`` holds u_1..u_{k-1} as frame series.
    """
    if k < 1:
        raise ValueError("order k must be >= 1")
    if len(eps) < k - 1 or len(us) < k - 1:
        raise ValueError("lower orders missing")
    M = frame.M
    U, Ud, Udd = (np.zeros((k + 1, M)) for _ in range(3))
    U[0], Ud[0], Udd[0] = frame.u0, frame.ud0, frame.udd0
    for j in range(1, k):
        uj = us[j - 1]
        U[j] = uj.sample(M)
        d = uj.derivative()
        Ud[j] = d.sample(M)
        Udd[j] = d.derivative().sample(M)
    X = np.zeros(k + 1)
    X[0] = frame.x0
    X[1:k] = eps[:k - 1]
    return driven_operator_series(frame, U, Ud, Udd, X, tau0)[k]


@dataclass
class OrderKState:
    """Recursion output at a single tau0."""

    frame: ResonanceFrame
    tau0: float
    A: float
    eps: list[float] = field(default_factory=list)
    us: list[FourierSeries] = field(default_factory=list)
    Q0: list[float] = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.eps)

    def epsilon(self, mu: float, order: int | None = None) -> float:
        order = self.k if order is None else order
        return sum(e * mu ** (j + 1) for j, e in enumerate(self.eps[:order]))

    def solution(self, mu: float, order: int | None = None) -> FourierSeries:
        """u0 + sum mu^j u_j as a frame series."""
        order = self.k if order is None else order
        fr = self.frame
        vals = fr.u0 + sum(mu ** (j + 1) * u.sample(fr.M) for j, u in enumerate(self.us[:order]))
        return fr.to_series(vals)

    def residual(self, mu: float, order: int | None = None, M: int | None = None) -> float:
        """sup over tau of |H| for the truncated reconstruction."""
        order = self.k if order is None else order
        fr = self.frame
        u = self.solution(mu, order)
        M = M or fr.M
        ud = u.derivative()
        U, Ud, Udd = u.sample(M), ud.sample(M), ud.derivative().sample(M)
        x = fr.x0 + self.epsilon(mu, order)
        p = fr.lc.params
        tau = np.arange(M) * fr.period / M + self.tau0
        s, c = np.sin(tau), np.cos(tau)
        cubic = U ** 3 - U
        H = (Udd + x * p.h(U) * Ud + x * x * p.k(U)
             + mu * (x * Ud * (3 * U * U - 1) * s + x * x * cubic * s + x * cubic * c))
        return float(np.max(np.abs(H)))


def solve_order_k(state: OrderKState, k: int | None = None) -> tuple[float, FourierSeries]:
    """Advance the recursion by one order; returns (eps_k, u_k)."""
    k = state.k + 1 if k is None else k
    if k != state.k + 1:
        raise ValueError(f"next order is {state.k + 1}, not {k}")
    if state.A == 0:
        raise CompatibilityError("A vanished; the solvability condition is degenerate")
    fr = state.frame
    xi = assemble_Hk(fr, k, state.eps, state.us, state.tau0)
    eps_k = -fr.average(fr.eF * fr.b * xi) / state.A
    psi = xi + eps_k * fr.eps_direction
    resp = solve_periodic_response(fr, psi)
    state.eps.append(eps_k)
    state.us.append(resp.u)
    state.Q0.append(resp.Q0)
    return eps_k, resp.u


def run_recursion(frame: ResonanceFrame, tau0: float, k_max: int, A: float | None = None) -> OrderKState:
    if A is None:
        A = compute_B_constants(frame).A
    state = OrderKState(frame, float(tau0), A)
    for _ in range(k_max):
        solve_order_k(state)
    return state


@dataclass
class TauGrid:
    """Recursion over a uniform tau0 grid; eps has shape (grid, k_max)."""

    frame: ResonanceFrame
    tau0: np.ndarray
    states: list[OrderKState]

    @property
    def eps(self) -> np.ndarray:
        return np.array([s.eps for s in self.states])

    @property
    def k_max(self) -> int:
        return self.states[0].k

    def max_Q0(self) -> float:
        return float(max(max(abs(q) for q in s.Q0) for s in self.states))

    def eps_spectrum(self) -> np.ndarray:
        """|DFT| in tau0 of each eps_k, shape (grid, k_max), index = tau0 harmonic."""
        return np.abs(np.fft.fft(self.eps, axis=0)) / len(self.tau0)


def solve_tau_grid(frame: ResonanceFrame, k_max: int = DEFAULT_ORDER, grid: int = DEFAULT_GRID,
                   threads: int = 1) -> TauGrid:
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    tau0 = np.arange(grid) * 2 * math.pi / grid
    A = compute_B_constants(frame).A

    def one(t):
        return run_recursion(frame, t, k_max, A)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            states = list(ex.map(one, tau0))
    else:
        states = [one(t) for t in tau0]
    return TauGrid(frame, tau0, states)


def _periodic_extremum(values: np.ndarray, which: str) -> tuple[float, float]:
    """Extremum of periodic samples refined by a parabola through the best point."""
    n = len(values)
    i = int(np.argmax(values) if which == "max" else np.argmin(values))
    ym, y0, yp = values[(i - 1) % n], values[i], values[(i + 1) % n]
    denom = ym - 2 * y0 + yp
    if denom == 0:
        return y0, float(i)
    d = 0.5 * (ym - yp) / denom
    if abs(d) > 1:
        return y0, float(i)
    return float(y0 - 0.25 * (ym - yp) * d), i + d


def scaling_exponent(rr: ResonanceRatio) -> int:
    """Order in mu of the tongue width: q for even p, 2q for odd p."""
    return rr.q if rr.p % 2 == 0 else 2 * rr.q


@dataclass(frozen=True)
class TonguePrediction:
    p: int
    q: int
    mu: float
    k_max: int
    rho_Omega0: float
    eps_min: float
    eps_max: float
    omega_min: float
    omega_max: float
    tau0_at_min: float
    tau0_at_max: float
    exponent: int

    @property
    def rho(self) -> float:
        return self.p / self.q

    @property
    def width(self) -> float:
        return self.omega_max - self.omega_min

    @property
    def center(self) -> float:
        return 0.5 * (self.omega_max + self.omega_min)


def omega_bounds(rho_Omega0: float, eps_min: float, eps_max: float) -> tuple[float, float]:
    """omega = 1/(1/(rho Omega0) + eps); larger eps means lower omega."""
    x0 = 1.0 / rho_Omega0
    return 1.0 / (x0 + eps_max), 1.0 / (x0 + eps_min)


def tongue_from_grid(tg: TauGrid, mu: float, order: int | None = None) -> TonguePrediction:
    order = tg.k_max if order is None else order
    fr = tg.frame
    powers = mu ** np.arange(1, order + 1)
    eps = tg.eps[:, :order] @ powers
    step = 2 * math.pi / len(tg.tau0)
    eps_max, i_max = _periodic_extremum(eps, "max")
    eps_min, i_min = _periodic_extremum(eps, "min")
    if mu == 0:
        eps_max = eps_min = 0.0
    w_lo, w_hi = omega_bounds(fr.lc.time_scale, eps_min, eps_max)
    return TonguePrediction(
        p=fr.rr.p, q=fr.rr.q, mu=mu, k_max=order, rho_Omega0=fr.lc.time_scale,
        eps_min=eps_min, eps_max=eps_max, omega_min=w_lo, omega_max=w_hi,
        tau0_at_min=(i_min * step) % (2 * math.pi), tau0_at_max=(i_max * step) % (2 * math.pi),
        exponent=scaling_exponent(fr.rr),
    )


def predict_tongue(alpha: float, beta: float, rr: ResonanceRatio, mu: float,
                   k_max: int = DEFAULT_ORDER, grid: int = DEFAULT_GRID,
                   tol: float = DEFAULT_TOL, threads: int = 1) -> TonguePrediction:
    """Predicted locking interval [omega_min, omega_max] for the p:q resonance."""
    if grid < 32:
        raise ValueError("tau0 grid needs at least 32 points")
    if mu < 0:
        raise ValueError("mu must be non-negative")
    frame = resonance_frame(alpha, beta, rr.p, rr.q, tol)
    if k_max == 1 and rr.is_even_integer:
        fc = compute_B_constants(frame)
        if math.hypot(fc.D1, fc.D2) < DEGENERATE_AMPLITUDE:
            warnings.warn("first-order amplitude cancels; using second order", RuntimeWarning)
            k_max = 2
    tg = solve_tau_grid(frame, k_max, grid, threads)
    if tg.max_Q0() > MEAN_TOL:
        raise CompatibilityError("solvability mean left nonzero")
    return tongue_from_grid(tg, mu)
