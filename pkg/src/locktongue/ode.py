"""Vector fields of the divider model and an adaptive integrator.

Three coordinate systems appear: the reduced circuit (u, v) in original
time, the Lienard form (u, du/dtau) with an optional time scale, and the
driven equation in drive-normalized time tau = omega t.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, NamedTuple

import numpy as np
from scipy.integrate import solve_ivp

from .core import DimensionlessParams, IntegrationError

if TYPE_CHECKING:
    from .limit_cycle import LimitCycle

DEFAULT_TOL = 1e-10


class State2(NamedTuple):
    u: float
    v: float

    @property
    def sigma(self) -> float:
        return self.u + self.v


def rhs_circuit(state, t: float, p: DimensionlessParams) -> np.ndarray:
    """Reduced circuit field u' = alpha v + Phi(t) u (1 - u^2), v' = -u - v."""
    u, v = state[0], state[1]
    phi = p.beta + p.mu * np.sin(p.omega * t)
    return np.array([p.alpha * v + phi * u * (1.0 - u * u), -u - v])


def rhs_lienard(state, p: DimensionlessParams, rho_Omega0: float = 1.0) -> np.ndarray:
    """Unforced Lienard field (v, G(u, v)); rho_Omega0 = 1 gives unscaled time."""
    u, v = state[0], state[1]
    x = 1.0 / rho_Omega0
    return np.array([v, -x * p.h(u) * v - x * x * p.k(u)])


def lienard_jacobian(u, v, p: DimensionlessParams, rho_Omega0: float = 1.0):
    """Partial derivatives (G_u, G_v) of the Lienard field."""
    x = 1.0 / rho_Omega0
    G_u = -x * 6.0 * p.beta * u * v - x * x * (p.alpha - p.beta + 3.0 * p.beta * u * u)
    G_v = -x * p.h(u)
    return G_u, G_v


def rhs_variational(state, tau: float, lc: "LimitCycle") -> np.ndarray:
    """Linearization of the Lienard field along the cycle u0 at time tau."""
    u0 = lc.u0(tau)
    v0 = lc.udot(tau)
    G_u, G_v = lienard_jacobian(u0, v0, lc.params, lc.time_scale)
    return np.array([state[1], G_u * state[0] + G_v * state[1]])


def driven_inverse_frequency(rho: float, Omega0: float, eps: float) -> float:
    """1/omega = 1/(rho Omega0) + eps."""
    return 1.0 / (rho * Omega0) + eps


def rhs_driven_scaled(state, tau: float, p: DimensionlessParams, rho: float, Omega0: float,
                      eps: float, tau0: float) -> np.ndarray:
    """Driven equation in tau = omega t with drive phase tau + tau0, first-order form."""
    u, ud = state[0], state[1]
    x = driven_inverse_frequency(rho, Omega0, eps)
    s, c = np.sin(tau + tau0), np.cos(tau + tau0)
    cubic = u * u * u - u
    drive = x * ud * (3.0 * u * u - 1.0) * s + x * x * cubic * s + x * cubic * c
    return np.array([ud, -x * p.h(u) * ud - x * x * p.k(u) - p.mu * drive])


@dataclass(frozen=True)
class Trajectory:
    """Integrator output: accepted nodes plus a dense interpolant."""

    t: np.ndarray
    y: np.ndarray
    _dense: Callable

    def __call__(self, t):
        return self._dense(t)

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def t1(self) -> float:
        return float(self.t[-1])

    @property
    def final(self) -> np.ndarray:
        return self.y[:, -1].copy()

    def to_csv(self, path=None, header: dict | None = None, times=None) -> str:
        times = self.t if times is None else np.asarray(times)
        ys = self(times)
        buf = io.StringIO()
        if header:
            items = ((k, float(v) if isinstance(v, np.floating) else v) for k, v in header.items())
            buf.write("# " + " ".join(f"{k}={v!r}" for k, v in items) + "\n")
        cols = ["u", "v"] + [f"y{i}" for i in range(2, ys.shape[0])]
        buf.write("t," + ",".join(cols) + "\n")
        for i, ti in enumerate(times):
            buf.write(f"{float(ti)!r}," + ",".join(repr(float(x)) for x in ys[:, i]) + "\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def integrate(rhs: Callable, s0, t0: float, t1: float, tol: float = DEFAULT_TOL,
              max_step: float = np.inf) -> Trajectory:
    """Adaptive Dormand-Prince 8(5,3) integration of y' = rhs(t, y) with dense output.

    ``tol`` is used both as absolute and relative tolerance.
    """
    if not t1 > t0:
        raise ValueError("need t1 > t0")
    if not tol > 0:
        raise ValueError("tol must be positive")
    tol = max(tol, 3e-14)
    sol = solve_ivp(rhs, (t0, t1), np.asarray(s0, dtype=float), method="DOP853",
                    rtol=tol, atol=tol, dense_output=True, max_step=max_step)
    if sol.status != 0:
        raise IntegrationError(f"integration failed at t={sol.t[-1]}: {sol.message}")
    return Trajectory(sol.t, sol.y, sol.sol)
