"""Parameters, error types and truncated Fourier-series arithmetic.

Every periodic signal in the package is a :class:`FourierSeries`: complex
coefficients ``c[nu]`` for ``nu`` in ``[-N, N]`` on a stated base frequency,
so that ``s(t) = sum_nu c[nu] exp(1j * nu * base_frequency * t)``.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np

DEFAULT_HARMONICS = 64
TAIL_POWER_FLOOR = 1e-20


class LockTongueError(Exception):
    """Base class for all package errors."""


class ParameterError(LockTongueError, ValueError):
    pass


class NumericalError(LockTongueError, RuntimeError):
    """A computation ran but did not meet its numerical contract."""


class ConvergenceError(NumericalError):
    pass


class IntegrationError(NumericalError):
    pass


class DecompositionError(NumericalError):
    pass


class CompatibilityError(NumericalError):
    pass


class MeasurementError(NumericalError):
    pass


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise ParameterError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class CircuitParams:
    """Physical circuit values: L, C, R, gain A, drive amplitude B, V_DD, drive frequency."""

    L: float
    C: float
    R: float
    A: float
    B: float
    V_DD: float
    Omega_drive: float

    def __post_init__(self) -> None:
        _require_finite(L=self.L, C=self.C, R=self.R, A=self.A, B=self.B,
                        V_DD=self.V_DD, Omega_drive=self.Omega_drive)
        for name in ("L", "C", "R", "V_DD", "A"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive")


@dataclass(frozen=True)
class DimensionlessParams:
    alpha: float
    beta: float
    mu: float = 0.0
    omega: float = 1.0

    def __post_init__(self) -> None:
        _require_finite(alpha=self.alpha, beta=self.beta, mu=self.mu, omega=self.omega)

    def validate(self) -> "DimensionlessParams":
        validate_alpha_beta(self.alpha, self.beta)
        return self

    def h(self, u):
        """Damping of the unforced Lienard equation."""
        return 1.0 - self.beta + 3.0 * self.beta * u * u

    def k(self, u):
        """Restoring force of the unforced Lienard equation."""
        return u * (self.alpha - self.beta + self.beta * u * u)


def validate_alpha_beta(alpha: float, beta: float) -> None:
    _require_finite(alpha=alpha, beta=beta)
    if not alpha > beta > 1.0:
        raise ParameterError(
            f"need alpha > beta > 1 for a unique limit cycle, got alpha={alpha}, beta={beta}")


def circuit_to_dimensionless(cp: CircuitParams) -> DimensionlessParams:
    """Reduce circuit values to (alpha, beta, mu, omega); not validated here."""
    return DimensionlessParams(
        alpha=cp.L / (cp.R ** 2 * cp.C),
        beta=cp.L * cp.A / (cp.R * cp.C),
        mu=cp.L * cp.B / (cp.R * cp.C),
        omega=cp.Omega_drive * cp.L / cp.R,
    )


@dataclass(frozen=True)
class ResonanceRatio:
    """Resonance p:q, i.e. drive frequency over output frequency equal to p/q."""

    p: int
    q: int

    def __post_init__(self) -> None:
        if self.p < 1 or self.q < 1:
            raise ParameterError("p and q must be positive integers")
        if math.gcd(self.p, self.q) != 1:
            raise ParameterError(f"{self.p}:{self.q} is not in lowest terms")

    @classmethod
    def from_value(cls, value) -> "ResonanceRatio":
        frac = Fraction(value).limit_denominator(1000)
        return cls(frac.numerator, frac.denominator)

    @property
    def rho(self) -> Fraction:
        return Fraction(self.p, self.q)

    def __float__(self) -> float:
        return self.p / self.q

    @property
    def is_even_integer(self) -> bool:
        return self.q == 1 and self.p % 2 == 0

    def __str__(self) -> str:
        return f"{self.p}:{self.q}"


class ParityReport(NamedTuple):
    odd_power: float
    even_power: float
    total_power: float

    @property
    def even_fraction(self) -> float:
        return self.even_power / self.total_power if self.total_power else 0.0

    @property
    def odd_fraction(self) -> float:
        return self.odd_power / self.total_power if self.total_power else 0.0


def _index_map(N: int, M: int) -> np.ndarray:
    return np.arange(-N, N + 1) % M


@dataclass(frozen=True, eq=False)
class FourierSeries:
    """Real signal as a truncated complex trigonometric series.

    The reality condition ``c[-nu] == conj(c[nu])`` is enforced exactly on
    construction by symmetrizing the supplied coefficients.
    """

    coeffs: np.ndarray
    base_frequency: float

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or len(c) % 2 == 0:
            raise ValueError("coefficient array must have odd length 2N+1")
        if not self.base_frequency > 0:
            raise ValueError("base frequency must be positive")
        c = 0.5 * (c + np.conj(c[::-1]))
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "base_frequency", float(self.base_frequency))

    # construction -----------------------------------------------------
    @classmethod
    def zeros(cls, N: int, base_frequency: float) -> "FourierSeries":
        return cls(np.zeros(2 * N + 1, complex), base_frequency)

    @classmethod
    def constant(cls, value: float, base_frequency: float, N: int = 0) -> "FourierSeries":
        c = np.zeros(2 * N + 1, complex)
        c[N] = value
        return cls(c, base_frequency)

    @classmethod
    def harmonic(cls, nu: int, value: complex, base_frequency: float,
                 N: int | None = None) -> "FourierSeries":
        """``value * exp(i nu w t) + conj``; for nu = 0 just the real part of value."""
        N = abs(nu) if N is None else N
        c = np.zeros(2 * N + 1, complex)
        if nu == 0:
            c[N] = value.real if isinstance(value, complex) else value
        else:
            c[N + nu] += value
            c[N - nu] += np.conj(value)
        return cls(c, base_frequency)

    @classmethod
    def cosine(cls, nu: int, base_frequency: float, N: int | None = None,
               phase: float = 0.0) -> "FourierSeries":
        """cos(nu w t + phase)."""
        return cls.harmonic(nu, 0.5 * np.exp(1j * phase), base_frequency, N)

    @classmethod
    def sine(cls, nu: int, base_frequency: float, N: int | None = None,
             phase: float = 0.0) -> "FourierSeries":
        """sin(nu w t + phase)."""
        return cls.harmonic(nu, -0.5j * np.exp(1j * phase), base_frequency, N)

    @classmethod
    def from_samples(cls, samples, base_frequency: float, N: int | None = None) -> "FourierSeries":
        """Coefficients from uniform samples over one period starting at t = 0."""
        samples = np.asarray(samples, dtype=float)
        M = len(samples)
        if N is None:
            N = (M - 1) // 2
        if 2 * N + 1 > M:
            raise ValueError(f"{M} samples cannot resolve {N} harmonics")
        spec = np.fft.fft(samples) / M
        return cls(spec[_index_map(N, M)], base_frequency)

    @classmethod
    def from_function(cls, func: Callable, base_frequency: float, N: int,
                      oversample: int = 4) -> "FourierSeries":
        M = max(oversample * N, 2 * N + 1)
        t = np.arange(M) * (2 * np.pi / base_frequency) / M
        return cls.from_samples(func(t), base_frequency, N)

    # basic properties -------------------------------------------------
    @property
    def N(self) -> int:
        return (len(self.coeffs) - 1) // 2

    @property
    def period(self) -> float:
        return 2 * np.pi / self.base_frequency

    @property
    def mean(self) -> float:
        return float(self.coeffs[self.N].real)

    @property
    def nu(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    def coefficient(self, nu: int) -> complex:
        return complex(self.coeffs[self.N + nu]) if abs(nu) <= self.N else 0j

    def power(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def amplitude(self) -> float:
        """Upper bound on max |s(t)|."""
        return float(np.sum(np.abs(self.coeffs)))

    def tail_ratio(self) -> float:
        total = self.power()
        if total == 0.0 or self.N == 0:
            return 0.0
        return float(2 * abs(self.coeffs[-1]) ** 2 / total)

    def is_adequate(self, floor: float = TAIL_POWER_FLOOR) -> bool:
        return self.tail_ratio() < floor

    # evaluation -------------------------------------------------------
    def __call__(self, t):
        return fourier_eval(self, t)

    def sample(self, M: int) -> np.ndarray:
        """Values on M uniform points of one period (exact for M > 2N)."""
        if M < 2 * self.N + 1:
            raise ValueError("grid too coarse for this series")
        spec = np.zeros(M, complex)
        np.add.at(spec, _index_map(self.N, M), self.coeffs)
        return np.fft.ifft(spec).real * M

    def grid(self, M: int) -> np.ndarray:
        return np.arange(M) * self.period / M

    # algebra ----------------------------------------------------------
    def truncate(self, N: int) -> "FourierSeries":
        if N >= self.N:
            c = np.zeros(2 * N + 1, complex)
            c[N - self.N:N + self.N + 1] = self.coeffs
        else:
            c = self.coeffs[self.N - N:self.N + N + 1]
        return FourierSeries(c, self.base_frequency)

    def _check_base(self, other: "FourierSeries") -> None:
        if not math.isclose(self.base_frequency, other.base_frequency, rel_tol=1e-13):
            raise ValueError(
                f"base frequency mismatch: {self.base_frequency} vs {other.base_frequency}")

    def __add__(self, other):
        if isinstance(other, FourierSeries):
            self._check_base(other)
            N = max(self.N, other.N)
            return FourierSeries(self.truncate(N).coeffs + other.truncate(N).coeffs,
                                 self.base_frequency)
        return self + FourierSeries.constant(float(other), self.base_frequency)

    __radd__ = __add__

    def __neg__(self):
        return FourierSeries(-self.coeffs, self.base_frequency)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, FourierSeries):
            return fourier_product(self, other)
        return FourierSeries(self.coeffs * float(other), self.base_frequency)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float):
        return FourierSeries(self.coeffs / float(scalar), self.base_frequency)

    def derivative(self) -> "FourierSeries":
        return fourier_derivative(self)

    def antiderivative(self) -> "FourierSeries":
        """Primitive of the mean-free part, normalized to vanish at t = 0."""
        nu = self.nu
        c = np.zeros_like(self.coeffs)
        nz = nu != 0
        c[nz] = self.coeffs[nz] / (1j * nu[nz] * self.base_frequency)
        c[self.N] = -np.sum(c[nz]).real
        return FourierSeries(c, self.base_frequency)

    def map(self, func: Callable[[np.ndarray], np.ndarray], N: int | None = None,
            oversample: int = 4) -> "FourierSeries":
        """Apply a pointwise nonlinearity via sampling on an oversampled grid."""
        N = self.N if N is None else N
        M = max(oversample * max(N, self.N), 2 * self.N + 1)
        return FourierSeries.from_samples(func(self.sample(M)), self.base_frequency, N)

    def embed(self, factor: int) -> "FourierSeries":
        """Same signal on base frequency ``base/factor`` (harmonic nu -> factor*nu)."""
        if factor == 1:
            return self
        N = self.N * factor
        c = np.zeros(2 * N + 1, complex)
        c[N + factor * self.nu] = self.coeffs
        return FourierSeries(c, self.base_frequency / factor)

    def with_base(self, base_frequency: float) -> "FourierSeries":
        """Same coefficients on a new base (time rescaling)."""
        return FourierSeries(self.coeffs, base_frequency)

    def max_abs(self, M: int | None = None) -> float:
        M = M or max(8 * self.N, 64)
        return float(np.max(np.abs(self.sample(M))))

    # io ---------------------------------------------------------------
    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write(f"# base_frequency={self.base_frequency!r} N={self.N}\n")
        buf.write("nu,re,im\n")
        for n, cn in zip(self.nu, self.coeffs):
            buf.write(f"{n},{float(cn.real)!r},{float(cn.imag)!r}\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "FourierSeries":
        if hasattr(source, "read"):
            text = source.read()
        elif "\n" in str(source):
            text = str(source)
        else:
            with open(source) as fh:
                text = fh.read()
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        header = dict(tok.split("=") for tok in lines[0].lstrip("#").split())
        base, N = float(header["base_frequency"]), int(header["N"])
        c = np.zeros(2 * N + 1, complex)
        for ln in lines[1:]:
            if ln.startswith("nu"):
                continue
            n, re, im = ln.split(",")
            c[int(n) + N] = complex(float(re), float(im))
        return cls(c, base)


def fourier_eval(s: FourierSeries, t):
    """Sum of the series at time(s) t, returned as real values."""
    t = np.asarray(t, dtype=float)
    phase = np.exp(1j * s.base_frequency * np.multiply.outer(t, s.nu))
    return (phase @ s.coeffs).real


def fourier_product(a: FourierSeries, b: FourierSeries, headroom: int = 0) -> FourierSeries:
    """Exact convolution of coefficients, truncated to ``max(Na, Nb) + headroom``."""
    a._check_base(b)
    N_out = max(a.N, b.N) + headroom
    M = 2 * (a.N + b.N) + 2
    prod = a.sample(M) * b.sample(M)
    return FourierSeries.from_samples(prod, a.base_frequency, min(N_out, a.N + b.N)).truncate(N_out)


def fourier_derivative(s: FourierSeries) -> FourierSeries:
    return FourierSeries(s.coeffs * (1j * s.nu * s.base_frequency), s.base_frequency)


def exp_weighted_integral(P: FourierSeries, C: float) -> tuple[FourierSeries, float]:
    """Periodic Q and constant D with int_0^t exp(C s) P(s) ds = D + exp(C t) Q(t).

    ``Q[nu] = P[nu] / (C + i nu w)`` and ``D = -Q(0)``. C must be nonzero even
    when P has zero mean; the mean-free, C = 0 case is a plain antiderivative.
    """
    if C == 0:
        if P.mean != 0:
            raise ValueError("C = 0 with nonzero mean produces a secular term")
        raise ValueError("exp_weighted_integral requires C != 0; use antiderivative()")
    Q = FourierSeries(P.coeffs / (C + 1j * P.nu * P.base_frequency), P.base_frequency)
    D = -float(np.sum(Q.coeffs).real)
    return Q, D


def harmonic_parity(s: FourierSeries) -> ParityReport:
    odd = np.abs(s.nu) % 2 == 1
    pw = np.abs(s.coeffs) ** 2
    return ParityReport(float(pw[odd].sum()), float(pw[~odd].sum()), float(pw.sum()))
