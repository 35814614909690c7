"""Exact inversion of rational Laplace transforms by partial fractions.

Polynomials are stored as coefficient tuples, highest degree first (the
``numpy.polyval`` convention). Poles of a :class:`RationalLaplace` are found
with the Aberth iteration; repeated roots are detected by clustering and
re-polished on the derivative. :class:`PoleExpansion` also accepts poles with
known locations and arbitrary multiplicity, which is how the jump-count
probabilities (poles of order up to 42) are inverted.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import InvalidInputError, NumericalError

MAX_DEGREE = 6
_CLUSTER_RTOL = 1e-5


def _trim(coeffs: Sequence[float]) -> tuple[float, ...]:
    c = [float(x) for x in coeffs]
    while len(c) > 1 and c[0] == 0.0:
        c.pop(0)
    return tuple(c)


@dataclass(frozen=True)
class RationalLaplace:
    """F(u) = numerator(u) / denominator(u) in the Laplace variable ``u``."""

    numerator: tuple[float, ...]
    denominator: tuple[float, ...]

    def __post_init__(self):
        num = _trim(self.numerator)
        den = _trim(self.denominator)
        if len(den) == 1 and den[0] == 0.0:
            raise InvalidInputError("denominator is the zero polynomial")
        if len(num) > len(den):
            raise InvalidInputError("improper rational function: deg(numerator) > deg(denominator)")
        if len(den) - 1 > MAX_DEGREE:
            raise InvalidInputError(f"denominator degree {len(den) - 1} exceeds {MAX_DEGREE}")
        if not all(map(math.isfinite, num + den)):
            raise InvalidInputError("non-finite coefficient")
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)

    @property
    def degree(self) -> int:
        return len(self.denominator) - 1

    def __call__(self, u):
        return np.polyval(self.numerator, u) / np.polyval(self.denominator, u)

    @property
    def direct_term(self) -> float:
        """Constant part (a delta at t=0 in the time domain) for equal degrees."""
        if len(self.numerator) == len(self.denominator):
            return self.numerator[0] / self.denominator[0]
        return 0.0

    def initial_value(self) -> float:
        """f(0+) = lim u F(u) of the regular part."""
        num = np.polysub(self.numerator, np.multiply(self.direct_term, self.denominator))
        num = _trim(num)
        if len(num) < len(self.denominator) - 1:
            return 0.0
        return num[0] / self.denominator[0]

    def derivative_transform(self) -> "RationalLaplace":
        """Transform of the time derivative of the regular part: u F(u) - f(0+)."""
        num = np.polysub(self.numerator, np.multiply(self.direct_term, self.denominator))
        new_num = np.polysub(np.polymul(num, [1.0, 0.0]), np.multiply(self.initial_value(), self.denominator))
        return RationalLaplace(_trim(new_num), self.denominator)


@dataclass(frozen=True)
class IntervalSet:
    """Ordered, disjoint open intervals ``(a_i, b_i)``."""

    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        prev = -math.inf
        for a, b in ivs:
            if not (math.isfinite(a) and math.isfinite(b)) or a < 0:
                raise InvalidInputError(f"bad interval endpoints ({a}, {b})")
            if not a < b:
                raise InvalidInputError(f"empty interval ({a}, {b})")
            if a < prev:
                raise InvalidInputError("intervals overlap or are unordered")
            prev = b
        object.__setattr__(self, "intervals", ivs)

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def __getitem__(self, i):
        return self.intervals[i]

    def __bool__(self):
        return bool(self.intervals)

    def contains(self, t: float) -> bool:
        return any(a < t < b for a, b in self.intervals)

    @property
    def total_length(self) -> float:
        return sum(b - a for a, b in self.intervals)


def polynomial_roots(coeffs: Sequence[complex], tol: float = 1e-13, maxiter: int = 500) -> np.ndarray:
    """All complex roots of a polynomial by the Aberth-Ehrlich iteration."""
    c = np.asarray(coeffs, dtype=complex)
    nz = np.flatnonzero(c)
    if nz.size == 0:
        raise InvalidInputError("zero polynomial has no well-defined roots")
    c = c[nz[0]:] / c[nz[0]]
    n = c.size - 1
    if n == 0:
        return np.empty(0, dtype=complex)
    dc = np.polyder(c)
    # Fujiwara bound on root moduli.
    bound = 2.0 * max(abs(c[k]) ** (1.0 / k) for k in range(1, n + 1))
    bound = bound if bound > 0 else 1.0
    z = 0.5 * bound * np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))
    for _ in range(maxiter):
        p = np.polyval(c, z)
        dp = np.polyval(dc, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dp != 0, p / dp, 0.0)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            w = ratio / (1.0 - ratio * inv.sum(axis=1))
        w = np.where(np.isfinite(w), w, 0.0)
        z = z - w
        if np.all(np.abs(w) <= tol * np.maximum(1.0, np.abs(z))):
            break
    return z


def _newton(c, z, steps=8):
    dc = np.polyder(c)
    for _ in range(steps):
        d = np.polyval(dc, z)
        if d == 0:
            break
        step = np.polyval(c, z) / d
        z = z - step
        if abs(step) <= 1e-16 * max(1.0, abs(z)):
            break
    return z


def poles_with_multiplicity(denominator: Sequence[float]) -> list[tuple[complex, int]]:
    """Roots of ``denominator`` grouped as (pole, multiplicity), multiplicity <= 2."""
    c = np.asarray(denominator, dtype=complex)
    c = c / c[0]
    raw = polynomial_roots(c)
    used = np.zeros(raw.size, dtype=bool)
    out: list[tuple[complex, int]] = []
    for i in range(raw.size):
        if used[i]:
            continue
        scale = max(1.0, abs(raw[i]))
        members = [j for j in range(raw.size) if not used[j] and abs(raw[j] - raw[i]) < _CLUSTER_RTOL * scale]
        for j in members:
            used[j] = True
        m = len(members)
        if m > 2:
            raise InvalidInputError(f"pole of multiplicity {m} near {raw[i]:.6g} is not supported")
        r = complex(np.mean(raw[members]))
        r = complex(_newton(c, r) if m == 1 else _newton(np.polyder(c), r))
        out.append((r, m))
    # Sanity: the polished poles must reproduce the polynomial.
    scale = np.max(np.abs(c))
    for r, m in out:
        val = abs(np.polyval(c if m == 1 else np.polyder(c), r))
        if val > 1e-8 * scale * max(1.0, abs(r)) ** (c.size - 1):
            raise NumericalError("pole polishing did not converge", pole=r, multiplicity=m, residual=val)
    return out


def _taylor(poly: np.ndarray, r: complex, order: int) -> np.ndarray:
    """First ``order`` Taylor coefficients of ``poly`` about ``r`` (repeated synthetic division)."""
    p = np.array(poly, dtype=complex)
    out = np.zeros(order, dtype=complex)
    for k in range(order):
        if p.size == 0:
            break
        q = np.zeros(max(p.size - 1, 0), dtype=complex)
        acc = 0j
        for i, a in enumerate(p):
            acc = acc * r + a
            if i < p.size - 1:
                q[i] = acc
        out[k] = acc
        p = q
    return out


def _series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = a.size
    return np.convolve(a, b)[:n]


def _inverse_power_series(d: complex, m: int, order: int) -> np.ndarray:
    """Taylor coefficients in eps of (eps + d)^(-m)."""
    k = np.arange(order)
    binom = np.array([math.comb(m + int(j) - 1, int(j)) for j in k], dtype=float)
    return (d ** (-m)) * binom * ((-1.0 / d) ** k)


@dataclass(frozen=True)
class PoleExpansion:
    """Time-domain sum  sum_r exp(r t) sum_j c_{r,j} t^(j-1)/(j-1)!  with j = 1..M_r."""

    poles: tuple[complex, ...]
    coefficients: tuple[tuple[complex, ...], ...]

    @classmethod
    def from_factored(cls, numerator: Sequence[complex], poles: Sequence[tuple[complex, int]]) -> "PoleExpansion":
        """Expand numerator(u) / prod (u - r)^m into partial fractions.

        The numerator degree must be below the total pole order.
        """
        merged: dict[complex, int] = {}
        for r, m in poles:
            r = complex(r)
            merged[r] = merged.get(r, 0) + int(m)
        total = sum(merged.values())
        num = np.trim_zeros(np.asarray(numerator, dtype=complex), "f")
        if num.size == 0:
            return cls((), ())
        if num.size - 1 >= total:
            raise InvalidInputError("numerator degree must be below the total pole order")
        items = list(merged.items())
        out_poles, out_coeffs = [], []
        for r, m in items:
            phi = _taylor(num, r, m)
            for r2, m2 in items:
                if r2 == r:
                    continue
                phi = _series_mul(phi, _inverse_power_series(r - r2, m2, m))
            # coefficient of 1/(u-r)^j is phi[m-j]
            out_poles.append(r)
            out_coeffs.append(tuple(phi[m - j] for j in range(1, m + 1)))
        return cls(tuple(out_poles), tuple(out_coeffs))

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0):
            raise InvalidInputError("inverse Laplace transform evaluated at negative time")
        total = np.zeros(t_arr.shape, dtype=complex)
        for r, cs in zip(self.poles, self.coefficients):
            poly = np.zeros(t_arr.shape, dtype=complex)
            term = np.ones(t_arr.shape, dtype=float)
            for j, cj in enumerate(cs, start=1):
                if j > 1:
                    term = term * t_arr / (j - 1)
                poly = poly + cj * term
            total = total + poly * np.exp(r * t_arr)
        out = total.real
        return float(out) if out.ndim == 0 else out


@functools.lru_cache(maxsize=256)
def partial_fractions(rl: RationalLaplace) -> PoleExpansion:
    """Pole expansion of the strictly proper part of ``rl``."""
    den = np.asarray(rl.denominator, dtype=float)
    lead = den[0]
    num = np.polysub(np.asarray(rl.numerator, float), rl.direct_term * den)
    num = np.trim_zeros(np.asarray(num, dtype=float), "f")
    if num.size == 0 or np.all(num == 0):
        return PoleExpansion((), ())
    poles = poles_with_multiplicity(den)
    return PoleExpansion.from_factored(num / lead, poles)


def invert_laplace(rl: RationalLaplace, t):
    """Inverse Laplace transform of ``rl`` at time(s) ``t >= 0``.

    Any constant part of ``rl`` corresponds to a delta at ``t = 0`` and is not
    included; the returned value is the regular part.
    """
    return partial_fractions(rl)(t)
