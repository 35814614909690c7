"""Waiting-time families and the scalar functions of the renewal process.

Every family has a rational Laplace transform ``f(u) = N(u) / D(u)`` with a
monic denominator whose roots are known in closed form. From it follow

* survival  ``g(u) = ((D - N) / u) / D``
* parity    ``q(u) = ((D - N) / u) / (D + N)``   (even minus odd jumps)
* ``p_n(u) = ((D - N) / u) N^n / D^(n+1)``        (exactly n jumps)

and the time-domain closed forms implemented below. The parity transform of
every family reduces to ``(u + c) / (u^2 + 2 a u + d)``, which
:class:`TwoPoleParity` evaluates without complex arithmetic.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _purepy
from .errors import InvalidInputError, SingularityError
from .numerics import PoleExpansion, RationalLaplace, invert_laplace

MAX_JUMPS = 20
_LARGE_ARG = 20.0
_SERIES_ARG = 1e-4


def _times(t):
    arr = np.asarray(t, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise InvalidInputError("times must be >= 0")
    return arr


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _check_rate(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise InvalidInputError(f"{name} must be a positive finite rate, got {value!r}")
    return value


class ParityKind(str, Enum):
    MONOTONE = "Monotone"
    OSCILLATORY = "Oscillatory"


@dataclass(frozen=True)
class ParityClassification:
    kind: ParityKind
    first_zero: float | None = None

    @property
    def oscillatory(self) -> bool:
        return self.kind is ParityKind.OSCILLATORY


@dataclass(frozen=True)
class TwoPoleParity:
    """Inverse transform of ``(u + c) / (u^2 + 2 a u + d)``.

    With ``w^2 = a^2 - d`` and ``k = c - a``::

        q(t)  = exp(-a t) [C(t) + k S(t)]
        q'(t) = exp(-a t) [(k - a) C(t) + (w^2 - a k) S(t)]

    where ``C = cosh(w t)``, ``S = sinh(w t) / w`` for ``w^2 > 0`` and the
    trigonometric counterparts for ``w^2 < 0``.
    """

    a: float
    c: float
    d: float

    @property
    def omega2(self) -> float:
        return self.a * self.a - self.d

    @property
    def k(self) -> float:
        return self.c - self.a

    @property
    def oscillatory(self) -> bool:
        return self.omega2 < -1e-12 * self.a * self.a

    @property
    def frequency(self) -> float:
        """Angular frequency of the oscillation (0 when monotone)."""
        return math.sqrt(-self.omega2) if self.oscillatory else 0.0

    def _basis(self, t: np.ndarray):
        """Return ``(C, S, log_scale)`` with the true values ``(C, S) * exp(log_scale)``."""
        w2 = self.omega2
        C = np.ones_like(t)
        S = t.copy()
        scale = np.zeros_like(t)
        if w2 > 0:
            w = math.sqrt(w2)
            x = w * t
            small = x < _SERIES_ARG
            big = x > _LARGE_ARG
            mid = ~(small | big)
            S[small] = t[small] * (1.0 + x[small] ** 2 / 6.0)
            C[small] = 1.0 + x[small] ** 2 / 2.0
            C[mid] = np.cosh(x[mid])
            S[mid] = np.sinh(x[mid]) / w
            S[big] = np.tanh(x[big]) / w
            scale[big] = x[big] + np.log1p(np.exp(-2.0 * x[big])) - math.log(2.0)
        elif w2 < 0:
            w = math.sqrt(-w2)
            x = w * t
            small = x < _SERIES_ARG
            C = np.cos(x)
            S = np.where(small, t * (1.0 - x * x / 6.0), np.sin(x) / w)
        return C, S, scale

    def value(self, t):
        t = _times(t)
        C, S, scale = self._basis(np.atleast_1d(t))
        q = np.exp(scale - self.a * np.atleast_1d(t)) * (C + self.k * S)
        return _out(q.reshape(t.shape))

    def derivative(self, t):
        t = _times(t)
        tt = np.atleast_1d(t)
        C, S, scale = self._basis(tt)
        k = self.k
        dq = np.exp(scale - self.a * tt) * ((k - self.a) * C + (self.omega2 - self.a * k) * S)
        return _out(dq.reshape(t.shape))

    def rate(self, t):
        """``-q'(t) / (2 q(t))``; raises where q vanishes."""
        t = _times(t)
        tt = np.atleast_1d(t)
        C, S, _ = self._basis(tt)
        k = self.k
        den = C + k * S
        if np.any(den == 0):
            bad = float(tt[np.flatnonzero(den == 0)[0]])
            raise SingularityError(f"parity vanishes at t={bad!r}", time=bad)
        g = -0.5 * ((k - self.a) * C + (self.omega2 - self.a * k) * S) / den
        return _out(g.reshape(t.shape))

    def _phase_zeros(self, A: float, B: float, t_max: float) -> list[float]:
        # zeros of A cos(x) + B sin(x) for x = w t in (0, w t_max]
        w = self.frequency
        if w == 0:
            return []
        phi = math.atan2(B, A) + 0.5 * math.pi
        period = math.pi
        x = phi - period * math.floor(phi / period)
        out = []
        while x <= w * t_max:
            if x > 0:
                out.append(x / w)
            x += period
        return out

    def zeros(self, t_max: float) -> list[float]:
        """Zeros of q in (0, t_max] (empty unless oscillatory)."""
        if not self.oscillatory:
            return []
        return self._phase_zeros(1.0, self.k / self.frequency, t_max)

    def derivative_zeros(self, t_max: float) -> list[float]:
        """Zeros of q' in (0, t_max] (empty unless oscillatory)."""
        if not self.oscillatory:
            return []
        return self._phase_zeros(self.k - self.a, (self.omega2 - self.a * self.k) / self.frequency, t_max)


class WaitingTime:
    """Base class: a waiting-time density with a rational Laplace transform."""

    family_code: int = -1
    name: str = ""

    # subclasses provide -------------------------------------------------
    def _density_num_den(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        raise NotImplementedError

    def _denominator_poles(self) -> list[tuple[float, int]]:
        raise NotImplementedError

    def _density(self, t):
        raise NotImplementedError

    def _survival(self, t):
        raise NotImplementedError

    def _hazard(self, t):
        return self._density(t) / self._survival(t)

    def _jump_count_terms(self, n: int):
        """Optional better-conditioned decomposition of p_n (None: generic expansion)."""
        return None

    @property
    def parity_form(self) -> TwoPoleParity | None:
        return None

    @property
    def rates(self) -> tuple[float, ...]:
        raise NotImplementedError

    @property
    def mean(self) -> float:
        raise NotImplementedError

    @property
    def sampler_params(self) -> list[float]:
        raise NotImplementedError

    # shared -------------------------------------------------------------
    @property
    def min_rate(self) -> float:
        return min(self.rates)

    @property
    def max_rate(self) -> float:
        return max(self.rates)

    def density(self, t):
        return _out(self._density(_times(t)))

    def survival(self, t):
        return _out(self._survival(_times(t)))

    def hazard(self, t):
        return _out(self._hazard(_times(t)))

    def parity(self, t):
        form = self.parity_form
        if form is not None:
            return form.value(t)
        return _out(invert_parity(self, _times(t)))

    def parity_derivative(self, t):
        form = self.parity_form
        if form is not None:
            return form.derivative(t)
        t = _times(t)
        h = 1e-6 / self.max_rate
        lo = np.maximum(t - h, 0.0)
        return _out((self.parity(t + h) - self.parity(lo)) / (t + h - lo))

    def gamma_rate(self, t):
        form = self.parity_form
        if form is not None:
            return form.rate(t)
        t = _times(t)
        q = np.atleast_1d(self.parity(t))
        if np.any(q == 0):
            bad = float(np.atleast_1d(t)[np.flatnonzero(q == 0)[0]])
            raise SingularityError(f"parity vanishes at t={bad!r}", time=bad)
        return _out(-0.5 * np.atleast_1d(self.parity_derivative(t)) / q)

    def delta_rate(self, t):
        t = _times(t)
        return _out(0.5 * (np.asarray(self._hazard(t)) - np.asarray(self.gamma_rate(t))))

    def laplace_density(self) -> RationalLaplace:
        return RationalLaplace(*self._density_num_den())

    def _survival_numerator(self) -> np.ndarray:
        num, den = self._density_num_den()
        diff = np.polysub(den, num)
        return np.asarray(diff[:-1], dtype=float)  # (D - N) / u; D(0) = N(0)

    def laplace_survival(self) -> RationalLaplace:
        return RationalLaplace(tuple(self._survival_numerator()), self._density_num_den()[1])

    def laplace_propagator_mode(self, jump_prob: float) -> RationalLaplace:
        """Transform of m(t) with T(t,0) = ((1+m)/2, (1-m)/2; (1-m)/2, (1+m)/2)."""
        num, den = self._density_num_den()
        r = 1.0 - 2.0 * float(jump_prob)
        return RationalLaplace(tuple(self._survival_numerator()),
                               tuple(np.polysub(den, np.multiply(r, num))))

    def laplace_parity(self) -> RationalLaplace:
        return self.laplace_propagator_mode(1.0)

    def laplace_kernel(self) -> RationalLaplace:
        """Memory kernel k(u) = f(u) / g(u) (may carry a constant, i.e. a delta)."""
        num, _ = self._density_num_den()
        return RationalLaplace(num, tuple(self._survival_numerator()))

    def jump_count_probability(self, n: int, t):
        """Probability of exactly ``n`` renewals in [0, t] (n <= MAX_JUMPS)."""
        n = int(n)
        if n < 0:
            raise InvalidInputError("n must be >= 0")
        if n > MAX_JUMPS:
            raise InvalidInputError(f"n > {MAX_JUMPS} is unsupported; use jump_count_tail_bound")
        t = _times(t)
        if n == 0:
            return _out(self._survival(t))
        total = sum(weight * term(t) for weight, term in _jump_count_expansion(self, n))
        return _out(np.clip(total, 0.0, 1.0))

    def jump_count_tail_bound(self, n_max: int, t: float) -> float:
        """Chernoff bound on P(more than n_max renewals by t) = P(S_{n_max+1} <= t).

        Minimizes exp(u t) f(u)^(n_max+1) over u > 0 (unimodal in log u).
        """
        t = float(t)
        if t <= 0:
            return 0.0
        fhat = self.laplace_density()
        m = n_max + 1

        def log_bound(v):
            u = math.exp(v)
            return u * t + m * math.log(float(fhat(u)))

        lo, hi = math.log(1e-6 / t), math.log(1e6 * m / t)
        ratio = (math.sqrt(5.0) - 1.0) / 2.0
        x1, x2 = hi - ratio * (hi - lo), lo + ratio * (hi - lo)
        f1, f2 = log_bound(x1), log_bound(x2)
        for _ in range(200):
            if f1 < f2:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - ratio * (hi - lo)
                f1 = log_bound(x1)
            else:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + ratio * (hi - lo)
                f2 = log_bound(x2)
            if hi - lo < 1e-10:
                break
        return min(1.0, math.exp(min(f1, f2)))

    def classify_parity(self) -> ParityClassification:
        form = self.parity_form
        if form is None or not form.oscillatory:
            return ParityClassification(ParityKind.MONOTONE)
        zeros = form.zeros(10.0 * math.pi / form.frequency)
        return ParityClassification(ParityKind.OSCILLATORY, zeros[0])

    def default_horizon(self) -> float:
        return 40.0 / self.min_rate


@functools.lru_cache(maxsize=512)
def _jump_count_expansion(w: WaitingTime, n: int):
    """Weighted pole expansions whose sum is p_n(t)."""
    custom = w._jump_count_terms(n)
    if custom is not None:
        return custom
    num, _ = w._density_num_den()
    numerator = w._survival_numerator()
    for _ in range(n):
        numerator = np.polymul(numerator, num)
    poles = [(p, m * (n + 1)) for p, m in w._denominator_poles()]
    return ((1.0, PoleExpansion.from_factored(numerator, poles)),)


def invert_parity(w: WaitingTime, t):
    return invert_laplace(w.laplace_parity(), t)


@dataclass(frozen=True)
class Exponential(WaitingTime):
    rate: float

    family_code = _purepy.EXPONENTIAL
    name = "exp"

    def __post_init__(self):
        object.__setattr__(self, "rate", _check_rate("rate", self.rate))

    @property
    def rates(self):
        return (self.rate,)

    @property
    def mean(self):
        return 1.0 / self.rate

    @property
    def sampler_params(self):
        return [self.rate, self.rate, 1.0]

    def _density_num_den(self):
        return (self.rate,), (1.0, self.rate)

    def _denominator_poles(self):
        return [(-self.rate, 1)]

    def _density(self, t):
        return self.rate * np.exp(-self.rate * t)

    def _survival(self, t):
        return np.exp(-self.rate * t)

    def _hazard(self, t):
        return np.full_like(t, self.rate)

    @property
    def parity_form(self):
        a = 2.0 * self.rate
        return TwoPoleParity(a, a, a * a)


@dataclass(frozen=True)
class ErlangTwo(WaitingTime):
    rate: float

    family_code = _purepy.ERLANG2
    name = "erlang2"

    def __post_init__(self):
        object.__setattr__(self, "rate", _check_rate("rate", self.rate))

    @property
    def rates(self):
        return (self.rate,)

    @property
    def mean(self):
        return 2.0 / self.rate

    @property
    def sampler_params(self):
        return [self.rate, self.rate, 1.0]

    def _density_num_den(self):
        r = self.rate
        return (r * r,), (1.0, 2.0 * r, r * r)

    def _denominator_poles(self):
        return [(-self.rate, 2)]

    def _density(self, t):
        return self.rate ** 2 * t * np.exp(-self.rate * t)

    def _survival(self, t):
        return (1.0 + self.rate * t) * np.exp(-self.rate * t)

    def _hazard(self, t):
        return self.rate ** 2 * t / (1.0 + self.rate * t)

    @property
    def parity_form(self):
        r = self.rate
        return TwoPoleParity(r, 2.0 * r, 2.0 * r * r)


@dataclass(frozen=True)
class Hypoexponential(WaitingTime):
    """Sum of two independent exponentials with distinct rates.

    Equal rates construct an :class:`ErlangTwo` instead.
    """

    rate1: float
    rate2: float

    family_code = _purepy.HYPOEXPONENTIAL
    name = "hypoexp"

    def __new__(cls, rate1=None, rate2=None):
        if rate1 is not None and rate2 is not None and float(rate1) == float(rate2):
            return ErlangTwo(rate1)
        return super().__new__(cls)

    def __post_init__(self):
        object.__setattr__(self, "rate1", _check_rate("rate1", self.rate1))
        object.__setattr__(self, "rate2", _check_rate("rate2", self.rate2))

    @classmethod
    def from_sum_product(cls, s: float, p: float):
        """Rates with sum ``s`` and product ``p`` (requires p/s^2 <= 1/4)."""
        s, p = float(s), float(p)
        if not (s > 0 and p > 0):
            raise InvalidInputError("s and p must be positive")
        ratio = p / (s * s)
        if ratio > 0.25:
            raise InvalidInputError(f"p/s^2 = {ratio} > 1/4 has no real rates")
        xi = math.sqrt(max(0.0, 1.0 - 4.0 * ratio))
        return cls(0.5 * s * (1.0 - xi), 0.5 * s * (1.0 + xi))

    @classmethod
    def from_ratio(cls, ps2: float, s: float = 1.0):
        return cls.from_sum_product(s, ps2 * s * s)

    @property
    def s(self) -> float:
        return self.rate1 + self.rate2

    @property
    def p(self) -> float:
        return self.rate1 * self.rate2

    @property
    def xi(self) -> float:
        return math.sqrt(max(0.0, 1.0 - 4.0 * self.p / self.s ** 2))

    @property
    def chi_squared(self) -> float:
        """1 - 8p/s^2; negative means the parity oscillates."""
        return 1.0 - 8.0 * self.p / self.s ** 2

    @property
    def rates(self):
        return (self.rate1, self.rate2)

    @property
    def mean(self):
        return 1.0 / self.rate1 + 1.0 / self.rate2

    @property
    def sampler_params(self):
        return [self.rate1, self.rate2, 1.0]

    def _density_num_den(self):
        p = self.p
        return (p,), (1.0, self.s, p)

    def _denominator_poles(self):
        return [(-self.rate1, 1), (-self.rate2, 1)]

    def _ordered(self):
        return min(self.rates), max(self.rates)

    def _density(self, t):
        lo, hi = self._ordered()
        return self.p / (hi - lo) * (np.exp(-lo * t) - np.exp(-hi * t))

    def _survival(self, t):
        lo, hi = self._ordered()
        return (hi * np.exp(-lo * t) - lo * np.exp(-hi * t)) / (hi - lo)

    def _hazard(self, t):
        lo, hi = self._ordered()
        e = np.exp(-(hi - lo) * t)
        return self.p * (1.0 - e) / (hi - lo * e)

    @property
    def parity_form(self):
        s = self.s
        return TwoPoleParity(0.5 * s, s, 2.0 * self.p)


@dataclass(frozen=True)
class Mixture(WaitingTime):
    """Convex mixture ``weight * Exp(rate1) + (1 - weight) * Exp(rate2)``."""

    rate1: float
    rate2: float
    weight: float

    family_code = _purepy.MIXTURE
    name = "mix"

    def __post_init__(self):
        object.__setattr__(self, "rate1", _check_rate("rate1", self.rate1))
        object.__setattr__(self, "rate2", _check_rate("rate2", self.rate2))
        w = float(self.weight)
        if not 0.0 <= w <= 1.0:
            raise InvalidInputError(f"mixing weight must lie in [0, 1], got {w!r}")
        object.__setattr__(self, "weight", w)

    @property
    def s(self) -> float:
        return self.rate1 + self.rate2

    @property
    def p(self) -> float:
        return self.rate1 * self.rate2

    @property
    def mean_rate(self) -> float:
        return self.weight * self.rate1 + (1.0 - self.weight) * self.rate2

    @property
    def lambda_bar_squared(self) -> float:
        """Discriminant of the parity poles divided by 4; never negative."""
        return self.parity_form.omega2

    @property
    def rates(self):
        return (self.rate1, self.rate2)

    @property
    def mean(self):
        return self.weight / self.rate1 + (1.0 - self.weight) / self.rate2

    @property
    def sampler_params(self):
        return [self.rate1, self.rate2, self.weight]

    def _density_num_den(self):
        return (self.mean_rate, self.p), (1.0, self.s, self.p)

    def _denominator_poles(self):
        if self.rate1 == self.rate2:
            return [(-self.rate1, 2)]
        return [(-self.rate1, 1), (-self.rate2, 1)]

    def _jump_count_terms(self, n: int):
        # f^n = sum_k C(n,k) (mu l1/(u+l1))^k ((1-mu) l2/(u+l2))^(n-k) and g likewise
        # splits into nonnegative terms 1/((u+l1)^a (u+l2)^b); expanding the
        # product numerator instead loses ~8 digits to cancellation at n = 20.
        if self.rate1 == self.rate2:
            return None
        l1, l2, mu = self.rate1, self.rate2, self.weight
        terms = []
        for k in range(n + 1):
            base = math.comb(n, k) * (mu * l1) ** k * ((1.0 - mu) * l2) ** (n - k)
            for extra, wt in (((1, 0), mu), ((0, 1), 1.0 - mu)):
                weight = base * wt
                if weight == 0.0:
                    continue
                a, b = k + extra[0], n - k + extra[1]
                poles = [(-l1, a)] if b == 0 else [(-l2, b)] if a == 0 else [(-l1, a), (-l2, b)]
                terms.append((weight, PoleExpansion.from_factored([1.0], poles)))
        return tuple(terms)

    def _parts(self, t):
        r = self.min_rate
        e1 = self.weight * np.exp(-(self.rate1 - r) * t)
        e2 = (1.0 - self.weight) * np.exp(-(self.rate2 - r) * t)
        return e1, e2, np.exp(-r * t)

    def _density(self, t):
        e1, e2, base = self._parts(t)
        return (self.rate1 * e1 + self.rate2 * e2) * base

    def _survival(self, t):
        e1, e2, base = self._parts(t)
        return (e1 + e2) * base

    def _hazard(self, t):
        e1, e2, _ = self._parts(t)
        return (self.rate1 * e1 + self.rate2 * e2) / (e1 + e2)

    @property
    def parity_form(self):
        L = self.mean_rate
        a = 0.5 * (self.s + L)
        # the discriminant (s+L)^2/4 - 2p is a sum of squares; clamp rounding
        d = min(2.0 * self.p, a * a)
        return TwoPoleParity(a, self.s - L, d)


# functional interface ------------------------------------------------------

def density(w: WaitingTime, t):
    return w.density(t)


def survival(w: WaitingTime, t):
    return w.survival(t)


def hazard(w: WaitingTime, t):
    return w.hazard(t)


def parity(w: WaitingTime, t):
    return w.parity(t)


def gamma_rate(w: WaitingTime, t):
    return w.gamma_rate(t)


def delta_rate(w: WaitingTime, t):
    return w.delta_rate(t)


def jump_count_probability(w: WaitingTime, n: int, t):
    return w.jump_count_probability(n, t)


def classify_parity(w: WaitingTime) -> ParityClassification:
    return w.classify_parity()


def laplace_density(w: WaitingTime) -> RationalLaplace:
    return w.laplace_density()


def laplace_parity(w: WaitingTime) -> RationalLaplace:
    return w.laplace_parity()


def laplace_kernel(w: WaitingTime) -> RationalLaplace:
    return w.laplace_kernel()
