"""Non-Markovianity measures and the divisibility classifier.

* ``blp_measure``: total increase of the trace distance, maximized over
  initial pairs. For the models here the maximizing pair is known and the
  trace distance of that pair is ``|q(t)|``, so the measure is a sum over
  the intervals where ``|q|`` grows.
* ``rhp_measure``: time integral of the rate of CP-divisibility violation.
  With the time-local rates the integrand is ``-2 gamma`` where ``gamma < 0``
  plus (dissipative model) ``-2 delta`` where ``delta < 0``. Both integrals
  have exact antiderivatives (``log|q|`` and ``log g - log|q| / 2``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .classical import SemiMarkovSpec, growth_intervals
from .errors import ConsistencyError, InvalidInputError, SingularityError
from .numerics import IntervalSet, find_roots, hermitian_eigenvalues, integrate
from .quantum import (
    Model,
    ModelSpec,
    choi,
    choi_eigenvalues_diagonal,
    intermediate_diagonal,
    pure_state,
    trace_distance_derivative,
    transfer_diagonal,
)
from .renewal import WaitingTime


@dataclass(frozen=True)
class Contribution:
    start: float
    end: float  # math.inf for an analytic tail
    value: float


@dataclass(frozen=True)
class MeasureValue:
    """Finite value with its per-interval breakdown, or an explicit infinity."""

    infinite: bool
    value: float
    witnesses: tuple[float, ...] = ()
    breakdown: tuple[Contribution, ...] = ()
    horizon: float | None = None
    asymptotic_rate: float | None = None  # d value / d horizon as the horizon grows

    @classmethod
    def finite(cls, breakdown=(), horizon=None, asymptotic_rate=None):
        breakdown = tuple(breakdown)
        return cls(False, math.fsum(c.value for c in breakdown), (), breakdown, horizon, asymptotic_rate)

    @classmethod
    def divergent(cls, witnesses, horizon=None):
        witnesses = tuple(float(w) for w in witnesses)
        if not witnesses:
            raise InvalidInputError("an infinite measure needs at least one witness time")
        return cls(True, math.inf, witnesses, (), horizon)

    @property
    def is_zero(self) -> bool:
        return not self.infinite and self.value == 0.0

    def to_dict(self) -> dict:
        out = {"infinite": self.infinite, "value": None if self.infinite else self.value}
        if self.infinite:
            out["witnesses"] = list(self.witnesses)
        if self.horizon is not None:
            out["horizon"] = self.horizon
        if self.asymptotic_rate is not None:
            out["asymptotic_rate"] = self.asymptotic_rate
        return out


def default_horizon(w: WaitingTime) -> float:
    return w.default_horizon()


def _step(w: WaitingTime, t_max: float) -> float:
    return min(SemiMarkovSpec(w, 1.0).critical_step(), t_max / 100.0)


def omega_plus(w: WaitingTime, t_max: float | None = None) -> IntervalSet:
    """Maximal intervals in (0, t_max) on which |q| strictly increases."""
    t_max = default_horizon(w) if t_max is None else float(t_max)
    if not t_max > 0:
        raise InvalidInputError("t_max must be > 0")
    return growth_intervals(w.parity, w.parity_derivative, t_max, _step(w, t_max))


def _blp_tail(w: WaitingTime, t_max: float) -> Contribution | None:
    """Growth of |q| after t_max for an oscillating two-pole parity.

    |q| peaks at the zeros y_k of q' that follow a zero of q; consecutive
    peaks are a half period pi/w apart and shrink by r = exp(-a pi / w), so
    the remaining growth is |q(y)| / (1 - r), less the part of the current
    growth interval already counted when t_max falls inside one.
    """
    form = w.parity_form
    if form is None or not form.oscillatory:
        return None
    half = math.pi / form.frequency
    zeros = form.zeros(t_max + 3 * half)
    peaks = [y for y in form.derivative_zeros(t_max + 3 * half) if y > t_max and zeros and y > zeros[0]]
    if not peaks:
        return None
    y = peaks[0]
    r = math.exp(-form.a * half)
    total = abs(w.parity(y)) / (1.0 - r)
    if not any(t_max <= z < y for z in zeros):
        # the zero opening y's growth interval precedes t_max
        total -= abs(w.parity(t_max))
    return Contribution(t_max, math.inf, total)


@dataclass(frozen=True)
class BLPResult:
    measure: MeasureValue
    pair: tuple[np.ndarray, np.ndarray] | None
    mode: str


def optimal_pair(model: ModelSpec):
    """Initial pair of pure states maximizing the growth of the trace distance."""
    if model.variant is Model.DISSIPATIVE:
        return pure_state(0.0, 0.0), pure_state(math.pi, 0.0)
    return pure_state(0.5 * math.pi, 0.0), pure_state(0.5 * math.pi, math.pi)


def blp_measure(model: ModelSpec, t_max: float | None = None, mode: str = "endpoints",
                tail: bool = True) -> BLPResult:
    """Trace-distance measure using the optimal pair.

    ``mode="endpoints"`` sums |q(b)| - |q(a)| over the growth intervals;
    ``mode="quadrature"`` integrates the trace-distance derivative of the
    optimal pair over the same intervals. ``tail`` adds the analytic growth
    beyond t_max where it is known in closed form.
    """
    w = model.waiting
    t_max = default_horizon(w) if t_max is None else float(t_max)
    if mode not in ("endpoints", "quadrature"):
        raise InvalidInputError(f"unknown mode {mode!r}")
    if model.variant is Model.PROJECTION:
        return BLPResult(MeasureValue.finite((), horizon=t_max), None, mode)
    pair = optimal_pair(model)
    parts = []
    for a, b in omega_plus(w, t_max):
        if mode == "endpoints":
            val = abs(w.parity(b)) - abs(w.parity(a))
        else:
            val = integrate(lambda t: trace_distance_derivative(model, pair[0], pair[1], t), a, b, tol=1e-12)
        parts.append(Contribution(a, b, val))
    if tail:
        extra = _blp_tail(w, t_max)
        if extra is not None:
            parts.append(extra)
    return BLPResult(MeasureValue.finite(parts, horizon=t_max), pair, mode)


def _pair_states(angles: np.ndarray) -> np.ndarray:
    th1, ph1, th2, ph2 = angles.T
    r1 = np.stack([np.sin(th1) * np.cos(ph1), np.sin(th1) * np.sin(ph1), np.cos(th1)], axis=-1)
    r2 = np.stack([np.sin(th2) * np.cos(ph2), np.sin(th2) * np.sin(ph2), np.cos(th2)], axis=-1)
    return r1 - r2


def _positive_variation(delta: np.ndarray, lam2: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """Sum of the increases of D(t) = |lambda(t) * delta| / 2 over the time grid."""
    out = np.empty(delta.shape[0])
    for i in range(0, delta.shape[0], chunk):
        d2 = delta[i:i + chunk] ** 2
        D = 0.5 * np.sqrt(d2 @ lam2.T)
        out[i:i + chunk] = np.clip(np.diff(D, axis=1), 0.0, None).sum(axis=1)
    return out


@dataclass(frozen=True)
class SearchResult:
    measure: MeasureValue
    pair: tuple[np.ndarray, np.ndarray]
    angles: tuple[float, float, float, float]


def blp_measure_search(model: ModelSpec, t_max: float | None = None, grid_density: int = 16,
                       time_points: int = 4000, rounds: int = 3, shrink: float = 4.0) -> SearchResult:
    """Maximize the growth of the trace distance over pairs of pure states.

    Pairs are parametrized by Bloch angles (theta1, phi1, theta2, phi2). A
    coarse grid (theta in steps of pi/n including the poles, phi in steps of
    2 pi/n) is followed by coordinate refinement. The objective is the
    positive variation of D on a time grid that contains the endpoints of the
    growth intervals of |q|, so it never exceeds the exact value.
    """
    if grid_density < 8:
        raise InvalidInputError("grid_density must be >= 8")
    w = model.waiting
    t_max = default_horizon(w) if t_max is None else float(t_max)
    times = np.linspace(0.0, t_max, time_points)
    marks = [x for iv in omega_plus(w, t_max) for x in iv]
    times = np.unique(np.concatenate([times, marks]))
    lam = np.stack([np.asarray(x, dtype=float) * np.ones_like(times) for x in transfer_diagonal(model, times)], axis=1)
    lam2 = lam ** 2

    n = grid_density
    thetas = np.linspace(0.0, math.pi, n + 1)
    phis = 2.0 * math.pi * np.arange(n) / n
    single = np.array([(th, ph) for th in thetas for ph in (phis if 0 < th < math.pi else phis[:1])])
    i1, i2 = np.triu_indices(len(single), k=1)
    angles = np.concatenate([single[i1], single[i2]], axis=1)
    scores = _positive_variation(_pair_states(angles), lam2)
    best = angles[int(np.argmax(scores))].copy()
    best_val = float(scores.max())

    def score(a):
        return float(_positive_variation(_pair_states(a[None, :]), lam2)[0])

    step = math.pi / n
    for _ in range(rounds):
        improved = True
        while improved:
            improved = False
            for k in range(4):
                for sgn in (1.0, -1.0):
                    cand = best.copy()
                    cand[k] += sgn * step
                    val = score(cand)
                    if val > best_val:
                        best, best_val, improved = cand, val, True
        step /= shrink
    states = (pure_state(best[0], best[1]), pure_state(best[2], best[3]))
    value = MeasureValue.finite((Contribution(0.0, t_max, best_val),), horizon=t_max)
    return SearchResult(value, states, tuple(float(x) for x in best))


# divisibility measure -------------------------------------------------------

def _parity_zeros(w: WaitingTime, t_max: float) -> list[float]:
    return [z for z in find_roots(w.parity, t_max, _step(w, t_max)) if 0.0 < z < t_max]


def _negative_intervals(fn, t_max: float, step: float) -> IntervalSet:
    roots = [r for r in find_roots(fn, t_max, step) if 0.0 < r < t_max]
    edges = [0.0] + roots + [t_max]
    out: list[list[float]] = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a and float(fn(0.5 * (a + b))) < 0:
            if out and out[-1][1] == a:
                out[-1][1] = b
            else:
                out.append([a, b])
    return IntervalSet(tuple((a, b) for a, b in out))


def _log_abs_q(w: WaitingTime, t: float) -> float:
    return math.log(abs(w.parity(t)))


def _delta_antiderivative(w: WaitingTime, t: float) -> float:
    # -2 delta = gamma - h = d/dt [log g - log|q| / 2]
    return math.log(w.survival(t)) - 0.5 * _log_abs_q(w, t)


def rhp_rate(model: ModelSpec, t):
    """Analytic violation rate: -2 gamma on gamma < 0, plus -2 delta on delta < 0 (dissipative)."""
    w = model.waiting
    if model.variant is Model.PROJECTION:
        return np.maximum(-2.0 * np.asarray(w.hazard(t)), 0.0) * 1.0
    out = np.maximum(-2.0 * np.asarray(w.gamma_rate(t)), 0.0)
    if model.variant is Model.DISSIPATIVE:
        out = out + np.maximum(-2.0 * np.asarray(w.delta_rate(t)), 0.0)
    return float(out) if np.ndim(out) == 0 else out


def rhp_measure(model: ModelSpec, t_max: float | None = None, mode: str = "endpoints") -> MeasureValue:
    """Divisibility measure over (0, t_max].

    Infinite, with the zeros of q as witnesses, whenever q changes sign. The
    finite value is an integral over the horizon; when the violation rate
    does not decay (``asymptotic_rate > 0``) it grows with the horizon.
    """
    w = model.waiting
    t_max = default_horizon(w) if t_max is None else float(t_max)
    if mode not in ("endpoints", "quadrature"):
        raise InvalidInputError(f"unknown mode {mode!r}")
    if model.variant is Model.PROJECTION:
        # rates are the hazard h >= 0: the time-local generator never turns negative
        return MeasureValue.finite((), horizon=t_max, asymptotic_rate=0.0)
    zeros = _parity_zeros(w, t_max)
    if zeros:
        return MeasureValue.divergent(zeros, horizon=t_max)
    step = _step(w, t_max)
    parts = []
    gamma_neg = omega_plus(w, t_max)
    for a, b in gamma_neg:
        if mode == "endpoints":
            val = _log_abs_q(w, b) - _log_abs_q(w, a)
        else:
            val = integrate(lambda t: -2.0 * np.asarray(w.gamma_rate(t)), a, b, tol=1e-12)
        parts.append(Contribution(a, b, val))
    rate_end = max(0.0, -2.0 * w.gamma_rate(t_max))
    if model.variant is Model.DISSIPATIVE:
        delta_neg = _negative_intervals(w.delta_rate, t_max, step)
        for a, b in delta_neg:
            for c, d in gamma_neg:
                if max(a, c) < min(b, d):
                    raise ConsistencyError(f"gamma < 0 on ({c}, {d}) overlaps delta < 0 on ({a}, {b})")
            if mode == "endpoints":
                val = _delta_antiderivative(w, b) - _delta_antiderivative(w, a)
            else:
                val = integrate(lambda t: -2.0 * np.asarray(w.delta_rate(t)), a, b, tol=1e-12)
            parts.append(Contribution(a, b, val))
        rate_end += max(0.0, -2.0 * w.delta_rate(t_max))
    parts.sort(key=lambda c: c.start)
    return MeasureValue.finite(parts, horizon=t_max, asymptotic_rate=rate_end)


def rhp_g_numeric(model: ModelSpec, t: float, eps: float) -> float:
    """(||Choi(F(t, t + eps))||_1 - 1) / eps with the unit-trace Choi matrix."""
    t, eps = float(t), float(eps)
    if not eps > 0:
        raise InvalidInputError("eps must be > 0")
    w = model.waiting
    if model.uses_parity:
        q0, q1 = w.parity(t), w.parity(t + eps)
        if q0 == 0 or q0 * q1 < 0:
            raise SingularityError(f"q vanishes in [{t}, {t + eps}]", time=t)
    lam = [float(x) for x in intermediate_diagonal(model, t, t + eps)]
    ev = hermitian_eigenvalues(choi(np.diag([1.0] + lam)))
    return (float(np.abs(ev).sum()) - 1.0) / eps


# classification -------------------------------------------------------------

class Divisibility(str, Enum):
    CP_DIVISIBLE = "CPDivisible"
    P_DIVISIBLE_ONLY = "PDivisibleOnly"
    INDIVISIBLE = "Indivisible"


@dataclass(frozen=True)
class DivisibilityClass:
    kind: Divisibility
    positivity_witness: tuple[float, float] | None = None
    cp_witness: tuple[float, float] | None = None
    witnesses: dict = field(default_factory=dict)


def classify(model: ModelSpec, t_max: float | None = None, grid_n: int = 400,
             tol: float = 1e-10) -> DivisibilityClass:
    """Check every intermediate map F(t, s), s < t, on a uniform grid over [0, t_max]."""
    if grid_n < 100:
        raise InvalidInputError("grid_n must be >= 100")
    w = model.waiting
    t_max = default_horizon(w) if t_max is None else float(t_max)
    grid = np.linspace(0.0, t_max, grid_n + 1)
    lam = np.stack([np.asarray(x, dtype=float) * np.ones_like(grid) for x in transfer_diagonal(model, grid)])
    si, ti = np.triu_indices(grid.size, k=1)
    den = lam[:, si]
    undefined = np.any(den == 0.0, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = lam[:, ti] / den
    not_pos = undefined | np.any(np.abs(ratio) > 1.0 + tol, axis=0)
    ev_min = choi_eigenvalues_diagonal(*ratio).min(axis=-1)
    not_cp = undefined | ~(ev_min >= -tol)

    def first(mask):
        idx = np.flatnonzero(mask)
        return None if idx.size == 0 else (float(grid[si[idx[0]]]), float(grid[ti[idx[0]]]))

    pw, cw = first(not_pos), first(not_cp)
    if pw is not None:
        kind = Divisibility.INDIVISIBLE
    elif cw is not None:
        kind = Divisibility.P_DIVISIBLE_ONLY
    else:
        kind = Divisibility.CP_DIVISIBLE
    counts = {"pairs": int(si.size), "not_positive": int(not_pos.sum()), "not_cp": int(not_cp.sum())}
    return DivisibilityClass(kind, pw, cw, counts)
