"""Two-state classical semi-Markov one-point dynamics.

States are column vectors ``(w, 1 - w)`` and propagators act from the left,
``p(t) = T(t, s) p(s)``; stochastic matrices therefore have unit column sums.
For a bistochastic jump matrix with jump probability ``pi`` every propagator
from the origin has the form ``((1+m)/2, (1-m)/2; (1-m)/2, (1+m)/2)`` with a
scalar mode ``m(t)``: the parity ``q`` for ``pi = 1`` and the survival ``g``
for ``pi = 1/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidInputError, UndefinedPropagatorError
from .numerics import IntervalSet, find_roots, invert_laplace
from .renewal import WaitingTime

MODE_FLOOR = 1e-12


@dataclass(frozen=True)
class SemiMarkovSpec:
    waiting: WaitingTime
    jump_prob: float = 1.0

    def __post_init__(self):
        p = float(self.jump_prob)
        if not (0.0 <= p <= 1.0):
            raise InvalidInputError(f"jump probability must lie in [0, 1], got {p!r}")
        if not isinstance(self.waiting, WaitingTime):
            raise InvalidInputError("waiting must be a WaitingTime")
        object.__setattr__(self, "jump_prob", p)

    @property
    def jump_matrix(self) -> np.ndarray:
        p = self.jump_prob
        return np.array([[1.0 - p, p], [p, 1.0 - p]])

    def semi_markov_matrix(self, tau):
        """Q(tau) = Pi f(tau)."""
        return self.jump_matrix * self.waiting.density(tau)

    def mode(self, t):
        if self.jump_prob == 1.0:
            return self.waiting.parity(t)
        if self.jump_prob == 0.5:
            return self.waiting.survival(t)
        return self.mode_from_laplace(t)

    def mode_from_laplace(self, t):
        """m(t) by partial-fraction inversion, valid for every jump probability."""
        return invert_laplace(self.waiting.laplace_propagator_mode(self.jump_prob), t)

    def mode_derivative(self, t):
        if self.jump_prob == 1.0:
            return self.waiting.parity_derivative(t)
        if self.jump_prob == 0.5:
            return -self.waiting.density(t)
        return invert_laplace(self.waiting.laplace_propagator_mode(self.jump_prob).derivative_transform(), t)

    def critical_step(self) -> float:
        """Root-scan step resolving every oscillation of the mode."""
        step = 0.01 / self.waiting.max_rate
        form = self.waiting.parity_form
        if self.jump_prob == 1.0 and form is not None and form.oscillatory:
            step = min(step, math.pi / form.frequency / 40.0)
        return step


def _mode_matrix(m):
    m = np.asarray(m, dtype=float)
    out = np.empty(m.shape + (2, 2))
    out[..., 0, 0] = out[..., 1, 1] = 0.5 * (1.0 + m)
    out[..., 0, 1] = out[..., 1, 0] = 0.5 * (1.0 - m)
    return out


def propagator_from_origin(spec: SemiMarkovSpec, t) -> np.ndarray:
    """T(t, 0); a stack of matrices for array ``t``."""
    return _mode_matrix(spec.mode(t))


def intermediate_propagator(spec: SemiMarkovSpec, s: float, t: float) -> np.ndarray:
    """T(t, s) = T(t, 0) T(s, 0)^-1; not necessarily stochastic."""
    s, t = float(s), float(t)
    if not 0.0 <= s <= t:
        raise InvalidInputError("need 0 <= s <= t")
    ms = spec.mode(s)
    if abs(ms) < MODE_FLOOR:
        raise UndefinedPropagatorError(f"T(t, s) is undefined: m(s) = {ms:.3g} at s={s!r}", time=s)
    return _mode_matrix(spec.mode(t) / ms)


def is_stochastic(m, tol: float = 1e-12) -> bool:
    m = np.asarray(m, dtype=float)
    if m.shape[-2:] != (2, 2):
        raise InvalidInputError("expected 2x2 matrices")
    return bool(np.all(m >= -tol) and np.all(np.abs(m.sum(axis=-2) - 1.0) <= tol))


def probability_vector(w: float) -> np.ndarray:
    w = float(w)
    if not -1e-12 <= w <= 1.0 + 1e-12:
        raise InvalidInputError(f"w must lie in [0, 1], got {w!r}")
    return np.array([w, 1.0 - w])


def _check_probability(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (2,) or np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-12:
        raise InvalidInputError(f"not a probability vector: {p!r}")
    return p


def kolmogorov_distance(p1, p2) -> float:
    """Half the l1 distance between two probability vectors."""
    return 0.5 * float(np.abs(_check_probability(p1) - _check_probability(p2)).sum())


def growth_intervals(fn: Callable, dfn: Callable, t_max: float, step: float) -> IntervalSet:
    """Maximal open intervals in (0, t_max) on which ``|fn|`` strictly increases.

    Candidates are split at the roots of ``fn`` and ``dfn``; each piece is
    kept when ``fn * dfn > 0`` at its midpoint, and touching pieces are merged.
    """
    cuts = sorted(set(find_roots(fn, t_max, step)) | set(find_roots(dfn, t_max, step)))
    edges = [0.0] + [c for c in cuts if 0.0 < c < t_max] + [float(t_max)]
    out: list[list[float]] = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        mid = 0.5 * (a + b)
        if float(fn(mid)) * float(dfn(mid)) > 0:
            if out and out[-1][1] == a:
                out[-1][1] = b
            else:
                out.append([a, b])
    return IntervalSet(tuple((a, b) for a, b in out))


def p_divisible(spec: SemiMarkovSpec, t_max: float, grid_n: int = 1000):
    """Whether every intermediate propagator on [0, t_max] is stochastic.

    Returns ``(ok, violations)`` where ``violations`` is the IntervalSet on
    which ``|m|`` grows. The scan step is the finer of ``t_max / grid_n`` and
    the oscillation-resolving step of the mode.
    """
    if grid_n < 2:
        raise InvalidInputError("grid_n must be >= 2")
    step = min(t_max / grid_n, spec.critical_step())
    viol = growth_intervals(spec.mode, spec.mode_derivative, t_max, step)
    return (not viol), viol


def trajectory(spec: SemiMarkovSpec, w0: float, grid) -> np.ndarray:
    """w(t) = (1 - m(t) + 2 m(t) w0) / 2 for the population of the first state."""
    w0 = float(w0)
    if not 0.0 <= w0 <= 1.0:
        raise InvalidInputError("w0 must lie in [0, 1]")
    m = np.asarray(spec.mode(np.asarray(grid, dtype=float)))
    return 0.5 * (1.0 - m + 2.0 * m * w0)
