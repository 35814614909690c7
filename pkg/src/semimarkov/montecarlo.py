"""Monte Carlo oracle for the classical semi-Markov process.

Trajectories are generated by the kernels in ``_backend`` (compiled when
available). Each trajectory owns the SplitMix64 stream indexed by its sample
number, so estimates depend only on ``(seed, n)`` and never on chunking or on
the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend
from ._purepy import SplitMix64
from .classical import SemiMarkovSpec, intermediate_propagator
from .errors import InsufficientSamplesError, InvalidInputError

CHUNK = 250_000
MIN_PARITY_SAMPLES = 1000
MIN_CONDITIONING = 100


@dataclass(frozen=True)
class EstimateWithError:
    estimate: float
    stderr: float
    count: int

    def z(self, reference: float) -> float:
        if self.stderr == 0:
            return 0.0 if self.estimate == reference else math.inf
        return (self.estimate - reference) / self.stderr


@dataclass(frozen=True)
class TrajectorySample:
    jump_times: np.ndarray  # renewal times, strictly increasing, <= horizon
    states: np.ndarray  # states[0] initial, states[i] after renewal i
    horizon: float
    seed: int
    stream: int = 0

    def state_at(self, t: float) -> int:
        """State entered last at or before ``t``."""
        return int(self.states[np.searchsorted(self.jump_times, t, side="right")])


def _proportion(hits: np.ndarray) -> EstimateWithError:
    n = int(hits.size)
    if n == 0:
        return EstimateWithError(math.nan, math.nan, 0)
    p = float(hits.mean())
    return EstimateWithError(p, math.sqrt(max(p * (1.0 - p), 0.0) / n), n)


def _mean(values: np.ndarray) -> EstimateWithError:
    n = int(values.size)
    return EstimateWithError(float(values.mean()), float(values.std()) / math.sqrt(n), n)


def sample_trajectory(spec: SemiMarkovSpec, horizon: float, seed: int, stream: int = 0,
                      w0: float = 0.5) -> TrajectorySample:
    """One trajectory on [0, horizon], drawn with the same stream layout as the kernels."""
    horizon = float(horizon)
    if not horizon > 0:
        raise InvalidInputError("horizon must be > 0")
    w = spec.waiting
    rng = SplitMix64(seed, stream)
    x = 0 if rng.uniform() < w0 else 1
    params = w.sampler_params
    code = w.family_code
    times, states = [], [x]
    t = 0.0
    while True:
        if code == 0:
            tau = -math.log1p(-rng.uniform()) / params[0]
        elif code in (1, 2):
            r2 = params[0] if code == 1 else params[1]
            u1, u2 = rng.uniform(), rng.uniform()
            tau = -math.log1p(-u1) / params[0] + -math.log1p(-u2) / r2
        else:
            u1, u2 = rng.uniform(), rng.uniform()
            tau = -math.log1p(-u2) / (params[0] if u1 < params[2] else params[1])
        t_next = t + tau
        if t_next > horizon:
            break
        if rng.uniform() < spec.jump_prob:
            x = 1 - x
        times.append(t_next)
        states.append(x)
        t = t_next
    return TrajectorySample(np.array(times), np.array(states, dtype=np.int8), horizon, int(seed), int(stream))


def simulate(spec: SemiMarkovSpec, times, n: int, seed: int, w0: float = 0.5, workers: int = 1):
    """Initial states, renewal counts and states of ``n`` trajectories at sorted ``times``."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(np.diff(times) < 0) or np.any(times < 0):
        raise InvalidInputError("times must be a sorted 1-d array of non-negative values")
    n = int(n)
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if not 0.0 <= w0 <= 1.0:
        raise InvalidInputError("w0 must lie in [0, 1]")
    w = spec.waiting
    starts = list(range(0, n, CHUNK))

    def run(start):
        m = min(CHUNK, n - start)
        return _backend.simulate_counts(w.family_code, w.sampler_params, spec.jump_prob, w0,
                                        times, m, seed, start)

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    return tuple(np.concatenate(arrs) for arrs in zip(*parts))


def estimate_parity(spec: SemiMarkovSpec, t, n: int, seed: int, workers: int = 1):
    """Estimate E[(-1)^N(t)]; a list of estimates for array ``t``."""
    if n < MIN_PARITY_SAMPLES:
        raise InvalidInputError(f"n must be >= {MIN_PARITY_SAMPLES}")
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    order = np.argsort(tt)
    _, counts, _ = simulate(spec, tt[order], n, seed, workers=workers)
    signs = 1.0 - 2.0 * (counts & 1)
    est = [None] * tt.size
    for j, k in enumerate(order):
        est[k] = _mean(signs[:, j])
    return est[0] if np.ndim(t) == 0 else est


def estimate_jump_counts(spec: SemiMarkovSpec, t: float, n: int, seed: int, n_max: int = 10):
    """Estimates of P(N(t) = k) for k = 0..n_max."""
    _, counts, _ = simulate(spec, [t], n, seed)
    c = counts[:, 0]
    return [_proportion(c == k) for k in range(n_max + 1)]


def estimate_one_point(spec: SemiMarkovSpec, t, n: int, seed: int, w0: float):
    """Estimates of P(x(t) = 0) from initial distribution (w0, 1 - w0)."""
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    order = np.argsort(tt)
    _, _, states = simulate(spec, tt[order], n, seed, w0=w0)
    est = [None] * tt.size
    for j, k in enumerate(order):
        est[k] = _proportion(states[:, j] == 0)
    return est[0] if np.ndim(t) == 0 else est


@dataclass(frozen=True)
class MarkovTest:
    """Conditional probabilities of x2 at t2 given x1 at t1 (and x0 at t0).

    ``full`` conditions on (x1, x0), ``complement`` on x1 and the other
    initial state, ``reduced`` on x1 alone. For a Markov process all three
    agree; ``z`` is the two-sample statistic of full against complement,
    which are estimated from disjoint sets of trajectories.
    """

    full: EstimateWithError
    reduced: EstimateWithError
    complement: EstimateWithError
    z: float


def _check_times(times):
    t = [float(v) for v in times]
    if any(b < a for a, b in zip(t[:-1], t[1:])) or t[0] < 0:
        raise InvalidInputError("times must be non-negative and non-decreasing")
    return t


def markov_test(spec: SemiMarkovSpec, times, states, n: int, seed: int, w0: float = 0.5,
                min_count: int = MIN_CONDITIONING, workers: int = 1) -> MarkovTest:
    t0, t1, t2 = _check_times(times)
    x0, x1, x2 = (int(v) for v in states)
    init, _, st = simulate(spec, [t0, t1, t2], n, seed, w0=w0, workers=workers)
    s0, s1, s2 = st[:, 0], st[:, 1], st[:, 2]
    cond1 = s1 == x1
    full_sel = cond1 & (s0 == x0)
    comp_sel = cond1 & (s0 != x0)
    for name, sel in (("(x1, x0)", full_sel), ("x1", cond1), ("(x1, not x0)", comp_sel)):
        cnt = int(sel.sum())
        if cnt < min_count:
            raise InsufficientSamplesError(f"conditioning event {name} occurred {cnt} times", cnt, min_count)
    full = _proportion(s2[full_sel] == x2)
    reduced = _proportion(s2[cond1] == x2)
    comp = _proportion(s2[comp_sel] == x2)
    se = math.hypot(full.stderr, comp.stderr)
    diff = full.estimate - comp.estimate
    z = (0.0 if diff == 0 else math.copysign(math.inf, diff)) if se == 0 else diff / se
    return MarkovTest(full, reduced, comp, z)


def estimate_conditional(spec: SemiMarkovSpec, times, states, n: int, seed: int, w0: float = 0.5,
                         min_count: int = MIN_CONDITIONING):
    """(p(x2, t2 | x1, t1; x0, t0), p(x2, t2 | x1, t1)) as estimates."""
    res = markov_test(spec, times, states, n, seed, w0=w0, min_count=min_count)
    return res.full, res.reduced


@dataclass(frozen=True)
class CKResult:
    residual: float  # max-norm of P(t|s) - P(t|tau) P(tau|s)
    stderr: float
    z: float
    matrix: np.ndarray


def _two_point(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # column-stochastic P[j, i] = P(x_b = j | x_a = i)
    out = np.empty((2, 2))
    for i in range(2):
        sel = a == i
        cnt = int(sel.sum())
        if cnt == 0:
            out[:, i] = np.nan
            continue
        p0 = float((b[sel] == 0).sum()) / cnt
        out[:, i] = (p0, 1.0 - p0)
    return out


def _ck_matrix(s0, s1, s2):
    return _two_point(s0, s2) - _two_point(s1, s2) @ _two_point(s0, s1)


def chapman_kolmogorov_residual(spec: SemiMarkovSpec, times=(0.0, 1.0, 2.0), n: int = 100_000,
                                seed: int = 0, w0: float = 0.5, mode: str = "empirical",
                                blocks: int = 32, min_count: int = MIN_CONDITIONING) -> CKResult:
    """Residual of the Chapman-Kolmogorov composition at s < tau < t.

    ``mode="empirical"`` uses two-point conditionals estimated from one set of
    trajectories; the standard error of each entry comes from batch means
    over ``blocks`` contiguous blocks. ``mode="one_point"`` substitutes the
    one-point propagators T(t, s), which compose exactly.
    """
    s, tau, t = _check_times(times)
    if mode == "one_point":
        r = intermediate_propagator(spec, s, t) - intermediate_propagator(spec, tau, t) @ intermediate_propagator(spec, s, tau)
        res = float(np.abs(r).max())
        return CKResult(res, 0.0, 0.0, r)
    if mode != "empirical":
        raise InvalidInputError(f"unknown mode {mode!r}")
    _, _, st = simulate(spec, [s, tau, t], n, seed, w0=w0)
    for i in range(2):
        for col in range(2):
            cnt = int((st[:, col] == i).sum())
            if cnt < min_count:
                raise InsufficientSamplesError(f"state {i} at time index {col} occurred {cnt} times", cnt, min_count)
    r = _ck_matrix(st[:, 0], st[:, 1], st[:, 2])
    size = n // blocks
    if size < min_count:
        raise InsufficientSamplesError("too few samples per batch", size, min_count)
    per_block = np.array([_ck_matrix(*(st[b * size:(b + 1) * size, j] for j in range(3)))
                          for b in range(blocks)])
    se = per_block.std(axis=0, ddof=1) / math.sqrt(blocks)
    idx = np.unravel_index(np.argmax(np.abs(r)), r.shape)
    res = float(abs(r[idx]))
    se_max = float(se[idx])
    z = (0.0 if res == 0 else math.inf) if se_max == 0 else res / se_max
    return CKResult(res, se_max, z, r)
