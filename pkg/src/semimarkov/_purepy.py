"""Pure numpy implementations of the hot kernels.

These define the reference semantics; ``_kernels.pyx`` must reproduce them
(bit-exactly for the integer RNG, to the last ulp for sampled times).

Random numbers
--------------
SplitMix64 with one stream per trajectory. Stream ``i`` under seed ``s``
starts from ``state = mix(mix(s) + mix(i))`` and advances by the golden
gamma ``0x9E3779B97F4A7C15``; each output is ``mix(state)``, and a uniform
double in [0, 1) is ``(out >> 11) * 2**-53``. Because streams are indexed by
trajectory, any partition of the samples across workers yields identical
results.

Draw layout per trajectory: one uniform for the initial state, then per
sojourn one uniform (exponential) or two (Erlang-2, hypoexponential, mixture:
component choice first), then one uniform for the jump decision if the
trajectory continues.
"""

from __future__ import annotations

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1
_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)
_G = np.uint64(GOLDEN)
_S30, _S27, _S31, _S11 = (np.uint64(v) for v in (30, 27, 31, 11))
_TWO_M53 = 2.0 ** -53

EXPONENTIAL, ERLANG2, HYPOEXPONENTIAL, MIXTURE = 0, 1, 2, 3


def mix64(z: int) -> int:
    """SplitMix64 finaliser on a Python int."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def stream_start(seed: int, stream: int) -> int:
    return (mix64(seed) + mix64(stream)) & _MASK


class SplitMix64:
    """Scalar stream; used where only a handful of draws are needed."""

    def __init__(self, seed: int, stream: int = 0):
        self.state = stream_start(seed, stream)

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & _MASK
        return mix64(self.state)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * _TWO_M53


def _mix_arr(z):
    z = (z ^ (z >> _S30)) * _C1
    z = (z ^ (z >> _S27)) * _C2
    return z ^ (z >> _S31)


def stream_starts(seed: int, streams: np.ndarray) -> np.ndarray:
    key = np.uint64(mix64(seed))
    return key + _mix_arr(np.asarray(streams, dtype=np.uint64))


def _uniform(state):
    state = state + _G
    return state, (_mix_arr(state) >> _S11).astype(np.float64) * _TWO_M53


def _exp(u, rate):
    return -np.log1p(-u) / rate


def _draw_wait(family, params, state):
    if family == EXPONENTIAL:
        state, u = _uniform(state)
        return state, _exp(u, params[0])
    if family in (ERLANG2, HYPOEXPONENTIAL):
        r2 = params[0] if family == ERLANG2 else params[1]
        state, u1 = _uniform(state)
        state, u2 = _uniform(state)
        return state, _exp(u1, params[0]) + _exp(u2, r2)
    if family == MIXTURE:
        state, u1 = _uniform(state)
        state, u2 = _uniform(state)
        rate = np.where(u1 < params[2], params[0], params[1])
        return state, _exp(u2, rate)
    raise ValueError(f"unknown family code {family}")


def simulate_counts(family: int, params, jump_prob: float, w0: float, times, n: int,
                    seed: int, first_stream: int = 0):
    """Sample ``n`` trajectories and record them at the sorted query ``times``.

    Returns ``(x0, counts, states)``: initial states (n,), number of renewals
    up to each query time (n, K), and the state occupied at each query time
    (n, K). A renewal exactly at a query time counts as having happened.
    """
    params = np.asarray(params, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    K = times.size
    state = stream_starts(seed, np.arange(first_stream, first_stream + n, dtype=np.uint64))
    state, u = _uniform(state)
    x = np.where(u < w0, 0, 1).astype(np.int8)
    x0 = x.copy()
    counts = np.zeros((n, K), dtype=np.int32)
    states = np.zeros((n, K), dtype=np.int8)
    t = np.zeros(n)
    cnt = np.zeros(n, dtype=np.int32)
    nxt = np.zeros(n, dtype=np.intp)
    active = np.arange(n)
    while active.size:
        st, tau = _draw_wait(family, params, state[active])
        tn = t[active] + tau
        m = np.searchsorted(times, tn, side="left")
        kk = nxt[active]
        for j in range(K):
            sel = (kk <= j) & (j < m)
            if sel.any():
                rows = active[sel]
                counts[rows, j] = cnt[rows]
                states[rows, j] = x[rows]
        nxt[active] = np.maximum(kk, m)
        cont = m < K
        rows = active[cont]
        st, u = _uniform(st[cont])
        flip = u < jump_prob
        x[rows] = np.where(flip, 1 - x[rows], x[rows])
        cnt[rows] += 1
        t[rows] = tn[cont]
        state[rows] = st
        active = rows
    return x0, counts, states


def jacobi_eigvalsh(a, tol: float = 1e-13, max_sweeps: int = 60):
    """Ascending eigenvalues of a batch of Hermitian matrices, shape (N, n, n).

    Cyclic Jacobi: each pivot is first made real by a diagonal phase, then
    annihilated by a real plane rotation.
    """
    a = np.array(a, dtype=complex, copy=True)
    squeeze = a.ndim == 2
    if squeeze:
        a = a[None]
    N, n, _ = a.shape
    norm = np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2)))
    thresh = tol * np.maximum(1.0, norm)
    offmask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1))
        live = off >= thresh
        if not live.any():
            break
        b = a[live]
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = b[:, p, q]
                mag = np.abs(apq)
                phase = np.where(mag > 0, apq / np.where(mag > 0, mag, 1.0), 1.0)
                b[:, :, q] *= np.conj(phase)[:, None]
                b[:, q, :] *= phase[:, None]
                theta = 0.5 * np.arctan2(2.0 * mag, (b[:, q, q] - b[:, p, p]).real)
                c = np.cos(theta)[:, None]
                s = np.sin(theta)[:, None]
                colp = b[:, :, p].copy()
                colq = b[:, :, q].copy()
                b[:, :, p] = c * colp - s * colq
                b[:, :, q] = s * colp + c * colq
                rowp = b[:, p, :].copy()
                rowq = b[:, q, :].copy()
                b[:, p, :] = c * rowp - s * rowq
                b[:, q, :] = s * rowp + c * rowq
        a[live] = b
    ev = np.sort(np.real(np.diagonal(a, axis1=1, axis2=2)), axis=1)
    return ev[0] if squeeze else ev
