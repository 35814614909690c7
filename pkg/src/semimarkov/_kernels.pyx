# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; semantics are defined by ``_purepy``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log1p, sqrt, atan2, cos, sin, fabs
from libc.stdint cimport uint64_t, int32_t, int8_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TWO_M53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double next_uniform(uint64_t* state) noexcept nogil:
    state[0] += GOLDEN
    return <double>(mix64(state[0]) >> 11) * TWO_M53


cdef inline double draw_wait(int family, double r1, double r2, double mu, uint64_t* state) noexcept nogil:
    cdef double u1, u2, rate
    if family == 0:
        u1 = next_uniform(state)
        return -log1p(-u1) / r1
    elif family == 1 or family == 2:
        u1 = next_uniform(state)
        u2 = next_uniform(state)
        if family == 1:
            r2 = r1
        return (-log1p(-u1) / r1) + (-log1p(-u2) / r2)
    else:
        u1 = next_uniform(state)
        u2 = next_uniform(state)
        rate = r1 if u1 < mu else r2
        return -log1p(-u2) / rate


cdef void _simulate(int family, double r1, double r2, double mu, double jump_prob, double w0,
                    const double[::1] times, uint64_t key, Py_ssize_t first_stream,
                    Py_ssize_t lo, Py_ssize_t hi, int8_t[::1] x0,
                    int32_t[:, ::1] counts, int8_t[:, ::1] states) noexcept nogil:
    cdef Py_ssize_t i, k, K = times.shape[0]
    cdef uint64_t state
    cdef int8_t x
    cdef int32_t cnt
    cdef double t, tn
    for i in range(lo, hi):
        state = key + mix64(<uint64_t>(first_stream + i))
        x = 0 if next_uniform(&state) < w0 else 1
        x0[i] = x
        t = 0.0
        cnt = 0
        k = 0
        while True:
            tn = t + draw_wait(family, r1, r2, mu, &state)
            while k < K and times[k] < tn:
                counts[i, k] = cnt
                states[i, k] = x
                k += 1
            if k == K:
                break
            if next_uniform(&state) < jump_prob:
                x = 1 - x
            cnt += 1
            t = tn


def simulate_counts(int family, params, double jump_prob, double w0, times, Py_ssize_t n,
                    seed, Py_ssize_t first_stream=0):
    """Compiled twin of ``_purepy.simulate_counts`` (releases the GIL)."""
    from ._purepy import mix64 as py_mix64
    cdef double[::1] tv = np.ascontiguousarray(times, dtype=np.float64)
    p = np.asarray(params, dtype=np.float64)
    cdef double r1 = p[0], r2 = p[1] if p.size > 1 else p[0], mu = p[2] if p.size > 2 else 1.0
    cdef uint64_t key = <uint64_t>py_mix64(int(seed))
    x0_arr = np.empty(n, dtype=np.int8)
    counts_arr = np.zeros((n, tv.shape[0]), dtype=np.int32)
    states_arr = np.zeros((n, tv.shape[0]), dtype=np.int8)
    cdef int8_t[::1] x0 = x0_arr
    cdef int32_t[:, ::1] counts = counts_arr
    cdef int8_t[:, ::1] states = states_arr
    with nogil:
        _simulate(family, r1, r2, mu, jump_prob, w0, tv, key, first_stream, 0, n, x0, counts, states)
    return x0_arr, counts_arr, states_arr


cdef void _jacobi(double complex[:, ::1] a, double tol, int max_sweeps) noexcept nogil:
    cdef Py_ssize_t n = a.shape[0], p, q, k
    cdef int sweep
    cdef double off, norm = 0.0, mag, theta, c, s, thresh
    cdef double complex phase, cp, cq
    for p in range(n):
        for q in range(n):
            norm += a[p, q].real * a[p, q].real + a[p, q].imag * a[p, q].imag
    thresh = tol * (sqrt(norm) if sqrt(norm) > 1.0 else 1.0)
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n):
            for q in range(n):
                if p != q:
                    off += a[p, q].real * a[p, q].real + a[p, q].imag * a[p, q].imag
        if sqrt(off) < thresh:
            return
        for p in range(n - 1):
            for q in range(p + 1, n):
                mag = sqrt(a[p, q].real * a[p, q].real + a[p, q].imag * a[p, q].imag)
                if mag > 0:
                    phase = a[p, q] / mag
                else:
                    phase = 1.0
                for k in range(n):
                    a[k, q] = a[k, q] * phase.conjugate()
                for k in range(n):
                    a[q, k] = a[q, k] * phase
                theta = 0.5 * atan2(2.0 * mag, (a[q, q] - a[p, p]).real)
                c = cos(theta)
                s = sin(theta)
                for k in range(n):
                    cp = a[k, p]
                    cq = a[k, q]
                    a[k, p] = c * cp - s * cq
                    a[k, q] = s * cp + c * cq
                for k in range(n):
                    cp = a[p, k]
                    cq = a[q, k]
                    a[p, k] = c * cp - s * cq
                    a[q, k] = s * cp + c * cq


def jacobi_eigvalsh(a, double tol=1e-13, int max_sweeps=60):
    """Compiled twin of ``_purepy.jacobi_eigvalsh``."""
    arr = np.array(a, dtype=np.complex128, copy=True, order="C")
    squeeze = arr.ndim == 2
    if squeeze:
        arr = arr[None]
    arr = np.ascontiguousarray(arr)
    cdef double complex[:, :, ::1] view = arr
    cdef Py_ssize_t i
    with nogil:
        for i in range(view.shape[0]):
            _jacobi(view[i], tol, max_sweeps)
    ev = np.sort(np.real(np.diagonal(arr, axis1=1, axis2=2)), axis=1)
    return ev[0] if squeeze else ev
