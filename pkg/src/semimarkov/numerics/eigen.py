"""Eigenvalues of small Hermitian matrices (2x2 closed form, 4x4 Jacobi)."""

from __future__ import annotations

import numpy as np

from .._backend import jacobi_eigvalsh
from ..errors import InvalidInputError

HERMITIAN_TOL = 1e-12


def _check(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2] or m.shape[-1] not in (2, 4):
        raise InvalidInputError(f"expected 2x2 or 4x4 matrices, got shape {m.shape}")
    dev = np.abs(m - np.conj(np.swapaxes(m, -1, -2))).max() if m.size else 0.0
    if dev > HERMITIAN_TOL * max(1.0, float(np.abs(m).max())):
        raise InvalidInputError(f"matrix is not Hermitian (deviation {dev:.3g})")
    return m


def _eig2(m: np.ndarray) -> np.ndarray:
    a = m[..., 0, 0].real
    d = m[..., 1, 1].real
    half_gap = np.hypot(0.5 * (a - d), np.abs(m[..., 0, 1]))
    mid = 0.5 * (a + d)
    return np.stack([mid - half_gap, mid + half_gap], axis=-1)


def hermitian_eigenvalues(m) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian 2x2 or 4x4 matrix.

    Also accepts a stack of matrices with shape (..., n, n) and returns (..., n).
    """
    m = _check(m)
    if m.shape[-1] == 2:
        return _eig2(m)
    flat = m.reshape(-1, 4, 4)
    ev = jacobi_eigvalsh(flat)
    return ev.reshape(m.shape[:-1])


def trace_norm(m) -> float | np.ndarray:
    """Sum of absolute eigenvalues of a Hermitian matrix (or stack)."""
    return np.abs(hermitian_eigenvalues(m)).sum(axis=-1)
