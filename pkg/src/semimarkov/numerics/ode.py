"""Adaptive Dormand-Prince 5(4) integration onto a fixed output grid."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..errors import InvalidInputError, NumericalError, SingularityError

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _call(rhs, t, y, shape):
    dy = np.asarray(rhs(t, y.reshape(shape)), dtype=y.dtype).ravel()
    if not np.all(np.isfinite(dy)):
        raise SingularityError(f"right-hand side is not finite at t={t!r}", time=float(t))
    return dy


def ode_evolve(rhs: Callable[[float, np.ndarray], np.ndarray], y0, grid: Sequence[float],
               rtol: float = 1e-10, atol: float = 1e-10, max_steps: int = 1_000_000) -> np.ndarray:
    """Integrate ``dy/dt = rhs(t, y)`` and return the state at every grid time.

    The first grid time is the initial time. Steps are clipped so that every
    grid time is hit exactly; no step is taken past the last grid time.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidInputError("grid must be a non-empty 1-d sequence")
    if np.any(np.diff(grid) <= 0):
        raise InvalidInputError("grid must be strictly increasing")
    y = np.array(y0, dtype=complex if np.iscomplexobj(y0) else float).ravel()
    shape = np.shape(y0)
    out = np.empty((grid.size,) + tuple(shape), dtype=y.dtype)
    out[0] = y.reshape(shape)
    t = float(grid[0])
    span = grid[-1] - grid[0]
    h_nat = 1e-3 * span if span > 0 else 0.0
    k1 = _call(rhs, t, y, shape)
    steps = 0
    for i in range(1, grid.size):
        target = float(grid[i])
        while t < target:
            steps += 1
            if steps > max_steps:
                raise NumericalError("too many steps", time=t)
            clipped = h_nat >= target - t
            h = target - t if clipped else h_nat
            ks = [k1]
            for s in range(1, 7):
                yi = y + h * sum(a * k for a, k in zip(_A[s], ks))
                ks.append(_call(rhs, t + _C[s] * h, yi, shape))
            y_new = y + h * sum(b * k for b, k in zip(_B5, ks) if b != 0.0)
            err_vec = h * sum(e * k for e, k in zip(_E, ks) if e != 0.0)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.sqrt(np.mean(np.abs(err_vec / scale) ** 2)))
            if err <= 1.0:
                t = target if clipped else t + h
                y = y_new
                k1 = ks[6]
                factor = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
                h_nat = max(h_nat, h * factor) if clipped else h * factor
            else:
                h_nat = h * max(0.1, 0.9 * err ** -0.2)
                if h_nat < 1e-14 * max(1.0, abs(t)):
                    raise SingularityError(f"step size underflow near t={t!r}", time=t)
        out[i] = y.reshape(shape)
    return out
