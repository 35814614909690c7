"""Bracketed root finding on a uniform grid."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..errors import InvalidInputError, NumericalError


def _evaluate(fn: Callable, x: np.ndarray) -> np.ndarray:
    try:
        y = np.asarray(fn(x), dtype=float)
        if y.shape == x.shape:
            return y
    except (TypeError, ValueError):
        pass
    return np.array([fn(float(v)) for v in x], dtype=float)


def brent(fn: Callable[[float], float], a: float, b: float, fa: float | None = None,
          fb: float | None = None, rtol: float = 1e-12, atol: float = 1e-300, maxiter: int = 200) -> float:
    """Root of ``fn`` in the sign-change bracket [a, b].

    Inverse quadratic / secant steps with a bisection safeguard (Brent 1973).
    """
    fa = fn(a) if fa is None else fa
    fb = fn(b) if fb is None else fb
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if math.copysign(1.0, fa) == math.copysign(1.0, fb):
        raise InvalidInputError(f"no sign change on [{a}, {b}]")
    c, fc = a, fa
    d = e = b - a
    for _ in range(maxiter):
        if math.copysign(1.0, fb) == math.copysign(1.0, fc):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol = 2.0 * rtol * abs(b) + 0.5 * atol
        m = 0.5 * (c - b)
        if abs(m) <= tol or fb == 0.0:
            return b
        if abs(e) >= tol and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p, q = 2.0 * m * s, 1.0 - s
            else:
                q, r = fa / fc, fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * m * q - abs(tol * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = m
        else:
            d = e = m
        a, fa = b, fb
        b += d if abs(d) > tol else math.copysign(tol, m)
        fb = fn(b)
    raise NumericalError("root refinement did not converge", bracket=(a, c), value=fb)


def find_roots(fn: Callable, t_max: float, step: float, t_min: float = 0.0, rtol: float = 1e-12) -> list[float]:
    """All sign-change roots of ``fn`` on [t_min, t_max], sorted.

    ``fn`` is sampled on a grid of spacing at most ``step`` (vectorised if it
    accepts arrays). Sign changes across a pole are recognised by the refined
    point not having a smaller magnitude than the bracket ends, and dropped.
    Tangential (even-order) zeros are not detected.
    """
    if step <= 0:
        raise InvalidInputError("step must be positive")
    if t_max < t_min:
        raise InvalidInputError("t_max must be >= t_min")
    n = max(int(math.ceil((t_max - t_min) / step)), 1)
    x = np.linspace(t_min, t_max, n + 1)
    y = _evaluate(fn, x)
    scalar = lambda v: float(_evaluate(fn, np.array([v]))[0])  # noqa: E731
    roots: list[float] = [float(v) for v in x[y == 0.0]]
    s = np.sign(y)
    idx = np.flatnonzero((s[:-1] * s[1:]) < 0)
    for i in idx:
        if not (np.isfinite(y[i]) and np.isfinite(y[i + 1])):
            continue
        r = brent(scalar, float(x[i]), float(x[i + 1]), float(y[i]), float(y[i + 1]), rtol=rtol,
                  atol=1e-15 * max(step, 1e-300))
        fr = abs(scalar(r))
        if fr > max(abs(y[i]), abs(y[i + 1])):
            continue
        roots.append(r)
    return sorted(roots)
