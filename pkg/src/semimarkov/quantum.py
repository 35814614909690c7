"""Qubit semi-Markov dynamics built from three bistochastic CPT maps.

Conventions: the first basis vector is the excited state |1>, so
``sigma_z = diag(1, -1)`` and ``sigma_+ = |1><0| = [[0, 1], [0, 0]]``. Maps are
represented by their transfer matrix ``F`` in the orthonormal operator basis
``(I, sigma_x, sigma_y, sigma_z) / sqrt(2)``: the Pauli coordinates
``v_k = Tr(X_k rho)`` transform as ``v -> F v``. For all three models ``F``
is diagonal, ``(1, l1, l2, l3)``, and acts on the Bloch vector by
componentwise scaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError, SingularityError, UndefinedPropagatorError
from .numerics import hermitian_eigenvalues, ode_evolve
from .renewal import MAX_JUMPS, WaitingTime

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
SPLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SMINUS = SPLUS.conj().T
PAULI = (I2, SX, SY, SZ)
BASIS = tuple(p / math.sqrt(2.0) for p in PAULI)

STATE_TOL = 1e-12
DEFAULT_TOL = 1e-10


class Model(str, Enum):
    DEPHASING = "dephasing"
    PROJECTION = "projection"
    DISSIPATIVE = "dissipative"


@dataclass(frozen=True)
class ModelSpec:
    variant: Model
    waiting: WaitingTime

    def __post_init__(self):
        object.__setattr__(self, "variant", Model(self.variant))
        if not isinstance(self.waiting, WaitingTime):
            raise InvalidInputError("waiting must be a WaitingTime")

    @property
    def uses_parity(self) -> bool:
        return self.variant is not Model.PROJECTION


# states -------------------------------------------------------------------

def validate_state(rho, tol: float = STATE_TOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise InvalidInputError(f"expected a 2x2 density matrix, got shape {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise InvalidInputError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise InvalidInputError("density matrix does not have unit trace")
    if hermitian_eigenvalues(rho)[0] < -tol:
        raise InvalidInputError("density matrix has a negative eigenvalue")
    return rho


def bloch_vector(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.array([np.trace(rho @ p).real for p in (SX, SY, SZ)])


def state_from_bloch(r) -> np.ndarray:
    x, y, z = (float(v) for v in r)
    return 0.5 * (I2 + x * SX + y * SY + z * SZ)


def pure_state(theta: float, phi: float) -> np.ndarray:
    """|psi> = cos(theta/2)|1> + e^{i phi} sin(theta/2)|0>  (theta = 0 is the excited pole)."""
    return state_from_bloch((math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)))


def pauli_coordinates(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.array([np.trace(x @ rho).real for x in BASIS])


def from_pauli_coordinates(v) -> np.ndarray:
    return sum(float(c) * x for c, x in zip(v, BASIS))


# elementary CPT maps ------------------------------------------------------

def apply_cpt(variant, rho) -> np.ndarray:
    """The jump map of each model: sigma_z conjugation, diagonal projection, or population swap."""
    variant = Model(variant)
    rho = np.asarray(rho, dtype=complex)
    if variant is Model.DEPHASING:
        return SZ @ rho @ SZ
    if variant is Model.PROJECTION:
        return np.diag(np.diag(rho))
    return SMINUS @ rho @ SPLUS + SPLUS @ rho @ SMINUS


def dissipator(a: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """A rho A^dag - {A^dag A, rho} / 2."""
    ad = a.conj().T
    ada = ad @ a
    return a @ rho @ ad - 0.5 * (ada @ rho + rho @ ada)


# transfer matrices --------------------------------------------------------

def transfer_diagonal(model: ModelSpec, t):
    """``(l1, l2, l3)`` of F(t, 0) = diag(1, l1, l2, l3); arrays for array ``t``."""
    w = model.waiting
    if model.variant is Model.DEPHASING:
        q = np.asarray(w.parity(t))
        return q, q, np.ones_like(q)
    g = np.asarray(w.survival(t))
    if model.variant is Model.PROJECTION:
        return g, g, np.ones_like(g)
    return g, g, np.asarray(w.parity(t))


def transfer_diagonal_derivative(model: ModelSpec, t):
    w = model.waiting
    if model.variant is Model.DEPHASING:
        dq = np.asarray(w.parity_derivative(t))
        return dq, dq, np.zeros_like(dq)
    dg = -np.asarray(w.density(t))
    if model.variant is Model.PROJECTION:
        return dg, dg, np.zeros_like(dg)
    return dg, dg, np.asarray(w.parity_derivative(t))


def _diag_matrix(lams) -> np.ndarray:
    return np.diag([1.0] + [float(x) for x in lams])


def transfer_matrix(model: ModelSpec, t: float) -> np.ndarray:
    return _diag_matrix(transfer_diagonal(model, float(t)))


def intermediate_diagonal(model: ModelSpec, s, t):
    """Diagonal of F(t, s) = F(t, 0) F(s, 0)^-1 (vectorized over s, t)."""
    num = transfer_diagonal(model, t)
    den = transfer_diagonal(model, s)
    den_arr = np.stack([np.asarray(d, dtype=float) for d in den])
    bad = np.any(den_arr == 0.0, axis=0)
    if np.any(bad):
        s_arr = np.broadcast_to(np.asarray(s, dtype=float), bad.shape)
        s_bad = float(np.ravel(s_arr)[np.flatnonzero(np.ravel(bad))[0]])
        raise UndefinedPropagatorError(f"F(s, 0) is not invertible at s={s_bad!r}", time=s_bad)
    return tuple(np.asarray(a) / np.asarray(b) for a, b in zip(num, den))


def intermediate_transfer(model: ModelSpec, s: float, t: float) -> np.ndarray:
    s, t = float(s), float(t)
    if not 0.0 <= s <= t:
        raise InvalidInputError("need 0 <= s <= t")
    return _diag_matrix(intermediate_diagonal(model, s, t))


def apply_transfer(F, rho) -> np.ndarray:
    return from_pauli_coordinates(np.asarray(F, dtype=float) @ pauli_coordinates(rho))


# evolution ----------------------------------------------------------------

def evolve_closed_form(model: ModelSpec, rho0, t: float) -> np.ndarray:
    rho0 = validate_state(rho0)
    lam = transfer_diagonal(model, float(t))
    r = bloch_vector(rho0) * np.array([float(x) for x in lam])
    return state_from_bloch(r)


def _singular_times(model: ModelSpec, t_lo: float, t_hi: float) -> list[float]:
    if not model.uses_parity:
        return []
    form = model.waiting.parity_form
    if form is None:
        return []
    return [z for z in form.zeros(t_hi) if z >= t_lo]


def generator(model: ModelSpec, t: float):
    """Time-local generator at time t as a function rho -> d rho / dt."""
    w = model.waiting
    if model.variant is Model.DEPHASING:
        gam = w.gamma_rate(t)
        return lambda rho: gam * dissipator(SZ, rho)
    if model.variant is Model.PROJECTION:
        h = w.hazard(t)
        p_up = np.diag([1.0, 0.0]).astype(complex)
        p_down = np.diag([0.0, 1.0]).astype(complex)
        return lambda rho: h * (dissipator(p_up, rho) + dissipator(p_down, rho))
    gam = w.gamma_rate(t)
    dlt = w.delta_rate(t)
    return lambda rho: gam * (dissipator(SPLUS, rho) + dissipator(SMINUS, rho)) + dlt * dissipator(SZ, rho)


def evolve_time_local(model: ModelSpec, rho0, grid, rtol: float = 1e-11, atol: float = 1e-12):
    """Integrate the time-local master equation onto ``grid`` (grid[0] is the initial time)."""
    rho0 = validate_state(rho0)
    grid = np.asarray(grid, dtype=float)
    sing = _singular_times(model, float(grid[0]), float(grid[-1]))
    if sing:
        raise SingularityError(f"grid crosses a zero of the parity function at t={sing[0]!r}", time=sing[0])

    def rhs(t, rho):
        return generator(model, t)(rho)

    return list(ode_evolve(rhs, rho0, grid, rtol=rtol, atol=atol))


class SeriesSolution(NamedTuple):
    state: np.ndarray
    tail_bound: float


def series_solution(model: ModelSpec, rho0, t: float, n_max: int = MAX_JUMPS) -> SeriesSolution:
    """Sum over jump numbers: sum_n p_n(t) E^n(rho0), truncated at n_max.

    ``tail_bound`` bounds the probability of more than n_max jumps, which
    bounds the trace-norm error of the truncated sum.
    """
    rho0 = validate_state(rho0)
    if not 0 <= n_max <= MAX_JUMPS:
        raise InvalidInputError(f"n_max must lie in [0, {MAX_JUMPS}]")
    w = model.waiting
    out = np.zeros((2, 2), dtype=complex)
    term = rho0.copy()
    for n in range(n_max + 1):
        out = out + w.jump_count_probability(n, t) * term
        term = apply_cpt(model.variant, term)
    return SeriesSolution(out, w.jump_count_tail_bound(n_max, t))


# Choi matrix and positivity -------------------------------------------------

def choi(F) -> np.ndarray:
    """Choi matrix (unit trace) of the map with transfer matrix F."""
    F = np.asarray(F, dtype=float)
    if F.shape != (4, 4):
        raise InvalidInputError("transfer matrix must be 4x4")
    if np.abs(F[0] - np.array([1.0, 0.0, 0.0, 0.0])).max() > 1e-12:
        raise InvalidInputError("map is not trace preserving (first row of F must be (1, 0, 0, 0))")
    out = np.zeros((4, 4), dtype=complex)
    for k in range(4):
        for l in range(4):
            if F[k, l] != 0.0:
                out += F[k, l] * np.kron(BASIS[k], BASIS[l].T)
    return 0.5 * out


CHOI_SIGNS = ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1))


def choi_eigenvalues_diagonal(l1, l2, l3) -> np.ndarray:
    """Closed-form Choi eigenvalues of diag(1, l1, l2, l3), in CHOI_SIGNS order (last axis)."""
    l1, l2, l3 = (np.asarray(x, dtype=float) for x in (l1, l2, l3))
    return np.stack([(1.0 + a * l1 + b * l2 + c * l3) / 4.0 for a, b, c in CHOI_SIGNS], axis=-1)


def _is_diagonal(F: np.ndarray) -> bool:
    return bool(np.all(F == np.diag(np.diag(F))))


def _bloch_grid(n: int = 400) -> np.ndarray:
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    phi = math.pi * (1.0 + math.sqrt(5.0)) * i
    rad = np.sqrt(1.0 - z * z)
    return np.stack([rad * np.cos(phi), rad * np.sin(phi), z], axis=1)


def _max_image_radius(F: np.ndarray, n: int = 400) -> float:
    """Largest Bloch radius of images of pure states: grid, then coordinate refinement."""
    A, b = F[1:, 1:], F[1:, 0]

    def radius(theta, phi):
        r = np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])
        return float(np.linalg.norm(A @ r + b))

    pts = _bloch_grid(n)
    radii = np.linalg.norm(pts @ A.T + b, axis=1)
    k = int(np.argmax(radii))
    theta, phi = math.acos(max(-1.0, min(1.0, pts[k, 2]))), math.atan2(pts[k, 1], pts[k, 0])
    best = float(radii[k])
    step = math.pi / math.sqrt(n)
    for _ in range(60):
        improved = False
        for dt, dp in ((step, 0), (-step, 0), (0, step), (0, -step)):
            val = radius(theta + dt, phi + dp)
            if val > best:
                best, theta, phi, improved = val, theta + dt, phi + dp, True
        if not improved:
            step *= 0.5
            if step < 1e-10:
                break
    return best


def is_positive_map(F, tol: float = DEFAULT_TOL) -> bool:
    """Positivity (and trace preservation) of a qubit map.

    Diagonal unital F: all |l_i| <= 1. Otherwise a heuristic: every pure
    state on a 400-point Fibonacci grid, refined locally, must map inside
    the Bloch ball.
    """
    F = np.asarray(F, dtype=float)
    if _is_diagonal(F):
        if abs(F[0, 0] - 1.0) > tol:
            return False
        return bool(np.all(np.abs(np.diag(F)[1:]) <= 1.0 + tol))
    if np.abs(F[0] - np.array([1.0, 0.0, 0.0, 0.0])).max() > tol:
        return False
    return _max_image_radius(F) <= 1.0 + tol


def choi_min_eigenvalue(F) -> float:
    F = np.asarray(F, dtype=float)
    if _is_diagonal(F):
        return float(choi_eigenvalues_diagonal(*np.diag(F)[1:]).min())
    return float(hermitian_eigenvalues(choi(F))[0])


def is_cp_map(F, tol: float = DEFAULT_TOL) -> bool:
    return choi_min_eigenvalue(F) >= -tol


def dissipative_cp_condition(model: ModelSpec, s: float, t: float) -> tuple[bool, bool]:
    """``(g(t)/g(s) <= (1 + q(t)/q(s))/2, |q(t)/q(s)| <= 1)`` for the intermediate map."""
    w = model.waiting
    gr = w.survival(t) / w.survival(s)
    qs = w.parity(s)
    if qs == 0.0:
        raise UndefinedPropagatorError(f"q(s) vanishes at s={s!r}", time=float(s))
    qr = w.parity(t) / qs
    return gr <= 0.5 * (1.0 + qr), abs(qr) <= 1.0


# distances ------------------------------------------------------------------

def trace_distance(rho1, rho2) -> float:
    diff = np.asarray(rho1, dtype=complex) - np.asarray(rho2, dtype=complex)
    return 0.5 * float(np.abs(hermitian_eigenvalues(diff)).sum())


def trace_distance_pair(model: ModelSpec, rho1_0, rho2_0, t):
    """D(t) for two evolved initial states (vectorized over t)."""
    delta = bloch_vector(rho1_0) - bloch_vector(rho2_0)
    lam = transfer_diagonal(model, t)
    sq = sum((np.asarray(l) * d) ** 2 for l, d in zip(lam, delta))
    return 0.5 * np.sqrt(sq)


def trace_distance_derivative(model: ModelSpec, rho1_0, rho2_0, t):
    """dD/dt = sum_i l_i l_i' d_i^2 / (4 D) with d the initial Bloch difference."""
    delta = bloch_vector(rho1_0) - bloch_vector(rho2_0)
    lam = transfer_diagonal(model, t)
    dlam = transfer_diagonal_derivative(model, t)
    D = trace_distance_pair(model, rho1_0, rho2_0, t)
    if np.any(D == 0):
        raise SingularityError("trace distance vanishes; derivative undefined",
                               time=float(np.atleast_1d(t)[np.flatnonzero(np.atleast_1d(D) == 0)[0]]))
    num = sum(np.asarray(l) * np.asarray(dl) * d * d for l, dl, d in zip(lam, dlam, delta))
    out = num / (4.0 * D)
    return float(out) if np.ndim(out) == 0 else out
