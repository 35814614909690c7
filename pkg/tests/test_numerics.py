import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sci_integrate
from scipy.linalg import expm

from semimarkov.errors import InvalidInputError, NumericalError
from semimarkov.numerics import (
    IntervalSet,
    PoleExpansion,
    RationalLaplace,
    brent,
    find_roots,
    hermitian_eigenvalues,
    integrate,
    invert_laplace,
    ode_evolve,
    partial_fractions,
    trace_norm,
)
from semimarkov.quantum import choi

from conftest import FAMILIES, erlang_q


# inverse Laplace transform -------------------------------------------------

def test_invert_single_pole():
    rl = RationalLaplace((1.0,), (1.0, 1.0))
    assert abs(invert_laplace(rl, 1.0) - math.exp(-1.0)) < 1e-14


def test_invert_erlang_parity_transform():
    # q-hat = (u + 2)/(u^2 + 2u + 2) for lambda = 1
    rl = RationalLaplace((1.0, 2.0), (1.0, 2.0, 2.0))
    assert abs(invert_laplace(rl, 1.0) - erlang_q(1.0, 1.0)) < 1e-13
    assert abs(invert_laplace(rl, 1.0) - 0.508326) < 1e-6


def test_invert_erlang_survival_transform():
    # g-hat = (u + 2)/(u + 1)^2
    rl = RationalLaplace((1.0, 2.0), (1.0, 2.0, 1.0))
    assert abs(invert_laplace(rl, 1.0) - 2.0 * math.exp(-1.0)) < 1e-13


def test_invert_double_pole_and_direct_term():
    # u^2/(u+1)^2 = 1 - 2/(u+1) + 1/(u+1)^2 ; regular part -2e^-t + t e^-t
    rl = RationalLaplace((1.0, 0.0, 0.0), (1.0, 2.0, 1.0))
    assert rl.direct_term == 1.0
    t = np.linspace(0.0, 5.0, 11)
    assert np.abs(invert_laplace(rl, t) - (-2.0 + t) * np.exp(-t)).max() < 1e-13


def test_invert_degree_six():
    # product of three distinct quadratics; compare with the residue sum by hand
    roots = [-0.5 + 1j, -0.5 - 1j, -1.0, -2.0, -3.0 + 0.5j, -3.0 - 0.5j]
    den = np.real(np.poly(roots))
    rl = RationalLaplace((1.0,), tuple(den))
    t = np.linspace(0.0, 4.0, 9)
    ref = np.zeros_like(t)
    for r in roots:
        others = np.prod([r - s for s in roots if s != r])
        ref = ref + (np.exp(r * t) / others).real
    assert np.abs(invert_laplace(rl, t) - ref).max() < 1e-12


def test_invert_survival_every_family():
    rng = np.random.default_rng(11)
    for w in FAMILIES.values():
        rl = w.laplace_survival()
        t = rng.uniform(0.0, 20.0 / w.min_rate, 50)
        assert np.abs(invert_laplace(rl, t) - w.survival(t)).max() < 1e-9


def test_rational_laplace_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        RationalLaplace((1.0, 0.0, 0.0), (1.0, 1.0))
    with pytest.raises(InvalidInputError):
        RationalLaplace((1.0,), (0.0,))
    with pytest.raises(InvalidInputError):
        RationalLaplace((1.0,), tuple([1.0] * 8))
    with pytest.raises(InvalidInputError):
        invert_laplace(RationalLaplace((1.0,), (1.0, 1.0)), -1.0)


def test_pole_expansion_high_multiplicity():
    # 1/(u+1)^10 -> t^9 e^-t / 9!
    pe = PoleExpansion.from_factored([1.0], [(-1.0, 10)])
    t = np.linspace(0.0, 8.0, 17)
    assert np.abs(pe(t) - t ** 9 * np.exp(-t) / math.factorial(9)).max() < 1e-14


def test_partial_fractions_initial_value():
    rl = RationalLaplace((1.0, 2.0), (1.0, 2.0, 2.0))
    assert abs(partial_fractions(rl)(0.0) - rl.initial_value()) < 1e-14


def test_derivative_transform_matches_finite_difference():
    rl = RationalLaplace((1.0, 2.0), (1.0, 2.0, 2.0))
    d = rl.derivative_transform()
    h = 1e-6
    for t in (0.3, 1.0, 2.5):
        fd = (invert_laplace(rl, t + h) - invert_laplace(rl, t - h)) / (2 * h)
        assert abs(invert_laplace(d, t) - fd) < 1e-8


# roots --------------------------------------------------------------------

def test_find_roots_erlang_parity():
    roots = find_roots(lambda t: erlang_q(1.0, t), 10.0, 0.05)
    expected = [0.75 * math.pi + n * math.pi for n in range(3)]
    assert len(roots) == 3
    assert max(abs(a - b) for a, b in zip(roots, expected)) < 1e-10


def test_find_roots_none():
    assert find_roots(lambda t: np.ones_like(t), 10.0, 0.1) == []
    assert find_roots(lambda t: np.exp(-2.0 * t), 10.0, 0.1) == []


def test_find_roots_skips_poles():
    roots = find_roots(np.tan, 4.0, 0.01, t_min=0.5)
    assert len(roots) == 1 and abs(roots[0] - math.pi) < 1e-10


def test_brent_against_known_root():
    assert abs(brent(math.cos, 0.0, 3.0) - 0.5 * math.pi) < 1e-12
    with pytest.raises(InvalidInputError):
        brent(lambda x: x * x + 1.0, -1.0, 1.0)


# quadrature ---------------------------------------------------------------

def test_integrate_examples():
    assert abs(integrate(lambda t: 1.0, 0.0, 1.0) - 1.0) < 1e-14
    assert abs(integrate(lambda t: 2.0 * math.exp(-2.0 * t), 0.0, 40.0) - 1.0) < 1e-9


def test_integrate_growth_of_erlang_parity():
    def dq(t):
        return -2.0 * math.exp(-t) * math.sin(t)  # derivative of e^-t (cos t + sin t)

    val = integrate(lambda t: abs(dq(t)), 0.75 * math.pi, math.pi)
    assert abs(val - math.exp(-math.pi)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(0.1, 3.0))
def test_integrate_antiderivative_known(a, k):
    val = integrate(lambda t: k * math.cos(k * t) + t, 0.0, a)
    assert abs(val - (math.sin(k * a) + 0.5 * a * a)) < 1e-9


def test_integrate_matches_scipy_quad():
    fn = lambda t: math.exp(-t) * math.sin(3 * t) ** 2  # noqa: E731
    ref, _ = sci_integrate.quad(fn, 0.0, 7.0, epsabs=1e-13, epsrel=1e-13)
    assert abs(integrate(fn, 0.0, 7.0, tol=1e-12) - ref) < 1e-11


def test_integrate_singular_integrand_fails():
    with pytest.raises(NumericalError):
        integrate(lambda t: 1.0 / t if t != 0 else 0.0, 0.0, 1.0, max_intervals=200)


# eigenvalues --------------------------------------------------------------

def test_hermitian_eigenvalues_examples():
    assert np.abs(hermitian_eigenvalues(np.eye(2)) - [1.0, 1.0]).max() < 1e-15
    assert np.abs(hermitian_eigenvalues(np.diag([1.0, -1.0])) - [-1.0, 1.0]).max() < 1e-15
    ev = hermitian_eigenvalues(choi(np.diag([1.0, 0.9, 0.9, 0.7])))
    assert abs(ev[0] + 0.025) < 1e-12


def test_hermitian_eigenvalues_rejects_non_hermitian():
    with pytest.raises(InvalidInputError):
        hermitian_eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(InvalidInputError):
        hermitian_eigenvalues(np.eye(3))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([2, 4]))
def test_eigenvalues_match_numpy_and_trace(seed, n):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = a + a.conj().T
    ev = hermitian_eigenvalues(h)
    assert np.all(np.diff(ev) >= 0)
    assert np.abs(ev - np.linalg.eigvalsh(h)).max() < 1e-12 * max(1.0, np.abs(ev).max())
    assert abs(ev.sum() - np.trace(h).real) < 1e-12 * max(1.0, np.abs(h).max()) * n


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_psd_eigenvalues_nonnegative(seed):
    rng = np.random.default_rng(seed)
    b = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    psd = b @ b.conj().T  # rank 2, two zero eigenvalues
    assert hermitian_eigenvalues(psd).min() >= -1e-12


def test_trace_norm_stack():
    m = np.stack([np.diag([1.0, -2.0]), np.diag([0.5, 0.5])])
    assert np.abs(trace_norm(m) - [3.0, 1.0]).max() < 1e-15


# ODE ----------------------------------------------------------------------

def test_ode_zero_rhs():
    v = np.array([1.0, -2.0, 3.0])
    out = ode_evolve(lambda t, y: np.zeros_like(y), v, [0.0, 0.5, 1.0])
    assert np.abs(np.asarray(out) - v).max() == 0.0


def test_ode_exponential_decay():
    out = ode_evolve(lambda t, y: -2.0 * y, [1.0], [0.0, 1.0], rtol=1e-12, atol=1e-14)
    assert abs(out[-1][0] - math.exp(-2.0)) < 1e-9


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_ode_linear_system_matches_expm(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(3, 3)) - 2.0 * np.eye(3)
    y0 = rng.normal(size=3)
    grid = np.linspace(0.0, 2.0, 5)
    out = ode_evolve(lambda t, y: a @ y, y0, grid, rtol=1e-11, atol=1e-12)
    for t, y in zip(grid, out):
        assert np.abs(y - expm(a * t) @ y0).max() < 1e-8


def test_ode_rejects_bad_grid():
    with pytest.raises(InvalidInputError):
        ode_evolve(lambda t, y: y, [1.0], [1.0, 0.5])


# interval sets ------------------------------------------------------------

def test_interval_set_validation():
    iv = IntervalSet(((0.0, 1.0), (2.0, 3.5)))
    assert iv.contains(0.5) and not iv.contains(1.5) and abs(iv.total_length - 2.5) < 1e-15
    with pytest.raises(InvalidInputError):
        IntervalSet(((0.0, 2.0), (1.0, 3.0)))
    with pytest.raises(InvalidInputError):
        IntervalSet(((1.0, 1.0),))
