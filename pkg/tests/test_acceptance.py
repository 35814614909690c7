"""Acceptance criteria 1-10.

Each test carries ``@pytest.mark.acceptance(n)``; the conftest summary hook
prints one PASS/FAIL line per criterion at the end of the run.
"""
import math
import time

import numpy as np
import pytest

from semimarkov import cli
from semimarkov.classical import (
    SemiMarkovSpec,
    intermediate_propagator,
    is_stochastic,
    kolmogorov_distance,
    probability_vector,
)
from semimarkov.errors import UndefinedPropagatorError
from semimarkov.measures import Divisibility, blp_measure, classify, rhp_measure
from semimarkov.montecarlo import chapman_kolmogorov_residual, estimate_parity, markov_test, simulate
from semimarkov.numerics import hermitian_eigenvalues, invert_laplace
from semimarkov.quantum import (
    Model,
    ModelSpec,
    apply_transfer,
    choi,
    choi_eigenvalues_diagonal,
    dissipative_cp_condition,
    evolve_closed_form,
    evolve_time_local,
    intermediate_transfer,
    is_cp_map,
    series_solution,
    state_from_bloch,
    transfer_matrix,
)
from semimarkov.renewal import ErlangTwo, Exponential, Hypoexponential, Mixture

from conftest import FAMILIES

EXACT = 1.0 / (math.exp(math.pi) - 1.0)
HYPO = Hypoexponential.from_ratio(0.12, 1.0)
MIX = Mixture(1.0, 6.0, 0.6)
MODELS = [m.value for m in Model]
SEED = 424242


def random_bloch(rng, n):
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1)[:, None]
    return v * rng.uniform(size=(n, 1)) ** (1 / 3)


# 1 ---------------------------------------------------------------------------

@pytest.mark.acceptance(1)
def test_blp_exact_value_dephasing_erlang():
    start = time.perf_counter()
    for lam in (0.5, 1.0, 2.0):
        model = ModelSpec("dephasing", ErlangTwo(lam))
        numeric = blp_measure(model, mode="quadrature", tail=False).measure.value
        assert abs(numeric - EXACT) < 1e-4
        with_tail = blp_measure(model).measure.value
        assert abs(with_tail - EXACT) < 1e-9
    assert time.perf_counter() - start < 5.0


# 2 ---------------------------------------------------------------------------

@pytest.mark.acceptance(2)
@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_rhp_divergence_witnesses(lam):
    res = rhp_measure(ModelSpec("dephasing", ErlangTwo(lam)))
    assert res.infinite and res.value == math.inf
    n = len(res.witnesses)
    assert n >= 1
    expected = [(0.75 * math.pi + k * math.pi) / lam for k in range(n)]
    assert max(abs(a - b) for a, b in zip(res.witnesses, expected)) < 1e-8
    # every zero of q before the horizon is listed
    assert expected[-1] + math.pi / lam >= res.horizon


# 3 ---------------------------------------------------------------------------

@pytest.mark.acceptance(3)
def test_dissipative_hypoexponential_dissociation():
    start = time.perf_counter()
    model = ModelSpec("dissipative", HYPO)
    horizon = HYPO.default_horizon()
    grid = np.linspace(0.0, horizon, 10_001)[1:]
    assert np.all(np.asarray(HYPO.gamma_rate(grid)) > 0)
    assert np.any(np.asarray(HYPO.delta_rate(grid)) < 0)
    assert blp_measure(model).measure.value == 0.0
    rhp = rhp_measure(model)
    assert not rhp.infinite and rhp.value > 0.0 and math.isfinite(rhp.value)
    cls = classify(model)
    assert cls.kind is Divisibility.P_DIVISIBLE_ONLY
    assert time.perf_counter() - start < 10.0


# 4 ---------------------------------------------------------------------------

@pytest.mark.acceptance(4)
@pytest.mark.parametrize("lam", [0.5, 1.0, 3.0])
def test_mixture_time_dependent_markovian(lam):
    w = Mixture(lam, 6.0 * lam, 0.6)
    for m in MODELS:
        model = ModelSpec(m, w)
        assert blp_measure(model).measure.value == 0.0
        assert rhp_measure(model).value == 0.0
        assert classify(model).kind is Divisibility.CP_DIVISIBLE


# 5 ---------------------------------------------------------------------------

@pytest.mark.acceptance(5)
@pytest.mark.parametrize("name", sorted(FAMILIES))
@pytest.mark.parametrize("model_name", MODELS)
def test_oracle_triangle(name, model_name):
    w = FAMILIES[name]
    model = ModelSpec(model_name, w)
    rng = np.random.default_rng(SEED)
    upper = 5.0 / w.max_rate
    if model.uses_parity and w.parity_form is not None and w.parity_form.zeros(upper):
        upper = 0.99 * w.parity_form.zeros(upper)[0]
    times = np.sort(rng.uniform(0.0, upper, 20))
    rho0 = state_from_bloch(random_bloch(rng, 1)[0])
    ode = evolve_time_local(model, rho0, np.concatenate([[0.0], times]))[1:]
    for t, rho_ode in zip(times, ode):
        closed = evolve_closed_form(model, rho0, t)
        series = series_solution(model, rho0, t)
        assert series.tail_bound < 1e-6
        assert np.abs(closed - series.state).max() < 1e-6
        assert np.abs(closed - rho_ode).max() < 1e-6
        assert np.abs(series.state - rho_ode).max() < 1e-6


# 6 ---------------------------------------------------------------------------

@pytest.mark.acceptance(6)
def test_monte_carlo_fidelity():
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    for w in FAMILIES.values():
        spec = SemiMarkovSpec(w, 1.0)
        for i, t in enumerate(rng.uniform(0.0, 5.0 / w.max_rate, 10)):
            est = estimate_parity(spec, t, 100_000, seed=SEED + i)
            assert abs(est.z(w.parity(t))) < 3.0, (w.name, t, est.z(w.parity(t)))

    erl = SemiMarkovSpec(ErlangTwo(1.0), 1.0)
    assert abs(markov_test(erl, (0.0, 1.0, 2.0), (0, 0, 0), 1_000_000, seed=SEED).z) > 5.0

    exp = SemiMarkovSpec(Exponential(1.0), 1.0)
    for times in ((0.0, 0.5, 1.0), (0.0, 1.0, 2.0), (0.3, 0.8, 2.5)):
        assert abs(markov_test(exp, times, (0, 0, 0), 1_000_000, seed=SEED).z) < 3.0
        assert abs(markov_test(exp, times, (0, 1, 0), 1_000_000, seed=SEED).z) < 3.0
        assert chapman_kolmogorov_residual(exp, times, 1_000_000, seed=SEED).z < 3.0
    assert time.perf_counter() - start < 120.0


# 7 ---------------------------------------------------------------------------

def _st_pairs(rng, horizon, n=50):
    a, b = rng.uniform(0.0, horizon, n), rng.uniform(0.0, horizon, n)
    return np.minimum(a, b), np.maximum(a, b)


@pytest.mark.acceptance(7)
@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_classical_contraction(name):
    w = FAMILIES[name]
    rng = np.random.default_rng(SEED)
    p1 = np.array([probability_vector(x) for x in rng.uniform(size=100)])
    p2 = np.array([probability_vector(x) for x in rng.uniform(size=100)])
    checked = 0
    for pi in (0.5, 1.0):
        spec = SemiMarkovSpec(w, pi)
        for s, t in zip(*_st_pairs(rng, 10.0 / w.min_rate)):
            try:
                m = intermediate_propagator(spec, s, t)
            except UndefinedPropagatorError:
                continue
            if not is_stochastic(m):
                continue
            checked += 1
            for a, b in zip(p1, p2):
                assert kolmogorov_distance(m @ a, m @ b) <= kolmogorov_distance(a, b) + 1e-14
    assert checked >= 50


@pytest.mark.acceptance(7)
@pytest.mark.parametrize("name", sorted(FAMILIES))
@pytest.mark.parametrize("model_name", MODELS)
def test_quantum_contraction(name, model_name):
    w = FAMILIES[name]
    model = ModelSpec(model_name, w)
    rng = np.random.default_rng(SEED)
    r1, r2 = random_bloch(rng, 100), random_bloch(rng, 100)
    rho1 = [state_from_bloch(r) for r in r1]
    rho2 = [state_from_bloch(r) for r in r2]

    def trace_distances(F, left, right):
        diff = np.array([apply_transfer(F, a) - apply_transfer(F, b) for a, b in zip(left, right)])
        return 0.5 * np.abs(np.linalg.eigvalsh(diff)).sum(axis=1)

    checked = 0
    for s, t in zip(*_st_pairs(rng, 10.0 / w.min_rate)):
        try:
            mid = intermediate_transfer(model, s, t)
        except UndefinedPropagatorError:
            continue
        if not is_cp_map(mid):
            continue
        checked += 1
        d_s = trace_distances(transfer_matrix(model, s), rho1, rho2)
        d_t = trace_distances(transfer_matrix(model, t), rho1, rho2)
        assert np.all(d_t <= d_s + 1e-12)
    assert checked >= 1


# 8 ---------------------------------------------------------------------------

@pytest.mark.acceptance(8)
def test_choi_closed_form_vs_eigensolver():
    rng = np.random.default_rng(SEED)
    for l1, l2, l3 in rng.uniform(-1.5, 1.5, size=(100, 3)):
        closed = np.sort(choi_eigenvalues_diagonal(l1, l2, l3))
        numeric = hermitian_eigenvalues(choi(np.diag([1.0, l1, l2, l3])))
        assert np.abs(closed - numeric).max() < 1e-10


@pytest.mark.acceptance(8)
def test_cp2_threshold_is_choi_sign_change():
    model = ModelSpec("dissipative", HYPO)
    w = HYPO
    flips = 0
    for s in (0.5, 1.0, 2.0, 5.0):
        ts = np.linspace(s, s + 20.0, 401)[1:]
        cp_flags = []
        for t in ts:
            F = intermediate_transfer(model, s, t)
            l1, l2, l3 = F[1, 1], F[2, 2], F[3, 3]
            eig = (1.0 - l1 - l2 + l3) / 4.0
            cp2, positive = dissipative_cp_condition(model, s, t)
            g_ratio, q_ratio = w.survival(t) / w.survival(s), w.parity(t) / w.parity(s)
            assert abs(eig - (1.0 - 2.0 * g_ratio + q_ratio) / 4.0) < 1e-14
            assert positive
            assert cp2 == (eig >= 0.0)
            assert is_cp_map(F) == (eig >= -1e-12)
            cp_flags.append(cp2)
        flips += int(np.any(np.diff(np.array(cp_flags, dtype=int)) != 0))
    assert flips >= 1


# 9 ---------------------------------------------------------------------------

def parity_closed_form(w, t):
    """Parity function from the textbook closed forms of each family."""
    if isinstance(w, Exponential):
        return np.exp(-2.0 * w.rates[0] * t)
    if isinstance(w, ErlangTwo):
        lam = w.rates[0]
        return np.exp(-lam * t) * (np.cos(lam * t) + np.sin(lam * t))
    if isinstance(w, Hypoexponential):
        s = sum(w.rates)
        chi = math.sqrt(1.0 - 8.0 * math.prod(w.rates) / s ** 2)
        x = 0.5 * s * chi * t
        return np.exp(-0.5 * s * t) * (np.cosh(x) + np.sinh(x) / chi)
    l1, l2 = w.rates
    mu = w.sampler_params[2]
    # q-hat = (u + c)/(u^2 + 2 a u + d) for a two-rate mixture
    c = (1 - mu) * l1 + mu * l2
    a = 0.5 * (l1 + l2 + mu * l1 + (1 - mu) * l2)
    om = math.sqrt(a * a - 2.0 * l1 * l2)
    return np.exp(-a * t) * (np.cosh(om * t) + (c - a) / om * np.sinh(om * t))


@pytest.mark.acceptance(9)
@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_laplace_inversion_matches_closed_forms(name):
    w = FAMILIES[name]
    rng = np.random.default_rng(SEED)
    t = rng.uniform(0.0, 20.0 / w.min_rate, 50)
    got = invert_laplace(w.laplace_parity(), t)
    assert np.abs(got - parity_closed_form(w, t)).max() < 1e-9


@pytest.mark.acceptance(9)
@pytest.mark.parametrize("w", [Exponential(0.3), ErlangTwo(2.5), Hypoexponential(0.4, 3.0), Mixture(0.5, 2.0, 0.2)],
                         ids=["exp", "erlang2", "hypoexp", "mix"])
def test_laplace_inversion_other_rates(w):
    rng = np.random.default_rng(SEED + 1)
    t = rng.uniform(0.0, 20.0 / w.min_rate, 50)
    assert np.abs(invert_laplace(w.laplace_parity(), t) - parity_closed_form(w, t)).max() < 1e-9


# 10 --------------------------------------------------------------------------

@pytest.mark.acceptance(10)
def test_figure_data_matches_golden(tmp_path):
    golden = cli.Path(__file__).parent / "golden"
    first = cli.write_figures(tmp_path / "a", sorted(cli.figure_presets()), 0, 401, 5, "csv")
    second = cli.write_figures(tmp_path / "b", sorted(cli.figure_presets()), 0, 401, 5, "csv")
    assert len(first) == 9
    for a, b in zip(first, second):
        assert a.read_bytes() == b.read_bytes()
        assert a.read_bytes() == (golden / a.name).read_bytes(), a.name
