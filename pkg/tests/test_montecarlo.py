import math

import numpy as np
import pytest

from semimarkov import _backend, _purepy
from semimarkov.classical import SemiMarkovSpec, trajectory
from semimarkov.errors import InsufficientSamplesError, InvalidInputError
from semimarkov.montecarlo import (
    chapman_kolmogorov_residual,
    estimate_conditional,
    estimate_jump_counts,
    estimate_one_point,
    estimate_parity,
    markov_test,
    sample_trajectory,
    simulate,
)
from semimarkov.renewal import ErlangTwo, Exponential

from conftest import FAMILIES, erlang_q

SEED = 20240611


def test_splitmix_reference_values():
    # SplitMix64 reference output for state 1234567 (from the published C reference)
    rng = _purepy.SplitMix64.__new__(_purepy.SplitMix64)
    rng.state = 1234567
    out = [rng.next_u64() for _ in range(3)]
    assert out == [6457827717110365317, 3203168211198807973, 9817491932198370423]


def test_uniforms_in_unit_interval():
    rng = _purepy.SplitMix64(1, 0)
    u = np.array([rng.uniform() for _ in range(20000)])
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 3 * math.sqrt(1 / 12 / u.size)


def test_sample_trajectory_replayable():
    spec = SemiMarkovSpec(Exponential(1.0), 1.0)
    a = sample_trajectory(spec, 10.0, seed=3)
    b = sample_trajectory(spec, 10.0, seed=3)
    assert np.array_equal(a.jump_times, b.jump_times) and np.array_equal(a.states, b.states)
    assert np.all(np.diff(a.jump_times) > 0) and (a.jump_times.size == 0 or a.jump_times[-1] <= 10.0)
    with pytest.raises(InvalidInputError):
        sample_trajectory(spec, 0.0, seed=3)


def test_scalar_sampler_matches_kernel_streams(family):
    spec = SemiMarkovSpec(family, 1.0)
    times = np.array([0.3, 1.0, 2.5, 6.0])
    init, counts, states = simulate(spec, times, 50, seed=SEED)
    for i in range(50):
        tr = sample_trajectory(spec, 6.0, seed=SEED, stream=i)
        assert tr.states[0] == init[i]
        for j, t in enumerate(times):
            assert np.searchsorted(tr.jump_times, t, side="right") == counts[i, j]
            assert tr.state_at(t) == states[i, j]


def test_mean_jump_count_exponential():
    lam, horizon = 1.5, 4.0
    _, counts, _ = simulate(SemiMarkovSpec(Exponential(lam), 1.0), [horizon], 100_000, seed=SEED)
    c = counts[:, 0]
    se = c.std() / math.sqrt(c.size)
    assert abs(c.mean() - lam * horizon) < 3 * se


def test_mean_first_jump_time_erlang():
    lam = 2.0
    spec = SemiMarkovSpec(ErlangTwo(lam), 1.0)
    first = np.array([sample_trajectory(spec, 50.0, seed=SEED, stream=i).jump_times[0] for i in range(20_000)])
    se = first.std() / math.sqrt(first.size)
    assert abs(first.mean() - 2.0 / lam) < 3 * se


def test_estimate_parity_examples():
    est = estimate_parity(SemiMarkovSpec(Exponential(1.0), 1.0), 0.5, 100_000, seed=SEED)
    assert abs(est.z(math.exp(-1.0))) < 3
    est = estimate_parity(SemiMarkovSpec(ErlangTwo(1.0), 1.0), 1.0, 100_000, seed=SEED)
    assert abs(est.z(erlang_q(1.0, 1.0))) < 3
    est = estimate_parity(SemiMarkovSpec(ErlangTwo(1.0), 1.0), 0.0, 10_000, seed=SEED)
    assert est.estimate == 1.0 and est.stderr == 0.0
    with pytest.raises(InvalidInputError):
        estimate_parity(SemiMarkovSpec(ErlangTwo(1.0), 1.0), 1.0, 10, seed=SEED)


def test_one_point_estimates_match_trajectory(family):
    rng = np.random.default_rng(17)
    times = rng.uniform(0.0, 5.0 / family.min_rate, 10)
    for pi in (0.5, 1.0):
        spec = SemiMarkovSpec(family, pi)
        w0 = 0.8
        est = estimate_one_point(spec, times, 100_000, seed=SEED, w0=w0)
        exact = trajectory(spec, w0, times)
        for e, x in zip(est, exact):
            assert abs(e.z(x)) < 3


def test_jump_count_histogram(family):
    t = 2.0 / family.min_rate if family.min_rate < 1 else 2.0
    est = estimate_jump_counts(SemiMarkovSpec(family, 1.0), t, 100_000, seed=SEED, n_max=10)
    for n, e in enumerate(est):
        p = family.jump_count_probability(n, t)
        se = math.sqrt(max(p * (1 - p), 1e-12) / e.count)
        assert abs(e.estimate - p) < 3 * se + 1e-12


def test_seeded_runs_are_bit_reproducible(family):
    spec = SemiMarkovSpec(family, 1.0)
    a = simulate(spec, [0.5, 1.0, 3.0], 30_000, seed=5)
    b = simulate(spec, [0.5, 1.0, 3.0], 30_000, seed=5)
    c = simulate(spec, [0.5, 1.0, 3.0], 30_000, seed=6)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not np.array_equal(a[1], c[1])


def test_results_independent_of_chunking_and_workers(monkeypatch):
    import semimarkov.montecarlo as mc

    spec = SemiMarkovSpec(ErlangTwo(1.0), 1.0)
    ref = simulate(spec, [0.5, 2.0], 10_000, seed=9)
    monkeypatch.setattr(mc, "CHUNK", 777)
    chunked = simulate(spec, [0.5, 2.0], 10_000, seed=9)
    threaded = simulate(spec, [0.5, 2.0], 10_000, seed=9, workers=4)
    for x, y, z in zip(ref, chunked, threaded):
        assert np.array_equal(x, y) and np.array_equal(x, z)


def test_markov_test_exponential_passes():
    res = markov_test(SemiMarkovSpec(Exponential(1.0), 1.0), (0.0, 1.0, 2.0), (0, 0, 0), 200_000, seed=SEED)
    assert abs(res.z) < 3
    full, reduced = estimate_conditional(SemiMarkovSpec(Exponential(1.0), 1.0), (0.0, 1.0, 2.0), (0, 0, 0),
                                         200_000, seed=SEED)
    assert abs(full.estimate - reduced.estimate) < 3 * math.hypot(full.stderr, reduced.stderr)


def test_markov_test_erlang_detects_memory():
    res = markov_test(SemiMarkovSpec(ErlangTwo(1.0), 1.0), (0.0, 1.0, 2.0), (0, 0, 0), 1_000_000, seed=SEED)
    assert abs(res.z) > 5


def test_conditional_degenerate_times():
    full, reduced = estimate_conditional(SemiMarkovSpec(ErlangTwo(1.0), 1.0), (0.0, 1.0, 1.0), (0, 1, 1),
                                         20_000, seed=SEED)
    assert full.estimate == 1.0 and reduced.estimate == 1.0
    full, _ = estimate_conditional(SemiMarkovSpec(ErlangTwo(1.0), 1.0), (0.0, 1.0, 1.0), (0, 1, 0),
                                   20_000, seed=SEED)
    assert full.estimate == 0.0


def test_markov_test_reports_rare_conditioning():
    with pytest.raises(InsufficientSamplesError) as info:
        markov_test(SemiMarkovSpec(Exponential(1.0), 1.0), (0.0, 0.001, 1.0), (0, 1, 0), 20_000, seed=SEED)
    assert info.value.count < info.value.required


def test_chapman_kolmogorov():
    exp_res = chapman_kolmogorov_residual(SemiMarkovSpec(Exponential(1.0), 1.0), (0.0, 1.0, 2.0), 400_000, seed=SEED)
    assert exp_res.z < 3
    erl = chapman_kolmogorov_residual(SemiMarkovSpec(ErlangTwo(1.0), 1.0), (0.0, 1.0, 2.0), 1_000_000, seed=SEED)
    assert erl.z > 5
    one = chapman_kolmogorov_residual(SemiMarkovSpec(ErlangTwo(1.0), 0.5), (0.5, 1.0, 2.0), mode="one_point")
    assert one.residual < 1e-15


def test_backend_selected():
    assert _backend.NAME in ("cython", "numpy")


@pytest.mark.skipif(not _backend.COMPILED, reason="compiled kernels not built")
def test_compiled_and_fallback_samplers_agree(family):
    from semimarkov import _kernels

    call = (family.family_code, family.sampler_params, 0.75, 0.3, np.array([0.1, 1.0, 4.0]), 20_000, 11, 5)
    for x, y in zip(_purepy.simulate_counts(*call), _kernels.simulate_counts(*call)):
        assert np.array_equal(x, y)


@pytest.mark.skipif(not _backend.COMPILED, reason="compiled kernels not built")
def test_compiled_and_fallback_jacobi_agree():
    from semimarkov import _kernels

    rng = np.random.default_rng(2)
    a = rng.normal(size=(500, 4, 4)) + 1j * rng.normal(size=(500, 4, 4))
    h = a + np.conj(np.swapaxes(a, -1, -2))
    ref = np.linalg.eigvalsh(h)
    assert np.abs(_kernels.jacobi_eigvalsh(h) - ref).max() < 1e-12
    assert np.abs(_purepy.jacobi_eigvalsh(h) - ref).max() < 1e-12


def test_pure_python_backend_forced(tmp_path):
    import subprocess
    import sys

    code = "import semimarkov._backend as b; print(b.NAME)"
    out = subprocess.run([sys.executable, "-c", code], env={"SEMIMARKOV_PURE_PYTHON": "1", "PATH": ""},
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
