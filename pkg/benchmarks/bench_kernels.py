"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--samples N] [--repeat R]

Both backends must return identical jump counts and states for the same
seed; the script checks that before timing.
"""

import argparse
import time

import numpy as np

from semimarkov import _purepy
from semimarkov.renewal import ErlangTwo, Exponential, Hypoexponential, Mixture

try:
    from semimarkov import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled kernels not built; only the fallback is available")
        return

    times = np.array([0.5, 1.0, 2.0, 4.0])
    print(f"{'kernel':<28}{'numpy [s]':>12}{'cython [s]':>12}{'speedup':>10}")
    for w in (Exponential(1.0), ErlangTwo(1.0), Hypoexponential(0.5, 2.0), Mixture(1.0, 6.0, 0.6)):
        call = (w.family_code, w.sampler_params, 1.0, 0.5, times, args.samples, 7, 0)
        ref = _purepy.simulate_counts(*call)
        got = _kernels.simulate_counts(*call)
        assert all(np.array_equal(a, b) for a, b in zip(ref, got)), "backends disagree"
        tp = best_of(lambda: _purepy.simulate_counts(*call), args.repeat)
        tc = best_of(lambda: _kernels.simulate_counts(*call), args.repeat)
        print(f"{'simulate ' + w.name:<28}{tp:>12.4f}{tc:>12.4f}{tp / tc:>10.1f}")

    rng = np.random.default_rng(3)
    a = rng.normal(size=(20_000, 4, 4)) + 1j * rng.normal(size=(20_000, 4, 4))
    h = a + np.conj(np.swapaxes(a, -1, -2))
    err = np.abs(_kernels.jacobi_eigvalsh(h) - _purepy.jacobi_eigvalsh(h)).max()
    assert err < 1e-12, err
    tp = best_of(lambda: _purepy.jacobi_eigvalsh(h), args.repeat)
    tc = best_of(lambda: _kernels.jacobi_eigvalsh(h), args.repeat)
    print(f"{'jacobi 4x4 x 20000':<28}{tp:>12.4f}{tc:>12.4f}{tp / tc:>10.1f}")


if __name__ == "__main__":
    main()
