"""Timing comparison: compiled kernels vs the NumPy fallback.

Run as a script. Exercises the three hot kernels on problem sizes close
to the real workloads and prints per-call timings plus speedups.
"""

import time

import numpy as np

from swarmscale import COMPILED
from swarmscale import _kernels_py as kpy

if COMPILED:
    from swarmscale import _kernels_c as kc
else:
    kc = None


def best_of(fn, repeats=5):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_interaction(kern, n=100000):
    rng = np.random.default_rng(0)
    x = rng.uniform(0.0, 50.0, n)
    v = rng.standard_normal(n)
    lam = rng.uniform(0.0, 1.0, n)

    def run():
        state = np.random.default_rng(1)
        kern.interaction_pass_1d(
            x.copy(), v.copy(), lam.copy(),
            0.01e-3, 0.5e-3, 1.0e-3, 1000.0, 1000.0, 1e-3, 0.8, 1e-3,
            False, 0.02, state,
        )

    return best_of(run)


def bench_sources_1d(kern, n=20000, kmax=8):
    rng = np.random.default_rng(2)
    rho = np.abs(rng.standard_normal(n)) + 0.1
    u1 = 0.1 * rng.standard_normal(n)
    l = rng.uniform(0.0, 1.0, n)
    return best_of(lambda: kern.sources_1d(rho, u1, l, 0.0025, kmax, 0.01, 0.5, 1.0, 0.8, 1.0, 1.0))


def bench_sources_2d(kern, n=100, rcells=12):
    rng = np.random.default_rng(3)
    shape = (n, n)
    rho = np.abs(rng.standard_normal(shape)) + 0.1
    u1 = 0.1 * rng.standard_normal(shape)
    u2 = 0.1 * rng.standard_normal(shape)
    l = rng.uniform(0.0, 1.0, shape)
    off = np.array(
        [(a, b) for a in range(-rcells, rcells + 1) for b in range(-rcells, rcells + 1)
         if (a, b) != (0, 0) and a * a + b * b <= rcells * rcells],
        dtype=np.int64,
    )
    return best_of(lambda: kern.sources_2d(rho, u1, u2, l, 0.01, 0.01, off, 0.01, 0.1, 1.3, 0.2, 1.5, 0.3))


def main():
    cases = [
        ("interaction pass, N=1e5", bench_interaction),
        ("1D sources, 20000 cells, kmax=8", bench_sources_1d),
        ("2D sources, 100x100, 12-cell disk", bench_sources_2d),
    ]
    print(f"{'kernel':<36} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for label, fn in cases:
        t_py = fn(kpy)
        if kc is not None:
            t_c = fn(kc)
            print(f"{label:<36} {t_py * 1e3:>8.2f}ms {t_c * 1e3:>8.2f}ms {t_py / t_c:>7.1f}x")
        else:
            print(f"{label:<36} {t_py * 1e3:>8.2f}ms {'n/a':>10} {'n/a':>8}")
    if kc is None:
        print("\ncompiled backend not importable; only the fallback was timed")


if __name__ == "__main__":
    main()
