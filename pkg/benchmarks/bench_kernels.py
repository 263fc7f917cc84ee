"""Throughput comparison of the two tap-assembly kernels.

Runs the numba-jitted loop kernel and the vectorized numpy kernel on the
production problem size (64x64 arrays, 20 rays, 20 taps) plus a couple of
smaller shapes, and reports per-call timings.  The numba path must be
available; run with FDIAB_DISABLE_NUMBA unset.

Usage: python benchmarks/bench_kernels.py [repeats]
"""
import math
import sys
import time

import numpy as np

from fdiab import kernels

if not kernels.HAVE_NUMBA:
    sys.exit("numba path is disabled (FDIAB_DISABLE_NUMBA set or numba missing)")


def make_case(seed, n_rays, n_rx, n_tx, n_taps):
    rng = np.random.default_rng(seed)
    alpha = (rng.standard_normal(n_rays) + 1j * rng.standard_normal(n_rays)) / math.sqrt(2)
    tau = rng.uniform(0.0, n_taps - 1.0, n_rays)
    theta = rng.uniform(-np.pi / 2, np.pi / 2, n_rays)
    phi = rng.uniform(-np.pi / 2, np.pi / 2, n_rays)
    gamma = math.sqrt(n_rx * n_tx / n_rays)
    return (alpha, tau, theta, phi, n_rx, n_tx, n_taps, 1.0, 1.0, 0.5, gamma)


def bench(fn, args, repeats):
    fn(*args)  # warm-up (includes JIT compilation for the numba path)
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 20
    cases = [
        ("small  (8x8,   20 rays,  8 taps)", make_case(0, 20, 8, 8, 8)),
        ("access (8x64,  20 rays, 20 taps)", make_case(1, 20, 8, 64, 20)),
        ("full   (64x64, 20 rays, 20 taps)", make_case(2, 20, 64, 64, 20)),
    ]
    print(f"{'case':38s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}")
    for label, args in cases:
        t_nb = bench(kernels._taps_numba, args, repeats)
        t_np = bench(kernels._taps_numpy, args, repeats)
        check = np.max(np.abs(kernels._taps_numba(*args) - kernels._taps_numpy(*args)))
        assert check < 1e-12, f"kernel mismatch: {check}"
        print(f"{label:38s} {t_nb * 1e3:9.3f}ms {t_np * 1e3:9.3f}ms {t_np / t_nb:7.2f}x")


if __name__ == "__main__":
    main()
