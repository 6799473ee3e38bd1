"""Timing comparison of the numba kernels against their numpy fallbacks.

Calls both backend families directly (bypassing the import-time dispatch),
so one process measures both even though the library itself fixes the
backend when synclab is imported.  Reports best-of-N wall time per backend
and the max abs difference between the two results, which should sit near
1e-10 or below.

Usage:
    python benchmarks/bench_kernels.py [--repeats 5]

With SYNCLAB_DISABLE_NUMBA=1 (or numba missing) only the numpy column runs.
"""
import argparse
import time

import numpy as np

import synclab._kernels as K


def best_of(fn, repeats):
    fn()  # warmup: triggers JIT compilation on the numba path
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads(rng):
    x = np.linspace(-40.0, 8.0, 200_000)
    yield (
        "log_gaussian_cdf", "200k points",
        lambda: K._np_log_gaussian_cdf(x),
        (lambda: K._nb_log_gaussian_cdf(x)) if K.HAS_NUMBA else None,
    )
    for kn in (64, 256):
        s = rng.uniform(0.0, 1.0, kn)
        sigma = 0.3
        yield (
            "peak_probabilities", f"KN_c={kn}, sigma=0.3",
            lambda s=s: K._np_peak_probabilities(s, sigma),
            (lambda s=s: K._nb_peak_probabilities(
                s, sigma, K._GL15_X, K._GL15_W, K._GL7_X, K._GL7_W
            )) if K.HAS_NUMBA else None,
        )
    # desk-preset shapes: delay axis (subarray 56, order 1) and doppler axis
    for w, r, n_grid in ((56, 55, 256), (21, 20, 128)):
        en = rng.standard_normal((w, r)) + 1j * rng.standard_normal((w, r))
        en, _ = np.linalg.qr(en)
        yield (
            "music_denominator", f"W={w}, rank={r}, grid={n_grid}",
            lambda en=en, n=n_grid: K._np_music_denominator(en, n),
            (lambda en=en, n=n_grid: K._nb_music_denominator(en, n))
            if K.HAS_NUMBA else None,
        )


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="timing repeats (best-of)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"numba available: {K.HAS_NUMBA}   dispatch backend: {K.BACKEND}")
    header = f"{'kernel':<20} {'workload':<26} {'numpy':>10} {'numba':>10} {'speedup':>8} {'max|diff|':>10}"
    print(header)
    print("-" * len(header))
    for name, desc, np_fn, nb_fn in workloads(rng):
        t_np = best_of(np_fn, args.repeats)
        if nb_fn is None:
            print(f"{name:<20} {desc:<26} {t_np * 1e3:>8.2f}ms {'-':>10} {'-':>8} {'-':>10}")
            continue
        t_nb = best_of(nb_fn, args.repeats)
        diff = float(np.abs(np.asarray(np_fn()) - np.asarray(nb_fn())).max())
        print(
            f"{name:<20} {desc:<26} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms"
            f" {t_np / t_nb:>7.1f}x {diff:>10.2e}"
        )


if __name__ == "__main__":
    main()
