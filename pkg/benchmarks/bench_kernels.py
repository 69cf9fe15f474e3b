"""Compare the numba kernels against the pure-numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--repeat 5]

Timings exclude JIT compilation (one warm-up call per kernel).  The two
paths must agree to rounding; the script exits non-zero otherwise.
"""

import argparse
import sys
import time

import numpy as np

from bilintang import _kernels


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def mgs_cases(rng):
    for n, k in ((200, 20), (1000, 36), (2000, 60)):
        X = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
        yield f"mgs n={n} k={k}", (X,), _kernels.mgs_numpy, _kernels.mgs_numba, lambda out: out[0]


def imex_cases(rng):
    for r, m, steps in ((10, 2, 10_000), (24, 2, 10_000), (36, 5, 1_000)):
        ME = np.eye(r) * 0.99 + 1e-3 * rng.standard_normal((r, r))
        MN = 1e-3 * rng.standard_normal((m, r, r))
        MB = rng.standard_normal((r, m))
        MAd = 1e-3 * rng.standard_normal((r, r))
        C = rng.standard_normal((2, r))
        U = rng.standard_normal((steps + 1, m))
        args = (ME, MN, MB, MAd, C, U, 1e-3, 50, 0.0)
        yield f"imex r={r} m={m} steps={steps}", args, _kernels.imex_numpy, _kernels.imex_numba, lambda out: out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    if _kernels.njit is None:
        print("numba is not importable; nothing to compare")
        return 1
    rng = np.random.default_rng(args.seed)
    print(f"{'case':<32}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}{'max diff':>12}")
    ok = True
    for name, a, ref, fast, pick in (*mgs_cases(rng), *imex_cases(rng)):
        t_ref = best_of(lambda: ref(*a), args.repeat)
        t_fast = best_of(lambda: fast(*a), args.repeat)
        diff = np.abs(pick(ref(*a)) - pick(fast(*a))).max()
        ok &= diff <= 1e-8 * max(1.0, np.abs(pick(ref(*a))).max())
        print(f"{name:<32}{1e3 * t_ref:>12.2f}{1e3 * t_fast:>12.2f}{t_ref / t_fast:>10.1f}{diff:>12.1e}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
