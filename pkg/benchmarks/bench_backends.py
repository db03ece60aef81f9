"""Timing comparison of the compiled and pure-numpy Jacobi backends.

Runs both implementations on combinatorial Laplacians of seeded random
graphs across a range of sizes, checks that the results agree bitwise,
and prints per-size wall-clock plus speedup.

Usage:
    python3 benchmarks/bench_backends.py [--sizes 20 40 81] [--reps 5]
"""

import argparse
import sys
import time

import numpy as np

from graphemb.kernels import pure

try:
    from graphemb.kernels import _native as native
except ImportError:
    native = None


def laplacian(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    iu = np.triu_indices(n, k=1)
    a = np.zeros((n, n))
    mask = rng.random(iu[0].size) < p
    a[iu[0][mask], iu[1][mask]] = 1.0
    a += a.T
    return np.diag(a.sum(axis=1)) - a


def time_backend(fn, mats, reps: int) -> float:
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        for m in mats:
            fn(m)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[20, 40, 81])
    ap.add_argument("--mats", type=int, default=8,
                    help="matrices per size")
    ap.add_argument("--reps", type=int, default=3,
                    help="timing repetitions, best is kept")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if native is None:
        print("compiled backend not available; nothing to compare",
              file=sys.stderr)
        return 1

    rng = np.random.default_rng(args.seed)
    print(f"{'n':>5} {'pure (s)':>12} {'native (s)':>12} {'speedup':>9}  parity")
    for n in args.sizes:
        mats = [laplacian(n, 0.15, rng) for _ in range(args.mats)]
        ok = all(
            np.array_equal(pure.jacobi_eigh(m), native.jacobi_eigh(m))
            for m in mats
        )
        tp = time_backend(pure.jacobi_eigh, mats, args.reps)
        tn = time_backend(native.jacobi_eigh, mats, args.reps)
        parity = "bitwise" if ok else "MISMATCH"
        print(f"{n:>5} {tp:>12.4f} {tn:>12.4f} {tp / tn:>8.1f}x  {parity}")
        if not ok:
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
