"""Time the numba kernels against their numpy fallbacks.

Run with ``python3 benchmarks/bench_kernels.py [--k 200000] [--n 12]``.
Each kernel is called once to trigger compilation before timing.
"""
import argparse
import timeit

import numpy as np

from sofickit import kernels
from sofickit.sampling import random_pbij_rows

NAMES = ["compose_rows", "inverse_rows", "diff_counts", "weighted_diff",
         "fixed_counts", "weighted_fixed", "idempotent_rows"]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--k", type=int, default=200_000, help="rows per batch")
    parser.add_argument("--n", type=int, default=12, help="row length")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if not hasattr(kernels, "compose_rows_numba"):
        raise SystemExit("numba is unavailable; nothing to compare")

    rng = np.random.default_rng(0)
    F = random_pbij_rows(rng, args.k, args.n)
    G = random_pbij_rows(rng, args.k, args.n)
    w = rng.integers(1, 5, size=args.n).astype(np.int64)
    inputs = {
        "compose_rows": (F, G), "inverse_rows": (F,), "diff_counts": (F, G),
        "weighted_diff": (F, G, w), "fixed_counts": (F,), "weighted_fixed": (F, w),
        "idempotent_rows": (F,),
    }

    print(f"k={args.k} rows, n={args.n}, best of {args.repeat}")
    print(f"{'kernel':18s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for name in NAMES:
        fn_np = getattr(kernels, f"{name}_numpy")
        fn_nb = getattr(kernels, f"{name}_numba")
        a = inputs[name]
        assert np.array_equal(fn_np(*a), fn_nb(*a)), name
        t_np = min(timeit.repeat(lambda: fn_np(*a), number=1, repeat=args.repeat)) * 1e3
        t_nb = min(timeit.repeat(lambda: fn_nb(*a), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:18s} {t_np:10.2f} {t_nb:10.2f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
