"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_backends.py [--n 30] [--m 15] [--repeat 3]

Covers the two hot paths: scoring every 2-subset (simplex pivot loop) and
the cheap-bound sums over every k-support (default 5).  The numba timings exclude the
first, compiling call.
"""
import argparse
import time

import numpy as np

from nscverify.bounds import score_all_subsets
from nscverify.subsets import all_subsets, support_sums


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=30)
    ap.add_argument("--m", type=int, default=15)
    ap.add_argument("--k", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    H = np.random.default_rng(args.seed).standard_normal((args.n, args.m))
    supports = all_subsets(args.n, args.k)

    # warm the JIT caches
    score_all_subsets(H[:6, :3], 2, threads=1, use_numba=True)
    warm = score_all_subsets(H, 2, threads=1, use_numba=False).alpha
    support_sums(supports[:2], warm, args.n, 2, use_numba=True)

    rows = []
    for name, make in [
        ("score_all_subsets l=2", lambda flag: lambda: score_all_subsets(H, 2, threads=1, use_numba=flag).alpha),
        (f"support_sums k={args.k}", lambda flag: lambda: support_sums(supports, warm, args.n, 2, use_numba=flag)),
    ]:
        t_fast, a = best_of(make(True), args.repeat)
        t_slow, b = best_of(make(False), args.repeat)
        rows.append((name, t_fast, t_slow, np.array_equal(a, b)))

    print(f"H {args.n}x{args.m}, best of {args.repeat}")
    print(f"{'kernel':<24}{'numba s':>10}{'numpy s':>10}{'speedup':>9}  identical")
    for name, fast, slow, same in rows:
        print(f"{name:<24}{fast:>10.3f}{slow:>10.3f}{slow / fast:>8.1f}x  {same}")


if __name__ == "__main__":
    main()
