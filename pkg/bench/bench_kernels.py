"""Time the compiled and pure-Python elimination kernels on the same inputs.

Usage: python3 bench/bench_kernels.py [--sizes 32 64 128] [--repeat 5]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from plcsim._kernels import available_backends


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[16, 48, 96, 160])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--q", type=int, default=5)
    args = ap.parse_args()

    backends = available_backends()
    rng = np.random.default_rng(0)
    print(f"{'size':>6} " + " ".join(f"{b + ' (ms)':>14}" for b in backends) + "   speedup")
    for n in args.sizes:
        a = rng.integers(0, args.q, size=(n, n + n // 2), dtype=np.int64)
        times = {}
        pivots = {}
        for b, fn in backends.items():
            best = min(
                timeit.repeat(lambda: fn(a.copy(), args.q, -1), number=1, repeat=args.repeat)
            )
            times[b] = best * 1e3
            m = a.copy()
            pivots[b] = list(fn(m, args.q, -1))
        if len(set(map(tuple, pivots.values()))) != 1:
            raise SystemExit(f"backends disagree at size {n}")
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{n:>6} " + " ".join(f"{times[b]:>14.3f}" for b in backends) + f"   {speed:7.1f}x")


if __name__ == "__main__":
    main()
