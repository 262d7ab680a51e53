"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one row per kernel with the best-of-``repeat`` time of each backend and
the speedup. Exits non-zero if the compiled extension is not built.
"""
import argparse
import sys
import timeit

import numpy as np

from graphdfm import _kernels_py as py

try:
    from graphdfm import _kernels as cy
except ImportError:
    sys.exit("compiled extension not built; run `pip install --no-build-isolation -e .`")


def cases(rng):
    p0 = rng.dirichlet(np.ones(6))
    table = py.rate_table(p0, 0.4, 0.1, 1.0, "general", int(np.argmax(p0)), 6)
    states = rng.integers(0, 6, size=4000)
    post = rng.dirichlet(np.ones(6), size=4000)
    probs = rng.dirichlet(np.ones(6), size=4000)
    u = rng.random(4000)
    return {
        "rate_table (Z=6)": lambda m: m.rate_table(p0, 0.4, 0.1, 1.0, "general", int(np.argmax(p0)), 6),
        "expected_rates (4000 dims)": lambda m: m.expected_rates(states, post, table),
        "categorical (4000 dims)": lambda m: m.categorical(probs, u),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=50)
    args = ap.parse_args()
    print(f"{'kernel':30s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, fn in cases(np.random.default_rng(0)).items():
        t_py = min(timeit.repeat(lambda: fn(py), number=args.number, repeat=args.repeat)) / args.number
        t_cy = min(timeit.repeat(lambda: fn(cy), number=args.number, repeat=args.repeat)) / args.number
        print(f"{name:30s} {1e3 * t_py:11.4f} {1e3 * t_cy:12.4f} {t_py / t_cy:7.1f}x")


if __name__ == "__main__":
    main()
