"""Time the hot kernels under the numba and numpy backends.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import math
import timeit

import numpy as np

import qwdc
from qwdc import _accel, kernels
from qwdc.walk import CoinParams, step_powers

Q = math.pi / 4


def cases():
    P = np.array(step_powers(8, CoinParams(Q, Q, Q), 30))
    table = kernels.ir2_kernel(P).reshape(30, 8, 2, 30, 8, 2)
    table = table / table.sum()
    r = np.random.default_rng(0)
    n = 200_000
    mc_args = (r.integers(30, size=n), r.integers(16, size=n), r.integers(30, size=n), r.integers(16, size=n),
               r.random(n), r.random(n))
    return {
        "ir2_kernel N=8 nT=30": lambda: kernels.ir2_kernel(P),
        "total_correlation 57600 cells": lambda: kernels.total_correlation(table),
        "mc_detection IR2 2e5 states": lambda: kernels.mc_detection(P, "IR2", *mc_args),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = ["numba", "numpy"] if _accel.HAS_NUMBA else ["numpy"]
    results = {}
    for name in backends:
        qwdc.set_backend(name)
        for label, fn in cases().items():
            fn()  # compile / warm caches
            results[label, name] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
    print(f"{'kernel':34s}" + "".join(f"{b:>12s}" for b in backends) + ("   speedup" if len(backends) == 2 else ""))
    for label in cases():
        row = f"{label:34s}" + "".join(f"{results[label, b] * 1e3:10.2f}ms" for b in backends)
        if len(backends) == 2:
            row += f"   {results[label, 'numpy'] / results[label, 'numba']:6.1f}x"
        print(row)


if __name__ == "__main__":
    main()
