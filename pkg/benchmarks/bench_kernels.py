"""Throughput of the compiled and numpy trial samplers.

Run with ``python3 benchmarks/bench_kernels.py [trials]``.
"""

import sys
import timeit

import numpy as np

from qmeasure import _kernels_py
from qmeasure.lan_est import block_window

try:
    from qmeasure import _kernels
except ImportError:
    _kernels = None


def bench(trials: int = 1_000_000, repeat: int = 5) -> list[tuple]:
    n, mu = 100_000, 0.9
    j, w = block_window(n, mu)
    cdf = np.cumsum(w)
    cdf[-1] = 1.0
    backends = [("python", _kernels_py)] + ([("cython", _kernels)] if _kernels else [])
    rows = []
    for exact in (False, True):
        for name, mod in backends:
            call = lambda: mod.sample_local(0, 0, trials, float(n), mu, 0.0, 0.0, 0.0, exact, cdf, float(j[0]))
            best = min(timeit.repeat(call, number=1, repeat=repeat))
            rows.append(("exact" if exact else "gaussian", name, best, trials / best))
    return rows


if __name__ == "__main__":
    trials = int(sys.argv[1]) if len(sys.argv) > 1 else 1_000_000
    print(f"{'mode':<10}{'backend':<10}{'seconds':>10}{'Mtrials/s':>12}")
    for mode, name, sec, rate in bench(trials):
        print(f"{mode:<10}{name:<10}{sec:>10.4f}{rate / 1e6:>12.2f}")
    if _kernels is None:
        print("compiled extension not built; only the numpy path was timed")
