"""Compare the compiled and pure-Python Monte Carlo kernels.

Usage: python benchmarks/bench_kernels.py [--trials N] [--repeat R]

Each kernel runs on both backends with the same seed; outputs are checked for
equality before timings are reported.
"""

import argparse
import time

import numpy as np

from dnfcover import kernels
from dnfcover.core import family_fmk
from dnfcover.rng import DEFAULT_SEED


def workloads(trials):
    dist = family_fmk(3, 5)
    sizes = kernels.as_int64(dist.int_sizes())
    cum, denom = dist.prob_weights()
    cum = kernels.as_uint64(cum)
    q = dist.scale()
    items = kernels.as_int64([3, 4, 5, 9, 1, 2, 7, 6, 2, 8] * 5)
    return {
        "stopping_times": lambda k: k.stopping_times(sizes, cum, denom, q, DEFAULT_SEED, 0, trials),
        "iid_dnf(n=50)": lambda k: k.iid_dnf(sizes, cum, denom, q, 50, DEFAULT_SEED, 0, trials // 10),
        "shuffled_dnf(N=50)": lambda k: k.shuffled_dnf(items, 10, DEFAULT_SEED, 0, trials // 10),
        "cover_failures(n=20,a=5)": lambda k: k.cover_failures(20, 100, DEFAULT_SEED, 0, trials // 10),
    }


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    py = kernels.backend("python")
    try:
        cy = kernels.backend("cython")
    except ImportError:
        print("compiled kernels unavailable; build with `pip install -e . --no-build-isolation`")
        return
    print(f"{'kernel':28s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for name, call in workloads(args.trials).items():
        tp, op = best_of(lambda: call(py), args.repeat)
        tc, oc = best_of(lambda: call(cy), args.repeat)
        if not same(op, oc):
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:28s} {tp:10.4f} {tc:10.4f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
