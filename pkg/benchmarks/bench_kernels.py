"""Compiled vs pure-Python graph kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import time

import numpy as np

from plantstream import _fallback
from plantstream.detectors.graphs import Graph

try:
    from plantstream import _kernels
except ImportError:  # extension not built
    _kernels = None


def random_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    L = np.tril(rng.random((n, n)) < p)
    return Graph(L | L.T)


def cases():
    g22 = random_graph(22, 0.5, 1)
    g18 = random_graph(18, 0.5, 2)
    off = Graph(g18.A & ~np.eye(18, dtype=bool)).masks()
    g512 = random_graph(512, 9 / 64, 3)
    rng = np.random.default_rng(4)
    sizes = rng.integers(1, 65, size=10_000).astype(np.int64)
    u = rng.random((10_000, 64))
    A = np.ascontiguousarray(g512.A, dtype=np.uint8)
    return {
        "max_biclique n=22": lambda k: k.max_biclique(g22.masks(), 22),
        "densest_subset n=18 beta=9": lambda k: k.densest_subset(off, g18.loops, 18, 9),
        "sampled_densest n=512 10^4": lambda k: k.sampled_densest(A, sizes, u),
    }


def best_time(fn, repeat):
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return min(out)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"{'kernel':32s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for name, run in cases().items():
        tp = best_time(lambda: run(_fallback), args.repeat)
        if _kernels is None:
            print(f"{name:32s} {tp:10.4f} {'n/a':>10s} {'n/a':>8s}")
            continue
        assert run(_fallback)[:2] == run(_kernels)[:2]
        tc = best_time(lambda: run(_kernels), args.repeat)
        print(f"{name:32s} {tp:10.4f} {tc:10.4f} {tp / tc:8.1f}")


if __name__ == "__main__":
    main()
