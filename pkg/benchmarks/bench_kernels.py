"""Time the compiled and numpy kernel backends on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import math
import timeit

import numpy as np

from specnorm import graphs, kernels
from specnorm.sphere import rotations, zonal


def cases():
    g = graphs.resolve_graph("random_regular:n=1000,d=4", seed=1)
    adj = np.ascontiguousarray(g.neighbor_table())
    rev = np.ascontiguousarray(g.reverse_edge_index())
    small = graphs.resolve_graph("random_regular:n=200,d=4", seed=1)
    sadj = np.ascontiguousarray(small.neighbor_table())
    srev = np.ascontiguousarray(small.reverse_edge_index())
    x = np.cos(np.linspace(0, math.pi, 20001))
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(2000, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    words = rotations.enumerate_words(rotations.default_rotation_set(), 2)
    centers = np.ascontiguousarray(np.stack([w.matrix().T @ [0.3, 0.2, 0.93] for w in words]))
    a, b = zonal.window_scales(200)
    return {
        "girth n=1000": lambda k: k.girth(adj),
        "nbw_counts n=200 L=8": lambda k: k.nbw_counts(sadj, srev, 8),
        "nbw_counts n=1000 L=4": lambda k: k.nbw_counts(adj, rev, 4),
        "legendre s=400 x20001": lambda k: k.legendre(400, x),
        "assoc_legendre s=100 x2001": lambda k: k.assoc_legendre_table(100, x[::10].copy()),
        "zonal_window_sums s=200": lambda k: k.zonal_window_sums(200, pts, centers, a, b),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impls = kernels.backends()
    names = list(impls)
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'case':30s}" + "".join(f"{n:>12s}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, fn in cases().items():
        times = {}
        for name, mod in impls.items():
            fn(mod)  # warm-up
            times[name] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        row = f"{label:30s}" + "".join(f"{times[n] * 1e3:10.2f}ms" for n in names)
        if "cython" in times:
            row += f"{times['python'] / times['cython']:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
