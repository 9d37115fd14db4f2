"""Time the compiled kernels against the pure-Python fallback on identical inputs.

    python benchmarks/bench_kernels.py [--n 800] [--repeat 3] [--json out.json]

Every kernel result is checked for equality across the two backends before
timings are reported.
"""
from __future__ import annotations

import argparse
import json
import math
import time

import numpy as np

from maxpers import _backend, _kernels_py
from maxpers.persistence import compute_persistence
from maxpers.filtration import _neighbor_csr, build_cech
from maxpers.geometry import neighbor_pairs
from maxpers.sampling import RngStream, sample_poisson

try:
    from maxpers import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def _best(fn, repeat):
    best, out = math.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


class _using:
    """Temporarily route the package's kernel calls to ``impl``."""

    names = ("expand_cliques", "reduce_twist", "locate_rows", "antitranspose")

    def __init__(self, impl):
        self.impl = impl

    def __enter__(self):
        self.saved = {k: getattr(_backend, k) for k in self.names}
        for k in self.names:
            setattr(_backend, k, getattr(self.impl, k))

    def __exit__(self, *exc):
        for k, v in self.saved.items():
            setattr(_backend, k, v)


def inputs(n: int, c: float, seed: int):
    u = math.sqrt(math.log(n) / n)
    cloud = sample_poisson(n, 2, "cube", RngStream(seed, 0))
    r = c * u
    i, j, dist = neighbor_pairs(cloud, r)
    indptr, nbrs, ndist, eid = _neighbor_csr(len(cloud), i, j, dist)
    edges = np.ascontiguousarray(np.stack([i, j], axis=1).astype(np.int64))
    fc = build_cech(cloud, r, 2)
    bindptr, bindices = fc.boundary()
    N = len(fc)
    t_indptr, t_indices = _kernels_py.antitranspose(bindptr, bindices, N)
    top = int(fc.dims.max())
    codim = np.ascontiguousarray((top - fc.dims)[::-1], dtype=np.int64)
    tri = np.ascontiguousarray(fc.vertices[fc.dims == 2][:, :3])
    tri = tri[np.lexsort(tri.T[::-1])]
    first = np.searchsorted(edges[:, 0], np.arange(len(cloud) + 1)).astype(np.int64)
    query = np.ascontiguousarray(tri[:, 1:])
    return {
        "expand_cliques": (edges, indptr, nbrs, ndist, eid),
        "antitranspose": (bindptr, bindices, N),
        "reduce_twist": (t_indptr, t_indices, codim, top),
        "locate_rows": (edges, first, query),
    }, N


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=800, help="Poisson intensity of the test cloud")
    ap.add_argument("--c", type=float, default=0.9, help="radius cap multiplier")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--json", help="also write results as JSON")
    args = ap.parse_args(argv)
    if _compiled is None:
        print("compiled extension not available; build it with `pip install -e .`")
        return 1
    data, N = inputs(args.n, args.c, args.seed)
    print(f"Cech complex, d=2, n={args.n}, c={args.c}: {N} simplices")
    print(f"{'kernel':<16}{'python s':>12}{'cython s':>12}{'speedup':>10}  agree")
    results = []
    for name, call_args in data.items():
        tp, outp = _best(lambda: getattr(_kernels_py, name)(*call_args), args.repeat)
        tc, outc = _best(lambda: getattr(_compiled, name)(*call_args), args.repeat)
        agree = _same(outp, outc)
        results.append({"kernel": name, "python_s": tp, "cython_s": tc, "speedup": tp / tc, "agree": agree})
        print(f"{name:<16}{tp:>12.4f}{tc:>12.4f}{tp / tc:>10.1f}  {agree}")
    # whole pipeline (filtration build plus dual reduction) under each backend
    cloud = sample_poisson(args.n, 2, "cube", RngStream(args.seed, 0))
    r = args.c * math.sqrt(math.log(args.n) / args.n)
    timings, diags = {}, {}
    for label, impl in (("python", _kernels_py), ("cython", _compiled)):
        with _using(impl):
            timings[label], diags[label] = _best(lambda: compute_persistence(build_cech(cloud, r, 2)), args.repeat)
    agree = diags["python"].same_pairs(diags["cython"])
    results.append({"kernel": "pipeline", "python_s": timings["python"], "cython_s": timings["cython"],
                    "speedup": timings["python"] / timings["cython"], "agree": agree})
    print(f"{'pipeline':<16}{timings['python']:>12.4f}{timings['cython']:>12.4f}"
          f"{timings['python'] / timings['cython']:>10.1f}  {agree}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"n": args.n, "c": args.c, "simplices": N, "results": results}, fh, indent=2)
    return 0 if all(r["agree"] for r in results) else 1


if __name__ == "__main__":
    raise SystemExit(main())
