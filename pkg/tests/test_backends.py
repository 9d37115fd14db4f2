"""The compiled kernels and the pure-Python fallback must agree exactly."""
import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxpers import BACKEND, _backend, _kernels_py, build_filtration, compute_persistence
from maxpers.filtration import _neighbor_csr
from maxpers.geometry import neighbor_pairs
from maxpers.sampling import RngStream, sample_fixed

compiled = pytest.importorskip("maxpers._kernels", reason="compiled extension not built")


def _equal(a, b):
    if isinstance(a, tuple):
        return len(a) == len(b) and all(_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def test_compiled_backend_selected_by_default():
    if os.environ.get("MAXPERS_PURE_PYTHON", "") in ("", "0"):
        assert BACKEND == "cython"


def _graph(seed, n, r, metric):
    cloud = sample_fixed(n, 2, metric, RngStream(seed))
    i, j, d = neighbor_pairs(cloud, r)
    return _neighbor_csr(n, i, j, d)


@settings(max_examples=40)
@given(st.integers(0, 2 ** 32), st.integers(1, 80), st.floats(0.02, 0.2), st.sampled_from(["cube", "torus"]))
def test_expand_cliques_agree(seed, n, r, metric):
    indptr, nbrs, ndist, eid = _graph(seed, n, min(r, 0.125), metric)
    cliques = np.arange(n, dtype=np.int64).reshape(-1, 1)
    for _ in range(3):
        a = compiled.expand_cliques(cliques, indptr, nbrs, ndist, eid)
        b = _kernels_py.expand_cliques(cliques, indptr, nbrs, ndist, eid)
        assert _equal(tuple(a), tuple(b))
        cliques = np.asarray(a[0])
        if len(cliques) == 0:
            break


@settings(max_examples=40)
@given(st.integers(0, 2 ** 32), st.integers(1, 40), st.floats(0.05, 0.4), st.sampled_from(["cech", "rips"]))
def test_reduction_kernels_agree(seed, n, r, flavor):
    fc = build_filtration(sample_fixed(n, 2, "cube", RngStream(seed)), flavor, r, 2)
    indptr, indices = fc.boundary()
    dims = np.ascontiguousarray(fc.dims, dtype=np.int64)
    assert _equal(compiled.reduce_twist(indptr, indices, dims, 2), _kernels_py.reduce_twist(indptr, indices, dims, 2))
    ta = compiled.antitranspose(indptr, indices, len(fc))
    tb = _kernels_py.antitranspose(indptr, indices, len(fc))
    assert _equal(tuple(ta), tuple(tb))


@settings(max_examples=60)
@given(st.lists(st.lists(st.integers(0, 30), min_size=3, max_size=3, unique=True), max_size=60),
       st.lists(st.lists(st.integers(0, 31), min_size=3, max_size=3), max_size=30))
def test_locate_rows_agree(rows, queries):
    table = np.array(sorted({tuple(sorted(r)) for r in rows}), dtype=np.int64).reshape(-1, 3)
    first = np.searchsorted(table[:, 0], np.arange(33)) if len(table) else np.zeros(33, dtype=np.int64)
    first = np.ascontiguousarray(first, dtype=np.int64)
    query = np.array([sorted(q) for q in queries], dtype=np.int64).reshape(-1, 3)
    a = np.asarray(compiled.locate_rows(table, first, query))
    b = np.asarray(_kernels_py.locate_rows(table, first, query))
    assert np.array_equal(a, b)
    for q, loc in zip(query.tolist(), a.tolist()):
        assert (loc == -1) == (tuple(q) not in {tuple(t) for t in table.tolist()})


def _swap(impl):
    names = ("expand_cliques", "reduce_twist", "locate_rows", "antitranspose")
    saved = {k: getattr(_backend, k) for k in names}
    for k in names:
        setattr(_backend, k, getattr(impl, k))
    return saved


@pytest.mark.parametrize("flavor", ["cech", "rips"])
@pytest.mark.parametrize("metric", ["cube", "torus"])
def test_pipeline_agrees_across_backends(flavor, metric):
    cloud = sample_fixed(300, 2, metric, RngStream(12))
    fc_c = build_filtration(cloud, flavor, 0.1, 2)
    diag_c = compute_persistence(fc_c)
    saved = _swap(_kernels_py)
    try:
        fc_p = build_filtration(cloud, flavor, 0.1, 2)
        diag_p = compute_persistence(fc_p)
    finally:
        for k, v in saved.items():
            setattr(_backend, k, v)
    assert np.array_equal(fc_c.vertices, fc_p.vertices) and np.array_equal(fc_c.values, fc_p.values)
    assert diag_c.same_pairs(diag_p)


def test_pure_python_switch_in_subprocess(tmp_path):
    script = (
        "import json, maxpers\n"
        "from maxpers.sampling import sample_fixed, RngStream\n"
        "c = sample_fixed(120, 2, 'cube', RngStream(3))\n"
        "d = maxpers.compute_persistence(maxpers.build_cech(c, 0.15, 2))\n"
        "print(json.dumps({'backend': maxpers.BACKEND, 'pairs': d.as_multiset()}))\n"
    )
    env = dict(os.environ, MAXPERS_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", script], env=env, capture_output=True, text=True, check=True)
    res = json.loads(out.stdout.replace("Infinity", "1e999"))
    assert res["backend"] == "python"
    here = compute_persistence(build_filtration(sample_fixed(120, 2, "cube", RngStream(3)), "cech", 0.15, 2))
    assert [tuple(p) for p in res["pairs"]] == here.as_multiset()
