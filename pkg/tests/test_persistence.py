import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxpers import (FilteredComplex, InvalidInputError, PersistenceDiagram, build_cech, build_filtration,
                     build_rips, compute_persistence, compute_persistence_naive, read_diagram_csv,
                     truncation_check, write_diagram_csv)
from maxpers.persistence import DIAGRAM_HEADER, torus_betti
from maxpers.sampling import PointCloud, RngStream, sample_fixed

from oracles import betti_numbers, circle_points, h0_deaths

SQ2 = math.sqrt(2) / 2


def finite_pairs(diag, k):
    return [(p.birth, p.death) for p in diag.finite(k)]


@pytest.mark.parametrize("engine", [compute_persistence, compute_persistence_naive])
@pytest.mark.parametrize("flavor", ["rips", "cech"])
def test_square(square_points, engine, flavor):
    diag = engine(build_filtration(PointCloud(square_points), flavor, 1.0, 2))
    assert finite_pairs(diag, 1) == pytest.approx([(0.5, SQ2)])
    assert diag.n_essential(1) == 0
    assert finite_pairs(diag, 0) == pytest.approx([(0.0, 0.5)] * 3)
    ess = diag.essential(0)
    assert len(ess) == 1 and ess[0].birth == 0.0


@pytest.mark.parametrize("scale", [1.0, 0.5])
def test_circle_cech(scale):
    pts = circle_points(12, 0.4 * scale)
    fc = build_cech(PointCloud(pts), 0.5, 2)
    for engine in (compute_persistence, compute_persistence_naive):
        h1 = finite_pairs(engine(fc), 1)
        assert len(h1) == 1
        assert h1[0] == pytest.approx((math.sin(math.pi / 12) * 0.4 * scale, 0.4 * scale), abs=1e-12)


def test_single_vertex():
    diag = compute_persistence(build_rips(PointCloud(np.array([[0.5, 0.5]])), 0.1, 2))
    assert len(diag) == 1 and diag.essential(0)[0].birth == 0.0


@pytest.mark.parametrize("engine", [compute_persistence, compute_persistence_naive])
def test_empty_complex(engine):
    diag = engine(build_cech(PointCloud(np.empty((0, 2))), 0.1, 2))
    assert len(diag) == 0 and diag.n_simplices == 0


@settings(max_examples=120)
@given(st.integers(0, 2 ** 32), st.integers(1, 15), st.integers(2, 3), st.sampled_from(["cech", "rips"]),
       st.sampled_from(["cube", "torus"]), st.floats(0.05, 0.5))
def test_oracle_equivalence(seed, n, d, flavor, metric, r):
    if metric == "torus":
        r = min(r, 0.125)
    fc = build_filtration(sample_fixed(n, d, metric, RngStream(seed)), flavor, r, 3 if d == 3 else 2)
    fast = compute_persistence(fc)
    assert fast.as_multiset() == compute_persistence_naive(fc).as_multiset()
    assert fast.same_pairs(compute_persistence(fc, dualize=False))


@settings(max_examples=60)
@given(st.integers(0, 2 ** 32), st.integers(1, 25), st.sampled_from(["cech", "rips"]),
       st.sampled_from(["cube", "torus"]), st.floats(0.05, 0.4))
def test_euler_identity_components_and_betti(seed, n, flavor, metric, r):
    if metric == "torus":
        r = min(r, 0.125)
    cloud = sample_fixed(n, 2, metric, RngStream(seed))
    fc = build_filtration(cloud, flavor, r, 2)
    diag = compute_persistence(fc)
    assert 2 * diag.n_finite() + diag.n_essential() == len(fc)
    # essential classes are the homology of the full capped complex
    bettis = betti_numbers([s for s, _ in fc.simplices], 2)
    assert [diag.n_essential(k) for k in range(3)] == bettis
    # degree-0 deaths are the Kruskal merge radii
    deaths = sorted(p.death for p in diag.finite(0, nonzero=False))
    assert deaths == pytest.approx(sorted(h0_deaths(cloud.points, r, metric == "torus")), abs=1e-15)


def test_pair_invariants():
    cloud = sample_fixed(60, 2, "cube", RngStream(3))
    diag = compute_persistence(build_cech(cloud, 0.2, 2))
    for p in diag.all_pairs():
        assert 0 <= p.birth <= p.death
        if p.degree >= 1:
            assert p.birth > 0
        if not p.essential:
            assert p.birth_simplex < p.death_simplex


def test_adding_a_point_never_drops_h0_pairs():
    rng = np.random.default_rng(4)
    for _ in range(20):
        pts = rng.random((15, 2))
        before = compute_persistence(build_rips(PointCloud(pts), 0.2, 2))
        after = compute_persistence(build_rips(PointCloud(np.vstack([pts, rng.random((1, 2))])), 0.2, 2))
        assert len(after.degree(0)) >= len(before.degree(0))


def test_interleaving_ratio_half():
    for seed in range(50):
        cloud = sample_fixed(10 + seed % 31, 2, "cube", RngStream(seed, 77))
        cech = compute_persistence(build_cech(cloud, 1.0, 2))
        rips = compute_persistence(build_rips(cloud, 1.0, 2))
        r1 = [p.death / p.birth for p in rips.degree(1)]
        for p in cech.finite(1):
            assert max(r1, default=0.0) >= (p.death / p.birth) / 2 - 1e-12


def test_deterministic():
    fc = build_cech(sample_fixed(80, 2, "cube", RngStream(1)), 0.15, 2)
    assert compute_persistence(fc).same_pairs(compute_persistence(fc))


def test_non_monotone_rejected():
    bad = FilteredComplex.from_simplices([((0,), 0), ((1,), 0), ((2,), 0), ((0, 1), 0.5), ((1, 2), 0.5),
                                          ((0, 2), 0.5), ((0, 1, 2), 0.4)])
    for engine in (compute_persistence, compute_persistence_naive):
        with pytest.raises(InvalidInputError):
            engine(bad)


def test_truncation_check_cube_and_torus():
    pts = circle_points(12, 0.4)
    cut = compute_persistence(build_cech(PointCloud(pts), 0.2, 2))
    assert cut.n_essential(1) == 1 and truncation_check(cut, 1)
    full = compute_persistence(build_cech(PointCloud(pts), 0.5, 2))
    assert not truncation_check(full, 1)
    # a 10 x 10 grid on the torus at radius 0.1 keeps exactly the two generators
    g = (np.arange(10) + 0.5) / 10
    grid = np.array([(x, y) for x in g for y in g])
    tor = compute_persistence(build_rips(PointCloud(grid, "torus"), 0.1, 2))
    assert tor.n_essential(1) == torus_betti(2, 1) == 2
    assert not truncation_check(tor, 1)
    assert truncation_check(compute_persistence(build_rips(PointCloud(grid, "torus"), 0.06, 2)), 1)


def test_diagram_csv_roundtrip(tmp_path):
    diag = compute_persistence(build_cech(PointCloud(circle_points(12, 0.4)), 0.2, 2))
    p = tmp_path / "d.csv"
    write_diagram_csv(diag, p)
    lines = p.read_text().splitlines()
    assert lines[0] == ",".join(DIAGRAM_HEADER)
    ess = [ln.split(",") for ln in lines[1:] if ",inf," in ln]
    assert len(ess) == diag.n_essential() and all(f[2] == "inf" and f[4] == "" for f in ess)
    rows = [(int(a), float(b), float(c)) for a, b, c, *_ in (ln.split(",") for ln in lines[1:])]
    assert rows == sorted(rows)
    back = read_diagram_csv(p)
    assert back.as_multiset() == diag.as_multiset()
    assert np.array_equal(back.death_simplex, diag.death_simplex)
    assert len(back) == len(diag)


def test_diagram_csv_rejects_bad_header(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,b\n")
    with pytest.raises(InvalidInputError):
        read_diagram_csv(p)


def test_diagram_sorted_and_views():
    diag = PersistenceDiagram([1, 0, 1], [0.3, 0.0, 0.1], [0.5, np.inf, 0.1], [5, 0, 3], [9, -1, 4], 6,
                              1.0, "cech")
    assert diag.as_multiset() == [(0, 0.0, math.inf), (1, 0.1, 0.1), (1, 0.3, 0.5)]
    assert [(p.birth, p.death) for p in diag.finite(1)] == [(0.3, 0.5)]
    assert len(diag.finite(1, nonzero=False)) == 2
    assert diag.pairs[0][0].essential
