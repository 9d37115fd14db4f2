import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from maxpers import (InvalidInputError, Metric, UnsupportedConfigurationError, distance, epsilon_net,
                     min_enclosing_ball, neighbor_pairs)
from maxpers.geometry import triangle_meb_radii, unwrap
from maxpers.sampling import PointCloud, RngStream, sample_fixed

from oracles import meb_radius_grid, meb_radius_opt, wrap_dist

unit = st.floats(0.0, 1.0, allow_nan=False)


def cloud_of(points, metric="cube"):
    return PointCloud(np.asarray(points, dtype=float), metric)


# --- distance ---------------------------------------------------------------

def test_distance_torus_wraps():
    assert distance((0.1, 0.1), (0.9, 0.1), Metric.TORUS) == pytest.approx(0.2, abs=1e-15)


def test_distance_cube():
    assert distance((0.1, 0.1), (0.9, 0.1), Metric.CUBE) == pytest.approx(0.8, abs=1e-15)


@pytest.mark.parametrize("metric", ["cube", "torus"])
def test_distance_identity(metric):
    assert distance((0.3, 0.7, 0.2), (0.3, 0.7, 0.2), metric) == 0.0


def test_distance_dimension_mismatch():
    with pytest.raises(InvalidInputError):
        distance((0.1, 0.2), (0.1, 0.2, 0.3))


def test_metric_parse_rejects_unknown():
    with pytest.raises(InvalidInputError):
        Metric.parse("sphere")


@given(st.integers(2, 4).flatmap(lambda d: st.tuples(*[st.lists(unit, min_size=d, max_size=d)] * 2)))
def test_distance_symmetric_and_torus_shorter(ab):
    a, b = ab
    for m in ("cube", "torus"):
        assert distance(a, b, m) == distance(b, a, m)
    assert distance(a, b, "torus") <= distance(a, b, "cube") + 1e-15
    assert distance(a, b, "torus") == pytest.approx(wrap_dist(a, b, torus=True), abs=1e-14)


@pytest.mark.parametrize("metric", ["cube", "torus"])
def test_triangle_inequality_random_triples(metric):
    rng = np.random.default_rng(0)
    for d in (2, 3):
        pts = rng.random((10_000, 3, d))
        x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]

        def dist(a, b):
            diff = np.abs(a - b)
            if metric == "torus":
                diff = np.minimum(diff, 1 - diff)
            return np.sqrt((diff ** 2).sum(axis=1))

        # package distance spot-checked against the vectorised form on a subset
        for t in range(0, 10_000, 997):
            assert distance(x[t], y[t], metric) == pytest.approx(float(dist(x[t:t + 1], y[t:t + 1])[0]), abs=1e-15)
        assert np.all(dist(x, z) <= dist(x, y) + dist(y, z) + 1e-12)


# --- neighbor_pairs ---------------------------------------------------------

def test_neighbor_pairs_boundary_cases():
    c = cloud_of([[0.0, 0.0], [1.0, 0.0]])
    i, j, d = neighbor_pairs(c, 0.4)
    assert len(i) == 0
    i, j, d = neighbor_pairs(c, 0.5)
    assert list(zip(i.tolist(), j.tolist())) == [(0, 1)] and d[0] == pytest.approx(1.0)


@pytest.mark.parametrize("metric", ["cube", "torus"])
@pytest.mark.parametrize("seed", range(5))
def test_neighbor_pairs_match_brute_force(metric, seed):
    cloud = sample_fixed(10 + 7 * seed, 2 + seed % 2, metric, RngStream(seed, 3))
    r = 0.05 + 0.05 * seed
    i, j, d = neighbor_pairs(cloud, r)
    got = {(a, b): dd for a, b, dd in zip(i.tolist(), j.tolist(), d.tolist())}
    want = {}
    for a, b in itertools.combinations(range(len(cloud)), 2):
        dd = wrap_dist(cloud.points[a], cloud.points[b], metric == "torus")
        if dd <= 2 * r:
            want[(a, b)] = dd
    assert set(got) == set(want)
    assert all(got[k] == pytest.approx(want[k], abs=1e-14) for k in want)
    assert list(got) == sorted(got)


# --- min_enclosing_ball -----------------------------------------------------

def test_meb_two_points():
    b = min_enclosing_ball([[0.0, 0.0], [1.0, 0.0]])
    assert b.radius == pytest.approx(0.5) and b.center == pytest.approx((0.5, 0.0))


def test_meb_equilateral_triangle():
    pts = [[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]]
    oracle = meb_radius_grid(pts, 0.0, 1.0, 2001)
    assert oracle == pytest.approx(0.5773503, abs=1e-3)
    assert min_enclosing_ball(pts).radius == pytest.approx(1 / math.sqrt(3), abs=1e-12)


def test_meb_unit_square(square_points):
    oracle = meb_radius_grid(square_points, 0.0, 1.0, 2001)
    assert oracle == pytest.approx(math.sqrt(2) / 2, abs=1e-3)
    b = min_enclosing_ball(square_points)
    assert b.radius == pytest.approx(0.7071068, abs=1e-7)
    assert b.center == pytest.approx((0.5, 0.5), abs=1e-12)


def test_meb_errors():
    with pytest.raises(InvalidInputError):
        min_enclosing_ball(np.empty((0, 2)))
    with pytest.raises(UnsupportedConfigurationError):
        min_enclosing_ball([[0.1, 0.1], [0.4, 0.1]], Metric.TORUS)


def test_meb_torus_wraps_around():
    b = min_enclosing_ball([[0.02, 0.5], [0.98, 0.5]], Metric.TORUS)
    assert b.radius == pytest.approx(0.02, abs=1e-12)


def test_meb_single_point():
    b = min_enclosing_ball([[0.3, 0.4]])
    assert b.radius == 0.0 and b.center == (0.3, 0.4)


point_sets = st.integers(2, 4).flatmap(
    lambda d: arrays(np.float64, st.tuples(st.integers(1, 10), st.just(d)), elements=unit))


@settings(max_examples=150)
@given(point_sets)
def test_meb_properties(pts):
    b = min_enclosing_ball(pts)
    c = np.asarray(b.center)
    far = np.linalg.norm(pts - c, axis=1)
    assert np.all(far <= b.radius * (1 + 1e-9) + 1e-12)
    diam = max((np.linalg.norm(p - q) for p, q in itertools.combinations(pts, 2)), default=0.0)
    assert diam / 2 - 1e-12 <= b.radius <= diam + 1e-12
    # independent optimiser never finds a smaller ball
    assert b.radius <= meb_radius_opt(pts) + 1e-7


@settings(max_examples=100)
@given(point_sets, st.randoms(use_true_random=False))
def test_meb_radius_permutation_invariant(pts, rnd):
    perm = list(range(len(pts)))
    rnd.shuffle(perm)
    assert min_enclosing_ball(pts[perm]).radius == pytest.approx(min_enclosing_ball(pts).radius, rel=1e-9, abs=1e-12)


def test_meb_minimal_removing_non_support_point():
    rng = np.random.default_rng(5)
    for _ in range(50):
        pts = rng.random((8, 3))
        b = min_enclosing_ball(pts)
        c = np.asarray(b.center)
        inner = np.flatnonzero(np.linalg.norm(pts - c, axis=1) < b.radius * (1 - 1e-6))
        for i in inner:
            assert min_enclosing_ball(np.delete(pts, i, axis=0)).radius == pytest.approx(b.radius, rel=1e-9)


def test_meb_deterministic():
    pts = np.random.default_rng(9).random((9, 3))
    assert min_enclosing_ball(pts) == min_enclosing_ball(pts)


def test_triangle_meb_radii_match_general_solver():
    rng = np.random.default_rng(2)
    for d in (2, 3, 4):
        tri = rng.random((300, 3, d))
        fast = triangle_meb_radii(tri[:, 0], tri[:, 1], tri[:, 2])
        slow = np.array([min_enclosing_ball(t).radius for t in tri])
        assert np.allclose(fast, slow, rtol=1e-10, atol=1e-14)


def test_unwrap_places_points_near_first():
    pts = np.array([[0.95, 0.5], [0.03, 0.52], [0.9, 0.01]])
    u = unwrap(pts, Metric.TORUS)
    assert np.all(np.abs(u - u[0]) <= 0.5)
    assert u[1] == pytest.approx([1.03, 0.52])


# --- epsilon_net ------------------------------------------------------------

def test_epsilon_net_line_example():
    c = cloud_of([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]])
    assert epsilon_net(c, 0.6) == [0, 2]


def test_epsilon_net_large_eps():
    c = sample_fixed(30, 2, "cube", RngStream(1, 1))
    assert epsilon_net(c, 2.0) == [0]


def test_epsilon_net_rejects_nonpositive_eps():
    with pytest.raises(InvalidInputError):
        epsilon_net(cloud_of([[0.1, 0.1]]), 0.0)


def _net_ok(cloud, eps, net):
    pts = cloud.points
    torus = cloud.metric is Metric.TORUS
    covered = all(any(wrap_dist(p, pts[s], torus) <= eps for s in net) for p in pts)
    packed = all(wrap_dist(pts[a], pts[b], torus) >= eps for a, b in itertools.combinations(net, 2))
    return covered and packed and net == sorted(net) and len(set(net)) == len(net)


@settings(max_examples=100)
@given(st.integers(0, 2 ** 32), st.integers(1, 60), st.floats(0.01, 0.8), st.sampled_from(["cube", "torus"]))
def test_epsilon_net_cover_and_packing(seed, n, eps, metric):
    cloud = sample_fixed(n, 2, metric, RngStream(seed, 0))
    assert _net_ok(cloud, eps, epsilon_net(cloud, eps))
