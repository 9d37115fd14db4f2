"""Metrics, neighbour queries, minimal enclosing balls and epsilon-nets.

Points live in the unit cube ``[0, 1]^d``.  Two metrics are supported: the
ordinary Euclidean metric of the cube, and the flat torus obtained by
identifying opposite faces (per-coordinate wraparound).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidInputError, UnsupportedConfigurationError

if TYPE_CHECKING:
    from .sampling import PointCloud

# Relative containment tolerance for enclosing-ball tests.
MEB_TOL = 1e-12
# Torus minimal enclosing balls need a unique geodesic representative.
TORUS_MAX_DIAMETER = 0.25


class Metric(str, enum.Enum):
    CUBE = "cube"
    TORUS = "torus"

    @classmethod
    def parse(cls, value: "Metric | str") -> "Metric":
        if isinstance(value, Metric):
            return value
        key = str(value).strip().lower()
        aliases = {
            "cube": cls.CUBE, "cubeeuclidean": cls.CUBE, "euclidean": cls.CUBE,
            "torus": cls.TORUS, "flattorus": cls.TORUS, "flat-torus": cls.TORUS,
        }
        if key not in aliases:
            raise InvalidInputError(f"unknown metric {value!r}")
        return aliases[key]


@dataclass(frozen=True)
class Ball:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        if not self.radius >= 0:
            raise InvalidInputError(f"ball radius must be >= 0, got {self.radius}")


def displacement(a: np.ndarray, b: np.ndarray, metric: Metric | str) -> np.ndarray:
    """Coordinate-wise displacement ``b - a``; on the torus, the shortest representative."""
    diff = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    if Metric.parse(metric) is Metric.TORUS:
        diff = diff - np.rint(diff)
    return diff


def _norms(diff: np.ndarray, metric: Metric) -> np.ndarray:
    if metric is Metric.TORUS:
        diff = np.abs(diff)
        diff = np.minimum(diff, 1.0 - diff)
    return np.sqrt(np.sum(diff * diff, axis=-1))


def distance(a: Sequence[float], b: Sequence[float], m: Metric | str = Metric.CUBE) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise InvalidInputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(_norms(a - b, Metric.parse(m)))


def pair_distances(points: np.ndarray, i: np.ndarray, j: np.ndarray, m: Metric | str) -> np.ndarray:
    """Distances between ``points[i]`` and ``points[j]`` for index arrays ``i``, ``j``."""
    return _norms(points[i] - points[j], Metric.parse(m))


def distance_matrix(points: np.ndarray, m: Metric | str = Metric.CUBE) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    return _norms(points[:, None, :] - points[None, :, :], Metric.parse(m))


def neighbor_pairs(cloud: "PointCloud", r_max: float):
    """All unordered pairs whose closed radius-``r_max`` balls intersect.

    Returns ``(i, j, dist)`` arrays with ``i < j``, sorted lexicographically.
    A pair is included iff ``dist <= 2 * r_max``.
    """
    if not r_max > 0:
        raise InvalidInputError(f"r_max must be positive, got {r_max}")
    pts = cloud.points
    metric = Metric.parse(cloud.metric)
    n = len(pts)
    empty = (np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0, float))
    if n < 2:
        return empty
    cutoff = 2.0 * r_max
    if metric is Metric.TORUS:
        if cutoff >= 0.5:
            # kd-tree periodic search is only meaningful below half the box
            ii, jj = np.triu_indices(n, k=1)
            pairs = np.stack([ii, jj], axis=1)
        else:
            tree = cKDTree(np.mod(pts, 1.0), boxsize=1.0)
            pairs = tree.query_pairs(cutoff * (1 + 1e-9) + 1e-15, output_type="ndarray")
    else:
        tree = cKDTree(pts)
        pairs = tree.query_pairs(cutoff * (1 + 1e-9) + 1e-15, output_type="ndarray")
    if len(pairs) == 0:
        return empty
    pairs = np.sort(pairs.astype(np.int64), axis=1)
    d = pair_distances(pts, pairs[:, 0], pairs[:, 1], metric)
    keep = d <= cutoff
    pairs, d = pairs[keep], d[keep]
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    return pairs[order, 0], pairs[order, 1], d[order]


def unwrap(points: np.ndarray, m: Metric | str) -> np.ndarray:
    """Lift a small torus point set into R^d around its first point.

    Each coordinate is shifted to within 1/2 of the anchor.  Cube points are
    returned unchanged.
    """
    points = np.asarray(points, dtype=float)
    if Metric.parse(m) is Metric.CUBE:
        return points
    anchor = points[..., :1, :]
    return anchor + displacement(anchor, points, Metric.TORUS)


# ---------------------------------------------------------------------------
# minimal enclosing ball


def _circumsphere(support: list[np.ndarray]) -> tuple[np.ndarray, float]:
    """Smallest sphere through every support point (centre in their affine hull)."""
    p0 = support[0]
    if len(support) == 1:
        return p0.copy(), 0.0
    U = np.array([p - p0 for p in support[1:]])
    G = U @ U.T
    rhs = 0.5 * np.einsum("ij,ij->i", U, U)
    try:
        lam = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        lam = np.linalg.lstsq(G, rhs, rcond=None)[0]
    center = p0 + lam @ U
    radius = max(float(np.linalg.norm(p - center)) for p in support)
    return center, radius


def _contains(center: np.ndarray, radius: float, p: np.ndarray, scale: float) -> bool:
    return float(np.linalg.norm(p - center)) <= radius + MEB_TOL * max(scale, 1.0)


def _mtf_ball(points: list[np.ndarray], end: int, support: list[np.ndarray], dim: int, scale: float):
    # move-to-front Welzl: points[:end] must lie in the ball, support on its boundary
    if support:
        center, radius = _circumsphere(support)
    else:
        center, radius = None, -1.0
    if len(support) == dim + 1:
        return center, radius
    for i in range(end):
        p = points[i]
        if center is None or not _contains(center, radius, p, scale):
            center, radius = _mtf_ball(points, i, support + [p], dim, scale)
            points.insert(0, points.pop(i))
    return center, radius


def min_enclosing_ball(points, m: Metric | str = Metric.CUBE) -> Ball:
    """Smallest closed ball containing ``points``.

    On the torus the point set is first lifted around its first point; the
    returned centre is in lifted coordinates (it may leave the unit cube).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0 or len(pts) == 0:
        raise InvalidInputError("min_enclosing_ball needs at least one point")
    metric = Metric.parse(m)
    if metric is Metric.TORUS and len(pts) > 1:
        diam = float(distance_matrix(pts, metric).max())
        if diam >= TORUS_MAX_DIAMETER:
            raise UnsupportedConfigurationError(
                f"torus enclosing ball needs diameter < {TORUS_MAX_DIAMETER}, got {diam:.6g}"
            )
        pts = unwrap(pts, metric)
    scale = float(np.abs(pts).max()) if len(pts) else 1.0
    center, radius = _mtf_ball([p for p in pts], len(pts), [], pts.shape[1], scale)
    return Ball(tuple(float(c) for c in center), float(radius))


def triangle_meb_radii(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Vectorised minimal-enclosing-ball radii of triangles ``(a[i], b[i], c[i])``.

    Works in any ambient dimension: half the longest side for non-acute
    triangles, the circumradius otherwise.
    """
    u = b - a
    v = c - a
    w = c - b
    uu = np.einsum("ij,ij->i", u, u)
    vv = np.einsum("ij,ij->i", v, v)
    ww = np.einsum("ij,ij->i", w, w)
    uv = np.einsum("ij,ij->i", u, v)
    longest = np.maximum(np.maximum(uu, vv), ww)
    total = uu + vv + ww
    non_acute = 2.0 * longest >= total
    gram = uu * vv - uv * uv
    out = 0.5 * np.sqrt(longest)
    acute = ~non_acute & (gram > 0)
    out[acute] = np.sqrt(uu[acute] * vv[acute] * ww[acute] / (4.0 * gram[acute]))
    return out


# ---------------------------------------------------------------------------
# epsilon nets


def epsilon_net(cloud: "PointCloud", eps: float) -> list[int]:
    """Greedy epsilon-net in ascending index order.

    A point is covered once it is strictly closer than ``eps`` to a chosen net
    point, so net points are pairwise at least ``eps`` apart.
    """
    if not eps > 0:
        raise InvalidInputError(f"eps must be positive, got {eps}")
    pts = cloud.points
    metric = Metric.parse(cloud.metric)
    n = len(pts)
    covered = np.zeros(n, dtype=bool)
    net = []
    for i in range(n):
        if covered[i]:
            continue
        net.append(i)
        d = _norms(pts - pts[i], metric)
        covered |= d < eps
    return net
