"""Radius-capped Čech and Vietoris–Rips filtrations.

Filtration values are radii: an edge ``{x, y}`` enters at ``|x - y| / 2`` in
both flavours, a Rips simplex at half its diameter, and a Čech simplex at the
radius of the minimal enclosing ball of its vertices.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _backend
from .errors import InvalidInputError, UnsupportedConfigurationError
from .geometry import Metric, min_enclosing_ball, neighbor_pairs, triangle_meb_radii, unwrap
from .sampling import PointCloud

TORUS_RMAX_CAP = 0.125


class Flavor(str, enum.Enum):
    CECH = "cech"
    RIPS = "rips"

    @classmethod
    def parse(cls, value: "Flavor | str") -> "Flavor":
        if isinstance(value, Flavor):
            return value
        key = str(value).strip().lower().replace("č", "c")
        for f in cls:
            if key == f.value or (f is cls.RIPS and key in ("vietoris-rips", "vr")):
                return f
        raise InvalidInputError(f"unknown flavor {value!r}")


def _keys(verts: np.ndarray, n: int) -> np.ndarray | None:
    """Base-``n`` integer keys of sorted vertex rows, or None on overflow."""
    width = verts.shape[1]
    if n <= 1:
        n = 2
    if width * math.log2(n) >= 62:
        return None
    keys = np.zeros(len(verts), dtype=np.int64)
    for q in range(width):
        keys = keys * n + verts[:, q]
    return keys


def _locate(table: np.ndarray, query: np.ndarray, n: int) -> np.ndarray:
    """Row index in ``table`` of each row of ``query`` (-1 where absent)."""
    if len(query) == 0:
        return np.empty(0, dtype=np.int64)
    if len(table) == 0:
        return np.full(len(query), -1, dtype=np.int64)
    tk = _keys(table, n)
    if tk is None:
        lookup = {tuple(r): i for i, r in enumerate(table.tolist())}
        return np.array([lookup.get(tuple(r), -1) for r in query.tolist()], dtype=np.int64)
    qk = _keys(query, n)
    order = np.argsort(tk, kind="stable")
    sk = tk[order]
    pos = np.searchsorted(sk, qk)
    pos_c = np.minimum(pos, len(sk) - 1)
    found = (pos < len(sk)) & (sk[pos_c] == qk)
    return np.where(found, order[pos_c], -1).astype(np.int64)


@dataclass
class FilteredComplex:
    """Simplices in the total order (value, dimension, lexicographic vertices).

    ``vertices`` is padded with -1 beyond each simplex's dimension.
    """

    vertices: np.ndarray
    dims: np.ndarray
    values: np.ndarray
    flavor: Flavor
    r_max: float
    max_dim: int
    n_points: int
    metric: Metric = Metric.CUBE
    ambient_dim: int = 2
    _boundary: tuple | None = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.dims)

    @property
    def simplices(self) -> list[tuple[tuple[int, ...], float]]:
        return [
            (tuple(int(v) for v in row[: d + 1]), float(val))
            for row, d, val in zip(self.vertices.tolist(), self.dims.tolist(), self.values.tolist())
        ]

    def simplex(self, i: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.vertices[i, : self.dims[i] + 1])

    def index_of(self, simplex) -> int:
        row = np.full(self.vertices.shape[1], -1, dtype=np.int64)
        s = sorted(simplex)
        row[: len(s)] = s
        hits = np.flatnonzero((self.vertices == row).all(axis=1))
        if len(hits) == 0:
            raise KeyError(simplex)
        return int(hits[0])

    def value_map(self) -> dict[tuple[int, ...], float]:
        return dict(self.simplices)

    @classmethod
    def from_simplices(cls, simplices, flavor="rips", r_max=math.inf, max_dim=None,
                       n_points=None, metric=Metric.CUBE, ambient_dim=2) -> "FilteredComplex":
        """Assemble a complex from ``(vertex tuple, value)`` pairs, sorting into the total order."""
        items = [(tuple(sorted(int(v) for v in s)), float(val)) for s, val in simplices]
        top = max((len(s) - 1 for s, _ in items), default=0)
        if max_dim is None:
            max_dim = top
        width = max(max_dim, top) + 1
        verts = np.full((len(items), width), -1, dtype=np.int64)
        dims = np.empty(len(items), dtype=np.int64)
        vals = np.empty(len(items), dtype=float)
        for r, (s, val) in enumerate(items):
            verts[r, : len(s)] = s
            dims[r] = len(s) - 1
            vals[r] = val
        if n_points is None:
            n_points = int(verts[dims == 0, 0].max()) + 1 if np.any(dims == 0) else 0
        verts, dims, vals = _total_order(verts, dims, vals)
        return cls(verts, dims, vals, Flavor.parse(flavor), float(r_max), int(max_dim),
                   int(n_points), Metric.parse(metric), ambient_dim)

    def boundary(self) -> tuple[np.ndarray, np.ndarray]:
        """Boundary matrix in CSR-by-column form: rows of column j are
        ``indices[indptr[j]:indptr[j+1]]``, ascending filtration indices.

        Raises InvalidInputError if a facet is missing.
        """
        if self._boundary is not None:
            return self._boundary
        N = len(self.dims)
        dims = self.dims
        counts = np.where(dims > 0, dims + 1, 0)
        indptr = np.zeros(N + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        indices = np.empty(indptr[-1], dtype=np.int64)
        n = max(self.n_points, int(self.vertices.max()) + 1 if N else 0)
        for p in range(1, int(dims.max()) + 1 if N else 0):
            cols = np.flatnonzero(dims == p)
            if len(cols) == 0:
                continue
            faces = np.flatnonzero(dims == p - 1)
            table = self.vertices[faces, :p]
            verts = self.vertices[cols, : p + 1]
            rows = np.empty((len(cols), p + 1), dtype=np.int64)
            for q in range(p + 1):
                facet = np.delete(verts, q, axis=1)
                loc = _locate(table, facet, n)
                if np.any(loc < 0):
                    bad = int(cols[np.flatnonzero(loc < 0)[0]])
                    raise InvalidInputError(f"simplex {self.simplex(bad)} has a facet missing from the complex")
                rows[:, q] = faces[loc]
            rows.sort(axis=1)
            starts = indptr[cols]
            for q in range(p + 1):
                indices[starts + q] = rows[:, q]
        self._boundary = (indptr, indices)
        return self._boundary

    def check(self) -> None:
        """Raise InvalidInputError unless the complex satisfies its invariants."""
        N = len(self.dims)
        if N == 0:
            return
        if np.any(self.values[self.dims == 0] != 0):
            raise InvalidInputError("vertices must have filtration value 0")
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            raise InvalidInputError("filtration values must be finite and non-negative")
        indptr, indices = self.boundary()
        col = np.repeat(np.arange(N), np.diff(indptr))
        if np.any(indices >= col):
            raise InvalidInputError("a facet appears after its coface in the filtration order")
        if np.any(self.values[indices] > self.values[col]):
            raise InvalidInputError("filtration is not monotone: a facet has a larger value than its coface")

    def to_text(self) -> str:
        lines = []
        for s, val in self.simplices:
            lines.append(" ".join([format(val, ".17g"), str(len(s) - 1), *map(str, s)]))
        return "\n".join(lines) + ("\n" if lines else "")

    def write_text(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())


def _total_order(verts, dims, vals):
    """Sort rows by (value, dimension, lexicographic vertices)."""
    keys = [verts[:, q] for q in range(verts.shape[1] - 1, -1, -1)] + [dims, vals]
    order = np.lexsort(keys)
    return verts[order], dims[order], vals[order]


def default_rmax(n: float, d: int, c: float = 3.0, metric: Metric | str = Metric.CUBE) -> float:
    """``c * (log n / n)^(1/d)``, clamped to 1/8 on the torus."""
    if not n > math.e:
        raise InvalidInputError(f"need n > e, got {n}")
    if not c > 0:
        raise InvalidInputError(f"multiplier must be positive, got {c}")
    r = c * (math.log(n) / n) ** (1.0 / d)
    if Metric.parse(metric) is Metric.TORUS:
        r = min(r, TORUS_RMAX_CAP)
    return r


def _check_args(cloud: PointCloud, r_max: float, max_dim: int) -> None:
    if not r_max > 0:
        raise InvalidInputError(f"r_max must be positive, got {r_max}")
    if int(max_dim) != max_dim or max_dim < 1:
        raise InvalidInputError(f"max_dim must be an integer >= 1, got {max_dim}")
    if cloud.metric is Metric.TORUS and r_max > TORUS_RMAX_CAP:
        raise UnsupportedConfigurationError(
            f"torus filtrations need r_max <= {TORUS_RMAX_CAP}, got {r_max}"
        )


def _neighbor_csr(n: int, i: np.ndarray, j: np.ndarray, dist: np.ndarray):
    """Symmetric neighbour graph as sorted CSR rows, with each entry's edge id."""
    src = np.concatenate([i, j])
    dst = np.concatenate([j, i])
    dd = np.concatenate([dist, dist])
    ids = np.concatenate([np.arange(len(i)), np.arange(len(i))]).astype(np.int64)
    order = np.lexsort((dst, src))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return (indptr, np.ascontiguousarray(dst[order]), np.ascontiguousarray(dd[order]),
            np.ascontiguousarray(ids[order]))


def _cech_values(cloud: PointCloud, verts: np.ndarray) -> np.ndarray:
    coords = cloud.points[verts]
    if cloud.metric is Metric.TORUS:
        coords = unwrap(coords, Metric.TORUS)
    if verts.shape[1] == 3:
        return triangle_meb_radii(coords[:, 0], coords[:, 1], coords[:, 2])
    return np.array([min_enclosing_ball(c).radius for c in coords], dtype=float)


def _facet_locations(table: np.ndarray, n: int, new_v: np.ndarray) -> np.ndarray:
    """(m, p+1) rows of ``table`` holding each facet; column q drops vertex q."""
    first_ptr = np.searchsorted(table[:, 0], np.arange(n + 1)).astype(np.int64)
    width = new_v.shape[1]
    locs = np.empty((len(new_v), width), dtype=np.int64)
    for q in range(width):
        facet = np.ascontiguousarray(np.delete(new_v, q, axis=1))
        locs[:, q] = _backend.locate_rows(table, first_ptr, facet)
    return locs


# parent cliques expanded per batch; bounds the unfiltered candidate arrays
_CHUNK = 1 << 16


def _expand_chunk(cloud, r_max, flavor, n, p, prev_v, prev_f, start, indptr, nbrs, ndist, eid):
    """Cofaces of ``prev_v[start:start + _CHUNK]`` with values and facet rows."""
    block = np.ascontiguousarray(prev_v[start:start + _CHUNK])
    new_v, maxd, parent, edge_ids = _backend.expand_cliques(block, indptr, nbrs, ndist, eid)
    parent += start
    if p == 2:
        # facet dropping vertex q of (a, b, c): (b, c), (a, c), (a, b)
        locs = np.stack([edge_ids[:, 1], edge_ids[:, 0], parent], axis=1)
    else:
        locs = _facet_locations(prev_v, n, new_v)
    del edge_ids
    vals = np.maximum(prev_f[parent], maxd / 2.0)
    if flavor is Flavor.CECH and len(new_v):
        vals = np.maximum(vals, _cech_values(cloud, new_v))
        # guard against rounding: a simplex never precedes any of its facets
        missing = np.any(locs < 0, axis=1)
        safe = np.where(locs < 0, 0, locs)
        vals = np.maximum(vals, prev_f[safe].max(axis=1))
        vals[missing] = np.inf
        keep = vals <= r_max
        new_v, vals, locs = new_v[keep], vals[keep], locs[keep]
    return new_v, vals, locs


def _build(cloud: PointCloud, r_max: float, max_dim: int, flavor: Flavor) -> FilteredComplex:
    _check_args(cloud, r_max, max_dim)
    n = len(cloud)
    i, j, dist = neighbor_pairs(cloud, r_max) if n >= 2 else (np.empty(0, np.int64),) * 2 + (np.empty(0),)
    # per dimension: lexicographically sorted vertex rows, values, facet rows in the level below
    levels_v = [np.arange(n, dtype=np.int64).reshape(n, 1),
                np.stack([i, j], axis=1).astype(np.int64).reshape(len(i), 2)]
    levels_f = [np.zeros(n), dist / 2.0]
    levels_loc = [np.empty((n, 0), dtype=np.int64), levels_v[1][:, ::-1].copy()]
    indptr, nbrs, ndist, eid = _neighbor_csr(n, i, j, dist)
    for p in range(2, max_dim + 1):
        prev_v, prev_f = levels_v[-1], levels_f[-1]
        if len(prev_v) == 0:
            break
        parts = [_expand_chunk(cloud, r_max, flavor, n, p, prev_v, prev_f, start, indptr, nbrs, ndist, eid)
                 for start in range(0, len(prev_v), _CHUNK)]
        new_v = np.concatenate([q[0] for q in parts])
        if len(new_v) == 0:
            break
        levels_v.append(new_v)
        levels_f.append(np.concatenate([q[1] for q in parts]))
        levels_loc.append(np.concatenate([q[2] for q in parts]))
        del parts
    return _assemble(cloud, r_max, max_dim, flavor, levels_v, levels_f, levels_loc)


def _assemble(cloud, r_max, max_dim, flavor, levels_v, levels_f, levels_loc) -> FilteredComplex:
    n = len(cloud)
    width = max_dim + 1
    sizes = [len(v) for v in levels_v]
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    total = int(offsets[-1])
    vals = np.concatenate(levels_f)
    # rows are already in (dimension, lexicographic) order; a stable sort on
    # value yields the full total order
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    pos = np.empty(total, dtype=np.int64)
    pos[order] = np.arange(total, dtype=np.int64)
    del order
    sdims = np.empty(total, dtype=np.int64)
    verts = np.full((total, width), -1, dtype=np.int64)
    for p, lv in enumerate(levels_v):
        g = pos[offsets[p]:offsets[p + 1]]
        sdims[g] = p
        verts[g, : p + 1] = lv
    counts = np.where(sdims > 0, sdims + 1, 0)
    indptr = np.zeros(total + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    del counts
    indices = np.empty(indptr[-1], dtype=np.int64)
    for p in range(1, len(levels_v)):
        if sizes[p] == 0:
            continue
        g = pos[offsets[p]:offsets[p + 1]]
        facets = pos[offsets[p - 1] + levels_loc[p]]
        facets.sort(axis=1)
        starts = indptr[g]
        for q in range(p + 1):
            indices[starts + q] = facets[:, q]
        del facets, starts
    fc = FilteredComplex(verts, sdims, vals, flavor, float(r_max), int(max_dim), n,
                         cloud.metric, cloud.dimension)
    fc._boundary = (indptr, indices)
    return fc


def build_rips(cloud: PointCloud, r_max: float, max_dim: int = 2) -> FilteredComplex:
    return _build(cloud, r_max, max_dim, Flavor.RIPS)


def build_cech(cloud: PointCloud, r_max: float, max_dim: int = 2) -> FilteredComplex:
    return _build(cloud, r_max, max_dim, Flavor.CECH)


def build_filtration(cloud: PointCloud, flavor: Flavor | str, r_max: float, max_dim: int = 2) -> FilteredComplex:
    return _build(cloud, r_max, max_dim, Flavor.parse(flavor))
