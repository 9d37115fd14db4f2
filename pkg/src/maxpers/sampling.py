"""Random and deterministic point clouds in the unit cube."""
from __future__ import annotations

import contextlib
import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InvalidInputError
from .geometry import Metric

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One SplitMix64 output step applied to ``x`` (64-bit wraparound)."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class RngStream:
    """A reproducible random substream: ``splitmix64(root ^ index)`` seeds a PCG64."""

    root: int
    index: int = 0

    @property
    def seed(self) -> int:
        return splitmix64((self.root ^ self.index) & _MASK64)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed))

    def child(self, index: int) -> "RngStream":
        return RngStream(self.root, index)


@dataclass
class PointCloud:
    points: np.ndarray
    metric: Metric = Metric.CUBE
    seed: int | None = None
    generator_label: str = ""
    dimension: int = field(default=-1)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1 and pts.size == 0:
            pts = pts.reshape(0, max(self.dimension, 2))
        if pts.ndim != 2:
            raise InvalidInputError("points must be a 2-d array (N, d)")
        if self.dimension < 0:
            self.dimension = pts.shape[1]
        if pts.shape[1] != self.dimension:
            raise InvalidInputError(f"points have dimension {pts.shape[1]}, expected {self.dimension}")
        if self.dimension < 2:
            raise InvalidInputError(f"dimension must be >= 2, got {self.dimension}")
        if pts.size and (np.any(pts < 0.0) or np.any(pts > 1.0) or not np.all(np.isfinite(pts))):
            raise InvalidInputError("coordinates must lie in [0, 1]")
        self.points = pts
        self.metric = Metric.parse(self.metric)

    def __len__(self) -> int:
        return len(self.points)

    def scaled(self, c: float) -> "PointCloud":
        """The cloud scaled towards the origin by ``c`` in (0, 1]."""
        if not 0 < c <= 1:
            raise InvalidInputError(f"scale factor must be in (0, 1], got {c}")
        return PointCloud(self.points * c, self.metric, self.seed, self.generator_label, self.dimension)

    def with_metric(self, metric: Metric | str) -> "PointCloud":
        return PointCloud(self.points.copy(), Metric.parse(metric), self.seed, self.generator_label, self.dimension)


def _check_dim(d: int) -> None:
    if int(d) != d or d < 2:
        raise InvalidInputError(f"dimension must be an integer >= 2, got {d}")


def sample_poisson(n: float, d: int, m: Metric | str, rng: RngStream) -> PointCloud:
    """Poisson process of intensity ``n`` on ``[0, 1]^d``: N ~ Poisson(n) uniform points."""
    if not n > 0:
        raise InvalidInputError(f"intensity must be positive, got {n}")
    _check_dim(d)
    gen = rng.generator()
    count = int(gen.poisson(n))
    pts = gen.random((count, d))
    return PointCloud(pts, Metric.parse(m), rng.seed, "poisson", d)


def sample_fixed(n: int, d: int, m: Metric | str, rng: RngStream) -> PointCloud:
    if int(n) != n or n < 0:
        raise InvalidInputError(f"n must be a non-negative integer, got {n}")
    _check_dim(d)
    pts = rng.generator().random((int(n), d))
    return PointCloud(pts, Metric.parse(m), rng.seed, "fixed", d)


# ---------------------------------------------------------------------------
# deterministic lower-bound configuration


@dataclass(frozen=True)
class LowerBoundSpec:
    """A thickened (k+1)-cube boundary of small boxes inside the box ``[-L, L]^d``.

    ``offset`` is the centre of the enclosing box in the unit cube; it defaults
    to the cube centre.
    """

    d: int
    k: int
    ell: float
    L: float
    offset: tuple[float, ...] | None = None

    def __post_init__(self):
        _check_dim(self.d)
        if not 1 <= self.k <= self.d - 1:
            raise InvalidInputError(f"need 1 <= k <= d-1, got k={self.k}, d={self.d}")
        if not (self.ell > 0 and self.L > 0):
            raise InvalidInputError("ell and L must be positive")
        if not self.ell < self.L / 4:
            raise InvalidInputError(f"need ell < L/4, got ell={self.ell}, L={self.L}")
        center = self.center
        if len(center) != self.d:
            raise InvalidInputError("offset must have d coordinates")
        lo = np.asarray(center) - self.L
        hi = np.asarray(center) + self.L
        if np.any(lo < -1e-12) or np.any(hi > 1 + 1e-12):
            raise InvalidInputError("the enclosing box [-L, L]^d does not fit in the unit cube")

    @property
    def center(self) -> tuple[float, ...]:
        return tuple(self.offset) if self.offset is not None else (0.5,) * self.d

    @property
    def cells_per_side(self) -> int:
        # floor(L / ell) with a guard against L/ell landing a hair below an integer
        return int(math.floor(self.L / self.ell + 1e-9))

    @property
    def hat_L(self) -> float:
        return self.cells_per_side * self.ell


def lower_bound_cells(spec: LowerBoundSpec) -> list[tuple[int, ...]]:
    """Integer indices of the shell boxes, lexicographic over the first k+1 axes."""
    M = spec.cells_per_side
    cells = []
    for idx in np.ndindex(*([M] * (spec.k + 1))):
        if any(i == 0 or i == M - 1 for i in idx):
            cells.append(tuple(int(i) for i in idx))
    return cells


def lower_bound_configuration(spec: LowerBoundSpec) -> tuple[PointCloud, int]:
    """One point at the centre of every small box tiling the shell.

    Returns the cloud and the box count ``m``.
    """
    cells = lower_bound_cells(spec)
    center = np.asarray(spec.center, dtype=float)
    pts = np.tile(center, (len(cells), 1))
    idx = np.asarray(cells, dtype=float)
    pts[:, : spec.k + 1] += -spec.hat_L / 2 + (idx + 0.5) * spec.ell
    pts = np.clip(pts, 0.0, 1.0)
    cloud = PointCloud(pts, Metric.CUBE, None, f"lowerbound-d{spec.d}-k{spec.k}", spec.d)
    return cloud, len(cells)


# ---------------------------------------------------------------------------
# CSV


def write_cloud_csv(cloud: PointCloud, path) -> None:
    """Write to a path, or to an open text stream."""
    with _text_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{i}" for i in range(cloud.dimension)])
        for p in cloud.points:
            w.writerow([format(float(x), ".17g") for x in p])


@contextlib.contextmanager
def _text_out(target):
    if hasattr(target, "write"):
        yield target
        target.flush()
    else:
        with open(target, "w", newline="") as fh:
            yield fh


def read_cloud_csv(path: str | Path, metric: Metric | str = Metric.CUBE) -> PointCloud:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InvalidInputError(f"{path}: empty file")
    header = rows[0]
    expected = [f"x{i}" for i in range(len(header))]
    if header != expected:
        raise InvalidInputError(f"{path}: bad header {header!r}")
    try:
        pts = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise InvalidInputError(f"{path}: {exc}") from None
    if pts.size == 0:
        pts = np.empty((0, len(header)))
    if pts.shape[1] != len(header):
        raise InvalidInputError(f"{path}: ragged rows")
    return PointCloud(pts, Metric.parse(metric), None, "csv", len(header))


def cloud_from_points(points: Sequence[Sequence[float]], metric: Metric | str = Metric.CUBE) -> PointCloud:
    return PointCloud(np.asarray(points, dtype=float), Metric.parse(metric))
