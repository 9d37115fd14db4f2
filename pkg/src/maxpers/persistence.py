"""Persistent homology over Z/2 by boundary-matrix column reduction."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _backend
from .errors import InvalidInputError
from .filtration import FilteredComplex, Flavor
from .geometry import Metric
from .sampling import _text_out


@dataclass(frozen=True, order=True)
class PersistencePair:
    degree: int
    birth: float
    death: float
    birth_simplex: int
    death_simplex: int = -1  # -1 for essential classes

    @property
    def essential(self) -> bool:
        return math.isinf(self.death)

    @property
    def length(self) -> float:
        return self.death - self.birth


class PersistenceDiagram:
    """Per-degree (birth, death) pairs plus essential classes (death = inf).

    Stored column-wise and sorted by (degree, birth, death, birth simplex);
    zero-length pairs are kept.  ``pairs`` materialises PersistencePair
    objects on demand.
    """

    def __init__(self, degrees, births, deaths, birth_simplex, death_simplex, n_simplices: int,
                 r_max: float, flavor: Flavor, metric: Metric = Metric.CUBE, ambient_dim: int = 2,
                 max_dim: int = 1):
        degrees = np.asarray(degrees, dtype=np.int64)
        births = np.asarray(births, dtype=float)
        deaths = np.asarray(deaths, dtype=float)
        birth_simplex = np.asarray(birth_simplex, dtype=np.int64)
        death_simplex = np.asarray(death_simplex, dtype=np.int64)
        order = np.lexsort((birth_simplex, deaths, births, degrees))
        self.degrees = degrees[order]
        self.births = births[order]
        self.deaths = deaths[order]
        self.birth_simplex = birth_simplex[order]
        self.death_simplex = death_simplex[order]
        self.n_simplices = int(n_simplices)
        self.r_max = r_max
        self.flavor = Flavor.parse(flavor)
        self.metric = Metric.parse(metric)
        self.ambient_dim = ambient_dim
        self.max_dim = max_dim
        self._pairs = None

    def __len__(self) -> int:
        return len(self.degrees)

    def __repr__(self) -> str:
        counts = {int(k): int(c) for k, c in zip(*np.unique(self.degrees, return_counts=True))}
        return f"PersistenceDiagram({self.flavor.value}, {self.metric.value}, pairs per degree={counts})"

    def _select(self, mask: np.ndarray) -> list[PersistencePair]:
        idx = np.flatnonzero(mask)
        return [
            PersistencePair(int(k), float(b), float(d), int(bs), int(ds))
            for k, b, d, bs, ds in zip(self.degrees[idx].tolist(), self.births[idx].tolist(),
                                       self.deaths[idx].tolist(), self.birth_simplex[idx].tolist(),
                                       self.death_simplex[idx].tolist())
        ]

    @property
    def pairs(self) -> dict[int, list[PersistencePair]]:
        if self._pairs is None:
            self._pairs = {int(k): self._select(self.degrees == k) for k in np.unique(self.degrees)}
        return self._pairs

    def degree(self, k: int) -> list[PersistencePair]:
        return self._select(self.degrees == k)

    def finite_mask(self, k: int, nonzero: bool = True) -> np.ndarray:
        mask = (self.degrees == k) & np.isfinite(self.deaths)
        if nonzero:
            mask &= self.deaths > self.births
        return mask

    def finite(self, k: int, nonzero: bool = True) -> list[PersistencePair]:
        return self._select(self.finite_mask(k, nonzero))

    def essential(self, k: int) -> list[PersistencePair]:
        return self._select((self.degrees == k) & np.isinf(self.deaths))

    def n_essential(self, k: int | None = None) -> int:
        mask = np.isinf(self.deaths)
        if k is not None:
            mask &= self.degrees == k
        return int(mask.sum())

    def n_finite(self) -> int:
        return int(np.isfinite(self.deaths).sum())

    def all_pairs(self) -> list[PersistencePair]:
        return self._select(np.ones(len(self), dtype=bool))

    def as_multiset(self) -> list[tuple[int, float, float]]:
        return list(zip(self.degrees.tolist(), self.births.tolist(), self.deaths.tolist()))

    def same_pairs(self, other: "PersistenceDiagram") -> bool:
        """Identical pairs including the simplices that realise them."""
        return all(np.array_equal(getattr(self, a), getattr(other, a))
                   for a in ("degrees", "births", "deaths", "birth_simplex", "death_simplex"))


def _diagram_from_lows(fc: FilteredComplex, lows: np.ndarray) -> PersistenceDiagram:
    N = len(fc)
    births = np.flatnonzero(lows >= 0)
    deaths = lows[births]
    paired = np.zeros(N, dtype=bool)
    paired[births] = True
    paired[deaths] = True
    ess = np.flatnonzero(~paired)
    b_idx = np.concatenate([births, ess])
    d_idx = np.concatenate([deaths, np.full(len(ess), -1, dtype=np.int64)])
    d_val = np.concatenate([fc.values[deaths], np.full(len(ess), np.inf)])
    return PersistenceDiagram(fc.dims[b_idx], fc.values[b_idx], d_val, b_idx, d_idx, N, fc.r_max,
                              fc.flavor, fc.metric, fc.ambient_dim, fc.max_dim)


def compute_persistence(fc: FilteredComplex, dualize: bool = True) -> PersistenceDiagram:
    """Persistence diagram via twist reduction (clearing).

    With ``dualize`` (the default) the anti-transposed boundary matrix is
    reduced instead, lowest simplex dimension first; the pairing is identical
    but positive top-dimensional columns, which dominate the cost at radii
    past coverage, are never reduced.
    """
    fc.check()
    N = len(fc)
    if N == 0:
        return _diagram_from_lows(fc, np.empty(0, dtype=np.int64))
    indptr, indices = fc.boundary()
    top = int(fc.dims.max())
    if not dualize:
        lows = _backend.reduce_twist(indptr, indices, np.ascontiguousarray(fc.dims, dtype=np.int64), top)
        return _diagram_from_lows(fc, np.asarray(lows))
    t_indptr, t_indices = _backend.antitranspose(indptr, indices, N)
    codim = np.ascontiguousarray((top - fc.dims)[::-1], dtype=np.int64)
    t_lows = np.asarray(_backend.reduce_twist(t_indptr, t_indices, codim, top))
    lows = np.full(N, -1, dtype=np.int64)
    rows = np.flatnonzero(t_lows >= 0)
    # dual pivot (row r, column c) is the pair (birth N-1-c, death N-1-r)
    lows[N - 1 - t_lows[rows]] = N - 1 - rows
    return _diagram_from_lows(fc, lows)


def compute_persistence_naive(fc: FilteredComplex) -> PersistenceDiagram:
    """Textbook left-to-right reduction; no clearing, no twist.  Oracle only."""
    fc.check()
    N = len(fc)
    lows = np.full(N, -1, dtype=np.int64)
    if N == 0:
        return _diagram_from_lows(fc, lows)
    indptr, indices = fc.boundary()
    owner: dict[int, int] = {}
    reduced: list[set[int]] = []
    for j in range(N):
        col = set(indices[indptr[j]:indptr[j + 1]].tolist())
        while col:
            low = max(col)
            if low not in owner:
                break
            col ^= reduced[owner[low]]
        reduced.append(col)
        if col:
            owner[max(col)] = j
    for low, j in owner.items():
        lows[low] = j
    return _diagram_from_lows(fc, lows)


def torus_betti(d: int, k: int) -> int:
    return math.comb(d, k)


def truncation_check(diag: PersistenceDiagram, k: int) -> bool:
    """True when the radius cap may have cut a degree-k bar short.

    In the cube any essential degree-k class signals truncation.  On the flat
    torus the ``comb(d, k)`` generators are expected to be essential, so only a
    different count is flagged.
    """
    n_ess = diag.n_essential(k)
    if diag.metric is Metric.TORUS:
        return n_ess != torus_betti(diag.ambient_dim, k)
    return n_ess > 0


# ---------------------------------------------------------------------------
# CSV

DIAGRAM_HEADER = ["degree", "birth", "death", "birth_simplex", "death_simplex"]


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else format(x, ".17g")


def write_diagram_csv(diag: PersistenceDiagram, path) -> None:
    """Write to a path, or to an open text stream."""
    rows = diag.all_pairs()
    with _text_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DIAGRAM_HEADER)
        for p in rows:
            w.writerow([p.degree, _fmt(p.birth), _fmt(p.death), p.birth_simplex,
                        "" if p.essential else p.death_simplex])


def read_diagram_csv(path: str | Path, flavor: Flavor | str = Flavor.CECH,
                     metric: Metric | str = Metric.CUBE, ambient_dim: int = 2) -> PersistenceDiagram:
    cols: list[list] = [[], [], [], [], []]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != DIAGRAM_HEADER:
            raise InvalidInputError(f"{path}: bad diagram header {header!r}")
        try:
            for row in reader:
                if not row:
                    continue
                cols[0].append(int(row[0]))
                cols[1].append(float(row[1]))
                cols[2].append(float(row[2]))
                cols[3].append(int(row[3]))
                cols[4].append(int(row[4]) if row[4] not in ("", "-1") else -1)
        except (ValueError, IndexError) as exc:
            raise InvalidInputError(f"{path}: malformed row: {exc}") from None
    deaths = np.asarray(cols[2], dtype=float)
    n = int(2 * np.isfinite(deaths).sum() + np.isinf(deaths).sum())
    max_dim = max(cols[0], default=0)
    return PersistenceDiagram(*cols, n_simplices=n, r_max=math.nan, flavor=flavor, metric=metric,
                              ambient_dim=ambient_dim, max_dim=max_dim)
