"""Summary quantities of persistence diagrams: ratios, maxima, scaling term, fits."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .persistence import PersistenceDiagram, PersistencePair, truncation_check


def multiplicative_persistence(pair: PersistencePair) -> float:
    """Death over birth of a finite pair with positive birth."""
    if pair.essential:
        raise InvalidInputError("essential pair has no finite death/birth ratio")
    if not pair.birth > 0:
        raise InvalidInputError(f"birth must be positive, got {pair.birth}")
    return pair.death / pair.birth


def delta_k(n: float, k: int) -> float:
    """Scaling term (log n / log log n) ** (1/k), natural logarithms."""
    if k < 1:
        raise InvalidInputError(f"degree must be >= 1, got {k}")
    if not n > math.e:
        raise InvalidInputError(f"n must exceed e, got {n}")
    ln = math.log(n)
    return (ln / math.log(ln)) ** (1.0 / k)


@dataclass(frozen=True)
class MaxPersistenceReport:
    k: int
    pi_max: float | None
    argmax_pair: PersistencePair | None
    n_intensity: float | None
    delta_k: float | None
    ratio: float | None
    truncated: bool
    n_essential: int

    @property
    def present(self) -> bool:
        return self.pi_max is not None


def max_persistence(diag: PersistenceDiagram, k: int, exclude_essential: bool = True,
                    n: float | None = None) -> MaxPersistenceReport:
    """Largest death/birth ratio over finite nonzero-length degree-k pairs.

    Essential classes never enter the maximum; their count is reported.
    ``exclude_essential`` is accepted for interface symmetry and must stay
    true.  When ``n`` is given the scaling term and the ratio are filled in.
    Ties are broken by the earliest pair in diagram order.
    """
    if k < 1:
        raise InvalidInputError(f"degree must be >= 1, got {k}")
    if not exclude_essential:
        raise InvalidInputError("essential classes have no finite ratio and cannot be included")
    dk = delta_k(n, k) if n is not None else None
    mask = diag.finite_mask(k, nonzero=True) & (diag.births > 0)
    idx = np.flatnonzero(mask)
    truncated = truncation_check(diag, k)
    n_ess = diag.n_essential(k)
    if len(idx) == 0:
        return MaxPersistenceReport(k, None, None, n, dk, None, truncated, n_ess)
    ratios = diag.deaths[idx] / diag.births[idx]
    best = int(idx[int(np.argmax(ratios))])
    pair = PersistencePair(int(diag.degrees[best]), float(diag.births[best]), float(diag.deaths[best]),
                           int(diag.birth_simplex[best]), int(diag.death_simplex[best]))
    pi = pair.death / pair.birth
    return MaxPersistenceReport(k, pi, pair, n, dk, pi / dk if dk is not None else None, truncated, n_ess)


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residual_rms: float
    n_samples: int

    def predict(self, x):
        return self.slope * np.asarray(x, dtype=float) + self.intercept


def linear_fit(xs, ys) -> FitResult:
    """Ordinary least squares line y = slope * x + intercept."""
    x = np.asarray(xs, dtype=float).ravel()
    y = np.asarray(ys, dtype=float).ravel()
    if len(x) != len(y):
        raise InvalidInputError(f"length mismatch: {len(x)} x values, {len(y)} y values")
    if len(x) < 2:
        raise InvalidInputError("need at least two points")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InvalidInputError("non-finite input")
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0 or np.all(x == x[0]):
        raise InvalidInputError("x values are all equal")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    resid = y - (slope * x + intercept)
    return FitResult(slope, intercept, float(math.sqrt(np.mean(resid ** 2))), len(x))


def histogram(values, bins: int) -> list[tuple[tuple[float, float], int]]:
    """Equal-width bins over [min, max]; the last bin is closed on the right."""
    v = np.asarray(values, dtype=float).ravel()
    if len(v) == 0:
        raise InvalidInputError("empty input")
    if int(bins) != bins or bins < 1:
        raise InvalidInputError(f"bins must be a positive integer, got {bins}")
    counts, edges = np.histogram(v, bins=int(bins))
    return [((float(edges[i]), float(edges[i + 1])), int(counts[i])) for i in range(len(counts))]
