"""Trial grids over intensities: records CSV with checkpoint/resume, summaries, SVG plot."""
from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, MaxPersError, UnsupportedConfigurationError
from .filtration import TORUS_RMAX_CAP, Flavor, build_filtration, default_rmax
from .geometry import Metric
from .persistence import compute_persistence
from .sampling import RngStream, sample_poisson, splitmix64
from .statistics import FitResult, delta_k, histogram, linear_fit, max_persistence

DEFAULT_GRID = (100, 200, 400, 800, 1600, 3200, 6400, 12800)
# radius multiplier used by experiments unless configured; see the README for why it is not 3
DEFAULT_MULTIPLIER = 0.9
MAX_RETRIES = 3

RECORD_HEADER = ["n", "d", "k", "flavor", "metric", "substream", "N", "pi_max", "birth", "death",
                 "delta_k", "ratio", "truncated", "wall_ms", "error"]


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class ExperimentConfig:
    n_grid: tuple[float, ...] = DEFAULT_GRID
    d: int = 2
    k_list: tuple[int, ...] = (1,)
    flavor: Flavor = Flavor.CECH
    metric: Metric = Metric.CUBE
    trials_per_n: int = 20
    root_seed: int = 0
    r_max_multiplier: float = DEFAULT_MULTIPLIER
    max_dim: int | None = None
    output_path: str | None = None
    workers: int = 1
    record_timing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(float(n) for n in self.n_grid))
        object.__setattr__(self, "k_list", tuple(int(k) for k in self.k_list))
        object.__setattr__(self, "flavor", Flavor.parse(self.flavor))
        object.__setattr__(self, "metric", Metric.parse(self.metric))
        self.validate()

    def validate(self) -> None:
        if not self.n_grid:
            raise InvalidInputError("n_grid is empty")
        if any(not n > math.e for n in self.n_grid):
            raise InvalidInputError(f"every n must exceed e: {self.n_grid}")
        if len(set(self.n_grid)) != len(self.n_grid):
            raise InvalidInputError("n_grid has duplicates")
        if self.d < 2:
            raise InvalidInputError(f"d must be >= 2, got {self.d}")
        if not self.k_list or any(not 1 <= k <= self.d - 1 for k in self.k_list):
            raise InvalidInputError(f"each k must satisfy 1 <= k <= d-1, got {self.k_list}")
        if int(self.trials_per_n) != self.trials_per_n or self.trials_per_n < 1:
            raise InvalidInputError(f"trials_per_n must be >= 1, got {self.trials_per_n}")
        if not 0 <= self.root_seed < 2 ** 64:
            raise InvalidInputError("root_seed must be a 64-bit unsigned integer")
        if not self.r_max_multiplier > 0:
            raise InvalidInputError("r_max_multiplier must be positive")
        if self.max_dim is not None and self.max_dim < max(self.k_list) + 1:
            raise InvalidInputError(f"max_dim must be >= max(k_list) + 1 = {max(self.k_list) + 1}")
        if self.workers < 1:
            raise InvalidInputError("workers must be >= 1")

    @property
    def top_dim(self) -> int:
        return self.max_dim if self.max_dim is not None else max(self.k_list) + 1


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_list(text: str, cast):
    return tuple(cast(x) for x in text.replace(";", ",").split(",") if x.strip())


def _num(text: str) -> float:
    v = float(text)
    return int(v) if v.is_integer() else v


_PARSERS = {
    "n_grid": lambda s: _parse_list(s, _num),
    "d": int,
    "k_list": lambda s: _parse_list(s, int),
    "flavor": str.strip,
    "metric": str.strip,
    "trials_per_n": int,
    "root_seed": lambda s: int(s, 0),
    "r_max_multiplier": float,
    "max_dim": lambda s: None if s.strip().lower() in ("", "none") else int(s),
    "output_path": lambda s: None if s.strip().lower() in ("", "none") else s.strip(),
    "workers": int,
    "record_timing": _parse_bool,
}


def parse_config(text: str) -> ExperimentConfig:
    """Flat ``key = value`` lines; ``#`` starts a comment; lists are comma separated."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInputError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _PARSERS:
            raise InvalidInputError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise InvalidInputError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _PARSERS[key](val)
        except ValueError as exc:
            raise InvalidInputError(f"line {lineno}: bad value for {key}: {exc}") from None
    return ExperimentConfig(**values)


def load_config(path: str | Path) -> ExperimentConfig:
    cfg = parse_config(Path(path).read_text())
    if cfg.output_path is not None and not os.path.isabs(cfg.output_path):
        cfg = replace(cfg, output_path=str(Path(path).parent / cfg.output_path))
    return cfg


def format_config(cfg: ExperimentConfig) -> str:
    out = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if v is None:
            v = "none"
        elif isinstance(v, tuple):
            v = ",".join(_fmt(x) for x in v)
        elif isinstance(v, bool):
            v = "true" if v else "false"
        elif hasattr(v, "value"):
            v = v.value
        out.append(f"{f.name} = {v}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# records

@dataclass(frozen=True)
class TrialRecord:
    n: float
    d: int
    k: int
    flavor: str
    metric: str
    substream: int
    N: int
    pi_max: float | None
    birth: float | None
    death: float | None
    delta_k: float
    ratio: float | None
    truncated: bool
    wall_ms: float | None = None
    error: str = ""
    n_essential: int | None = field(default=None, compare=False)
    r_max: float | None = field(default=None, compare=False)

    @property
    def key(self) -> tuple:
        return (self.n, self.metric, self.substream, self.k)

    def row(self) -> list[str]:
        return [_fmt(self.n), str(self.d), str(self.k), self.flavor, self.metric, str(self.substream),
                str(self.N), _fmt(self.pi_max), _fmt(self.birth), _fmt(self.death), _fmt(self.delta_k),
                _fmt(self.ratio), "1" if self.truncated else "0", _fmt(self.wall_ms), self.error]

    @classmethod
    def from_row(cls, row: dict) -> "TrialRecord":
        def opt(x):
            return None if x in ("", None) else float(x)

        return cls(_num(row["n"]), int(row["d"]), int(row["k"]), row["flavor"], row["metric"],
                   int(row["substream"]), int(row["N"]), opt(row["pi_max"]), opt(row["birth"]),
                   opt(row["death"]), float(row["delta_k"]), opt(row["ratio"]), row["truncated"] == "1",
                   opt(row["wall_ms"]), row["error"])


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf"
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return format(x, ".17g")


def substream_index(n_index: int, trial: int) -> int:
    """Stable 64-bit substream for trial ``trial`` of grid entry ``n_index``."""
    return splitmix64(((n_index & 0xFFFFFFFF) << 32) | (trial & 0xFFFFFFFF))


def _sort_key(rec: TrialRecord):
    return (rec.n, rec.metric, rec.substream, rec.k)


def write_records(records, path: str | Path) -> None:
    """Rewrite ``path`` with records in sorted order (atomic replace)."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_HEADER)
        for rec in sorted(records, key=_sort_key):
            w.writerow(rec.row())
    os.replace(tmp, path)


def read_records(path: str | Path) -> list[TrialRecord]:
    """Parse a records CSV; a torn final line (interrupted write) is dropped."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RECORD_HEADER:
            raise InvalidInputError(f"{path}: not a records file (header {reader.fieldnames})")
        rows = list(reader)
    out = []
    for lineno, row in enumerate(rows, 2):
        try:
            out.append(TrialRecord.from_row(row))
        except (TypeError, ValueError, KeyError) as exc:
            if lineno - 2 == len(rows) - 1:
                break
            raise InvalidInputError(f"{path}:{lineno}: malformed row: {exc}") from None
    return out


# ---------------------------------------------------------------------------
# one trial

def evaluate_cloud(cloud, n: float, k_list, flavor: Flavor, r_max: float, max_dim: int,
                   substream: int, retries: int = MAX_RETRIES, record_timing: bool = False):
    """Persistence reports for every k, with the retry-on-truncation rule.

    While any requested degree is flagged as truncated the radius cap is
    doubled (on the torus up to its 1/8 ceiling), at most ``retries`` times.
    If truncation persists the returned records carry an error reason.
    """
    t0 = time.perf_counter()
    metric = cloud.metric
    err = ""
    attempt = 0
    while True:
        diag = compute_persistence(build_filtration(cloud, flavor, r_max, max_dim))
        reports = [max_persistence(diag, k, n=n) for k in k_list]
        if not any(r.truncated for r in reports):
            break
        grown = r_max * 2.0
        if metric is Metric.TORUS:
            grown = min(grown, TORUS_RMAX_CAP)
        if attempt >= retries or grown <= r_max:
            err = f"truncation exhausted at r_max={_fmt(r_max)}"
            break
        r_max = grown
        attempt += 1
    wall = (time.perf_counter() - t0) * 1000.0 if record_timing else None
    out = []
    for r in reports:
        ok = r.present and not err
        out.append(TrialRecord(
            n=n, d=cloud.dimension, k=r.k, flavor=flavor.value, metric=metric.value, substream=substream,
            N=len(cloud), pi_max=r.pi_max if ok else None, birth=r.argmax_pair.birth if ok else None,
            death=r.argmax_pair.death if ok else None, delta_k=r.delta_k, ratio=r.ratio if ok else None,
            truncated=r.truncated, wall_ms=wall, error=err, n_essential=r.n_essential, r_max=r_max))
    return out


def _error_records(n, d, k_list, flavor, metric, substream, N, reason):
    return [TrialRecord(n, d, k, flavor.value, metric.value, substream, N, None, None, None, delta_k(n, k),
                        None, False, None, reason) for k in k_list]


def run_trial(cfg: ExperimentConfig, n_index: int, trial: int, metric: Metric | None = None,
              root_seed: int | None = None) -> list[TrialRecord]:
    """All degree records of one (intensity, trial) cell of the grid."""
    metric = cfg.metric if metric is None else Metric.parse(metric)
    n = cfg.n_grid[n_index]
    sub = substream_index(n_index, trial)
    rng = RngStream(cfg.root_seed if root_seed is None else root_seed, sub)
    cloud = sample_poisson(n, cfg.d, metric, rng)
    try:
        r_max = default_rmax(n, cfg.d, cfg.r_max_multiplier, metric)
        return evaluate_cloud(cloud, n, cfg.k_list, cfg.flavor, r_max, cfg.top_dim, sub,
                              record_timing=cfg.record_timing)
    except UnsupportedConfigurationError as exc:
        return _error_records(n, cfg.d, cfg.k_list, cfg.flavor, metric, sub, len(cloud), f"unsupported: {exc}")
    except MemoryError:
        return _error_records(n, cfg.d, cfg.k_list, cfg.flavor, metric, sub, len(cloud), "out of memory")


def _run_cells(cfg: ExperimentConfig, cells, path: Path | None, existing: list[TrialRecord]):
    """Run (n_index, trial, metric) cells, appending rows to ``path`` as they finish."""
    records = list(existing)
    fh = None
    if path is not None:
        fresh = not path.exists() or path.stat().st_size == 0
        fh = open(path, "a", newline="")
        writer = csv.writer(fh, lineterminator="\n")
        if fresh:
            writer.writerow(RECORD_HEADER)
            fh.flush()

    def sink(recs):
        records.extend(recs)
        if fh is not None:
            for r in recs:
                writer.writerow(r.row())
            fh.flush()

    try:
        if cfg.workers > 1 and len(cells) > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                futs = [pool.submit(run_trial, cfg, i, t, m) for i, t, m in cells]
                for fut in as_completed(futs):
                    sink(fut.result())
        else:
            for i, t, m in cells:
                sink(run_trial(cfg, i, t, m))
    finally:
        if fh is not None:
            fh.close()
    return records


def _resume(cfg: ExperimentConfig, path: Path | None, metrics):
    """Records already on disk and the cells still to run."""
    existing: list[TrialRecord] = []
    if path is not None and path.exists() and path.stat().st_size > 0:
        existing = read_records(path)
    have: dict[tuple, set] = {}
    for r in existing:
        have.setdefault((r.n, r.metric, r.substream), set()).add(r.k)
    want = set(cfg.k_list)
    cells = []
    done = set()
    for i, n in enumerate(cfg.n_grid):
        for t in range(cfg.trials_per_n):
            for m in metrics:
                cell = (n, m.value, substream_index(i, t))
                if have.get(cell, set()) >= want:
                    done.add(cell)
                else:
                    cells.append((i, t, m))
    keep = [r for r in existing if (r.n, r.metric, r.substream) in done and r.k in want]
    if path is not None and existing:
        # restart the checkpoint from complete trials only, dropping torn or partial rows
        write_records(keep, path)
    return keep, cells


def run_experiment(cfg: ExperimentConfig, output_path: str | Path | None = None) -> list[TrialRecord]:
    """One record per (n, trial, k), deterministic in ``root_seed``.

    Rows are appended to the output CSV as trials finish; rerunning with the
    same output resumes, skipping complete trials.  On completion the file is
    rewritten in sorted order.
    """
    out = output_path if output_path is not None else cfg.output_path
    path = Path(out) if out is not None else None
    existing, cells = _resume(cfg, path, [cfg.metric])
    records = _run_cells(cfg, cells, path, existing)
    if path is not None:
        write_records(records, path)
    return sorted(records, key=_sort_key)


# ---------------------------------------------------------------------------
# summaries

@dataclass(frozen=True)
class GroupSummary:
    n: float
    k: int
    metric: str
    trials: int
    valid: int
    errors: int
    mean_ratio: float
    std_ratio: float
    min_ratio: float
    max_ratio: float
    mean_pi: float
    std_pi: float
    delta_k: float


SUMMARY_HEADER = ["n", "k", "metric", "trials", "valid", "errors", "mean_ratio", "std_ratio", "min_ratio",
                  "max_ratio", "mean_pi", "std_pi", "delta_k"]


@dataclass
class Summary:
    groups: list[GroupSummary]
    fits: dict[int, FitResult]
    through_origin: dict[int, float]

    def group(self, n: float, k: int = 1, metric: str | None = None) -> GroupSummary:
        for g in self.groups:
            if g.n == n and g.k == k and (metric is None or g.metric == metric):
                return g
        raise KeyError((n, k, metric))


def _valid(records):
    return [r for r in records if r.pi_max is not None and not r.error]


def summarize(records, summary_path: str | Path | None = None, svg_path: str | Path | None = None) -> Summary:
    """Per-(n, k, metric) ratio statistics plus least-squares fits of Π_k against Δ_k.

    The fit uses every valid trial as one point; with equal trial counts
    per n this has the same slope as fitting the per-n means.  Standard
    deviations are population (ddof=0).
    """
    records = list(records)
    if not records:
        raise InvalidInputError("no records to summarize")
    groups = []
    keys = sorted({(r.n, r.k, r.metric) for r in records})
    for n, k, m in keys:
        rows = [r for r in records if (r.n, r.k, r.metric) == (n, k, m)]
        ok = _valid(rows)
        ratios = np.array([r.ratio for r in ok], dtype=float)
        pis = np.array([r.pi_max for r in ok], dtype=float)
        nan = float("nan")
        groups.append(GroupSummary(
            n, k, m, len(rows), len(ok), sum(1 for r in rows if r.error),
            float(ratios.mean()) if len(ok) else nan, float(ratios.std()) if len(ok) else nan,
            float(ratios.min()) if len(ok) else nan, float(ratios.max()) if len(ok) else nan,
            float(pis.mean()) if len(ok) else nan, float(pis.std()) if len(ok) else nan, rows[0].delta_k))
    fits, origin = {}, {}
    for k in sorted({r.k for r in records}):
        ok = [r for r in _valid(records) if r.k == k]
        xs = np.array([r.delta_k for r in ok])
        ys = np.array([r.pi_max for r in ok])
        if len(ok) >= 2 and np.ptp(xs) > 0:
            fits[k] = linear_fit(xs, ys)
            origin[k] = float(np.dot(xs, ys) / np.dot(xs, xs))
    summary = Summary(groups, fits, origin)
    if summary_path is not None:
        write_summary(summary, summary_path)
    if svg_path is not None:
        write_svg(records, summary, svg_path)
    return summary


def write_summary(summary: Summary, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        for g in summary.groups:
            w.writerow([_fmt(getattr(g, h)) if h not in ("metric",) else g.metric for h in SUMMARY_HEADER])
        for k, f in summary.fits.items():
            w.writerow([])
            w.writerow(["fit_k", "slope", "intercept", "residual_rms", "n_samples", "slope_through_origin"])
            w.writerow([k, _fmt(f.slope), _fmt(f.intercept), _fmt(f.residual_rms), f.n_samples,
                        _fmt(summary.through_origin[k])])


def write_svg(records, summary: Summary, path: str | Path, width: int = 640, height: int = 480) -> None:
    """Scatter of Π_k against Δ_k per trial with the fitted line, one colour per degree."""
    ok = _valid(records)
    pad = 60
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'font-family="sans-serif" font-size="12">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    if ok:
        xs = np.array([r.delta_k for r in ok])
        ys = np.array([r.pi_max for r in ok])
        x0, x1 = float(xs.min()), float(xs.max())
        y0, y1 = 0.0, float(ys.max()) * 1.1
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5

        def px(x):
            return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

        def py(y):
            return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

        parts.append(f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>')
        parts.append(f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>')
        for t in np.linspace(x0, x1, 5):
            parts.append(f'<text x="{px(t):.1f}" y="{height - pad + 16}" text-anchor="middle">{t:.2f}</text>')
        for t in np.linspace(y0, y1, 5):
            parts.append(f'<text x="{pad - 6}" y="{py(t) + 4:.1f}" text-anchor="end">{t:.2f}</text>')
        parts.append(f'<text x="{width / 2}" y="{height - 15}" text-anchor="middle">log n / log log n (k-th root)</text>')
        parts.append(f'<text x="15" y="{height / 2}" transform="rotate(-90 15 {height / 2})" '
                     f'text-anchor="middle">maximal multiplicative persistence</text>')
        for ci, k in enumerate(sorted({r.k for r in ok})):
            col = colors[ci % len(colors)]
            for r in ok:
                if r.k == k:
                    parts.append(f'<circle cx="{px(r.delta_k):.2f}" cy="{py(r.pi_max):.2f}" r="2.5" '
                                 f'fill="{col}" fill-opacity="0.6"/>')
            fit = summary.fits.get(k)
            if fit is not None:
                ya, yb = fit.slope * x0 + fit.intercept, fit.slope * x1 + fit.intercept
                parts.append(f'<line x1="{px(x0):.2f}" y1="{py(ya):.2f}" x2="{px(x1):.2f}" y2="{py(yb):.2f}" '
                             f'stroke="{col}" stroke-width="2"/>')
                parts.append(f'<text x="{pad + 10}" y="{pad + 16 * (ci + 1)}" fill="{col}">k={k}: '
                             f'slope {fit.slope:.3f}, intercept {fit.intercept:.3f}</text>')
    else:
        parts.append(f'<text x="{width / 2}" y="{height / 2}" text-anchor="middle">no valid trials</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


def ratio_histograms(records, bins: int = 10) -> dict[tuple[float, int], list]:
    """Histogram of Π_k/Δ_k per (n, k) over valid trials."""
    out = {}
    ok = _valid(records)
    for n, k in sorted({(r.n, r.k) for r in ok}):
        out[(n, k)] = histogram([r.ratio for r in ok if (r.n, r.k) == (n, k)], bins)
    return out


# ---------------------------------------------------------------------------
# cube versus flat torus

@dataclass(frozen=True)
class TorusGroup:
    n: float
    k: int
    trials: int
    mean_cube: float
    std_cube: float
    mean_torus: float
    std_torus: float
    pooled_std: float
    overlap: bool
    torus_essential_counts: tuple[int, ...]


@dataclass
class TorusComparison:
    pairs: list[tuple[TrialRecord, TrialRecord]]
    groups: list[TorusGroup]

    def group(self, n: float, k: int = 1) -> TorusGroup:
        for g in self.groups:
            if g.n == n and g.k == k:
                return g
        raise KeyError((n, k))


TORUS_HEADER = ["n", "k", "trials", "mean_cube", "std_cube", "mean_torus", "std_torus", "pooled_std",
                "overlap", "torus_essential_min", "torus_essential_max"]


def run_torus_comparison(cfg: ExperimentConfig, output_path: str | Path | None = None,
                         summary_path: str | Path | None = None) -> TorusComparison:
    """Evaluate each sampled point set under both metrics.

    Both metrics share the substream, so the points are identical; only the
    distance changes.  The torus radius cap is clamped to 1/8.  ``overlap``
    holds when the two means of Π_k differ by at most the pooled standard
    deviation sqrt((s_cube² + s_torus²) / 2).
    """
    records = []
    for i, n in enumerate(cfg.n_grid):
        for t in range(cfg.trials_per_n):
            sub = substream_index(i, t)
            cube = sample_poisson(n, cfg.d, Metric.CUBE, RngStream(cfg.root_seed, sub))
            for cloud in (cube, cube.with_metric(Metric.TORUS)):
                try:
                    r_max = default_rmax(n, cfg.d, cfg.r_max_multiplier, cloud.metric)
                    records.extend(evaluate_cloud(cloud, n, cfg.k_list, cfg.flavor, r_max, cfg.top_dim, sub,
                                                  record_timing=cfg.record_timing))
                except UnsupportedConfigurationError as exc:
                    records.extend(_error_records(n, cfg.d, cfg.k_list, cfg.flavor, cloud.metric, sub,
                                                  len(cloud), f"unsupported: {exc}"))
    out = output_path if output_path is not None else cfg.output_path
    if out is not None:
        write_records(records, out)
    by_key = {r.key: r for r in records}
    pairs = [(by_key[(r.n, "cube", r.substream, r.k)], r) for r in records if r.metric == "torus"]
    groups = []
    for n in cfg.n_grid:
        for k in cfg.k_list:
            sel = [(c, t) for c, t in pairs if c.n == n and c.k == k]
            cv = np.array([c.pi_max for c, _ in sel if c.pi_max is not None], dtype=float)
            tv = np.array([t.pi_max for _, t in sel if t.pi_max is not None], dtype=float)
            mc, sc = (float(cv.mean()), float(cv.std())) if len(cv) else (math.nan, math.nan)
            mt, st = (float(tv.mean()), float(tv.std())) if len(tv) else (math.nan, math.nan)
            pooled = math.sqrt((sc ** 2 + st ** 2) / 2.0)
            ess = tuple(-1 if t.n_essential is None else t.n_essential for _, t in sel)
            groups.append(TorusGroup(n, k, len(sel), mc, sc, mt, st, pooled, abs(mc - mt) <= pooled, ess))
    comp = TorusComparison(pairs, groups)
    if summary_path is not None:
        with open(summary_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TORUS_HEADER)
            for g in groups:
                w.writerow([_fmt(g.n), g.k, g.trials, _fmt(g.mean_cube), _fmt(g.std_cube), _fmt(g.mean_torus),
                            _fmt(g.std_torus), _fmt(g.pooled_std), int(g.overlap),
                            min(g.torus_essential_counts, default=""), max(g.torus_essential_counts, default="")])
    return comp
