"""Command-line entry point: ``maxpers <subcommand> ...``.

Exit codes: 0 success, 1 invalid input, 2 I/O failure, 3 truncation exhausted.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, MaxPersError, TruncationExhaustedError
from .experiment import (DEFAULT_MULTIPLIER, MAX_RETRIES, load_config, read_records, run_experiment,
                         run_torus_comparison, summarize)
from .filtration import TORUS_RMAX_CAP, Flavor, build_filtration, default_rmax
from .geometry import Metric
from .persistence import (compute_persistence, compute_persistence_naive, read_diagram_csv,
                          truncation_check, write_diagram_csv)
from .sampling import (LowerBoundSpec, RngStream, lower_bound_configuration, read_cloud_csv, sample_fixed,
                       sample_poisson, write_cloud_csv)
from .statistics import linear_fit, max_persistence

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_TRUNCATED = 0, 1, 2, 3


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True, default=_json_default))


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if hasattr(x, "value"):
        return x.value
    raise TypeError(f"not serialisable: {type(x)}")


def _report_dict(rep) -> dict:
    pair = rep.argmax_pair
    return {
        "k": rep.k,
        "pi_max": rep.pi_max,
        "birth": pair.birth if pair else None,
        "death": pair.death if pair else None,
        "birth_simplex": pair.birth_simplex if pair else None,
        "death_simplex": pair.death_simplex if pair else None,
        "n": rep.n_intensity,
        "delta_k": rep.delta_k,
        "ratio": rep.ratio,
        "truncated": rep.truncated,
        "n_essential": rep.n_essential,
    }


# ---------------------------------------------------------------------------
# subcommands

def cmd_sample(args) -> int:
    rng = RngStream(args.seed, args.substream)
    if args.fixed:
        if not float(args.n).is_integer():
            raise InvalidInputError("--fixed needs an integer n")
        cloud = sample_fixed(int(args.n), args.d, args.metric, rng)
    else:
        cloud = sample_poisson(args.n, args.d, args.metric, rng)
    write_cloud_csv(cloud, args.out if args.out else sys.stdout)
    return EXIT_OK


def cmd_persist(args) -> int:
    cloud = read_cloud_csv(args.cloud, args.metric)
    flavor = Flavor.parse(args.flavor)
    status = EXIT_OK
    if args.rmax is not None:
        fc = build_filtration(cloud, flavor, args.rmax, args.maxdim)
        diag = (compute_persistence_naive if args.naive else compute_persistence)(fc)
    else:
        n = args.n if args.n is not None else float(len(cloud))
        r = default_rmax(n, cloud.dimension, args.multiplier, cloud.metric)
        ks = [k for k in range(1, args.maxdim) if k <= cloud.dimension - 1]
        fc, diag = _auto_radius(cloud, flavor, r, args.maxdim, ks, args.naive)
        if any(truncation_check(diag, k) for k in ks):
            status = EXIT_TRUNCATED
    if args.filtration_out:
        fc.write_text(args.filtration_out)
    write_diagram_csv(diag, args.out if args.out else sys.stdout)
    if status == EXIT_TRUNCATED:
        print(f"error: truncation persists at r_max={fc.r_max}", file=sys.stderr)
    return status


def _auto_radius(cloud, flavor, r, maxdim, ks, naive):
    """Retry rule for the CLI: double the cap while any degree is truncated."""
    engine = compute_persistence_naive if naive else compute_persistence
    for attempt in range(MAX_RETRIES + 1):
        fc = build_filtration(cloud, flavor, r, maxdim)
        diag = engine(fc)
        if not any(truncation_check(diag, k) for k in ks):
            break
        grown = 2 * r if cloud.metric is Metric.CUBE else min(2 * r, TORUS_RMAX_CAP)
        if grown <= r or attempt == MAX_RETRIES:
            break
        r = grown
    return fc, diag


def cmd_maxpers(args) -> int:
    diag = read_diagram_csv(args.diagram, metric=args.metric, ambient_dim=args.d)
    rep = max_persistence(diag, args.k, n=args.n)
    _emit(_report_dict(rep))
    return EXIT_OK


def cmd_lowerbound(args) -> int:
    offset = tuple(args.offset) if args.offset else None
    spec = LowerBoundSpec(args.d, args.k, args.ell, args.L, offset)
    cloud, m = lower_bound_configuration(spec)
    if args.out:
        write_cloud_csv(cloud, args.out)
    # a cap past the configuration's diameter leaves a single contractible blob
    r = float(np.sqrt(args.d) * spec.hat_L)
    diag = compute_persistence(build_filtration(cloud, Flavor.CECH, r, args.k + 1))
    rep = max_persistence(diag, args.k)
    bound = (args.L / args.ell) / (4 * math.sqrt(args.d))
    out = _report_dict(rep)
    out.update({"m": m, "cells_per_side": spec.cells_per_side, "hat_L": spec.hat_L, "bound": bound,
                "meets_bound": bool(rep.pi_max is not None and rep.pi_max >= bound)})
    _emit(out)
    return EXIT_OK


def _experiment_paths(cfg, args):
    out = args.out or cfg.output_path
    if out is None:
        raise InvalidInputError("no output path: set output_path in the config or pass --out")
    out = Path(out)
    summary = Path(args.summary) if getattr(args, "summary", None) else out.with_name(out.stem + "_summary.csv")
    svg = Path(args.svg) if getattr(args, "svg", None) else out.with_suffix(".svg")
    return out, summary, svg


def cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    if args.workers:
        cfg = replace(cfg, workers=args.workers)
    out, summary_path, svg = _experiment_paths(cfg, args)
    records = run_experiment(cfg, out)
    summ = summarize(records, summary_path, svg)
    _emit({
        "records": str(out), "summary": str(summary_path), "svg": str(svg),
        "rows": len(records), "error_rows": sum(1 for r in records if r.error),
        "fits": {str(k): {"slope": f.slope, "intercept": f.intercept, "residual_rms": f.residual_rms,
                          "n_samples": f.n_samples} for k, f in summ.fits.items()},
    })
    return EXIT_OK


def cmd_fit(args) -> int:
    records = [r for r in read_records(args.records) if r.k == args.k and r.pi_max is not None and not r.error]
    fit = linear_fit([r.delta_k for r in records], [r.pi_max for r in records])
    _emit({"k": args.k, "slope": fit.slope, "intercept": fit.intercept, "residual_rms": fit.residual_rms,
           "n_samples": fit.n_samples})
    return EXIT_OK


def cmd_torus_compare(args) -> int:
    cfg = load_config(args.config)
    out, summary_path, _ = _experiment_paths(cfg, args)
    comp = run_torus_comparison(cfg, out, summary_path)
    _emit({"records": str(out), "summary": str(summary_path), "groups": [
        {"n": g.n, "k": g.k, "trials": g.trials, "mean_cube": g.mean_cube, "std_cube": g.std_cube,
         "mean_torus": g.mean_torus, "std_torus": g.std_torus, "pooled_std": g.pooled_std,
         "overlap": g.overlap, "torus_essential_counts": sorted(set(g.torus_essential_counts))}
        for g in comp.groups]})
    return EXIT_OK


# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    # usage errors are invalid input (exit 1); exit 2 is reserved for I/O failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="maxpers", description="Maximal persistence in random geometric complexes.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="emit a random point cloud as CSV")
    s.add_argument("--n", type=float, required=True, help="Poisson intensity (or exact count with --fixed)")
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--metric", default="cube", choices=["cube", "torus"])
    s.add_argument("--seed", type=lambda x: int(x, 0), default=0, help="root seed")
    s.add_argument("--substream", type=lambda x: int(x, 0), default=0)
    s.add_argument("--fixed", action="store_true", help="exactly n points instead of Poisson(n)")
    s.add_argument("--out", help="output CSV (default stdout)")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("persist", help="cloud CSV to persistence diagram CSV")
    s.add_argument("cloud")
    s.add_argument("--flavor", default="cech", choices=["cech", "rips"])
    s.add_argument("--metric", default="cube", choices=["cube", "torus"])
    s.add_argument("--rmax", type=float, help="radius cap; omitted means automatic with retries")
    s.add_argument("--maxdim", type=int, default=2)
    s.add_argument("--n", type=float, help="intensity for the automatic cap (default: point count)")
    s.add_argument("--multiplier", type=float, default=DEFAULT_MULTIPLIER, help="automatic cap multiplier")
    s.add_argument("--naive", action="store_true", help="use the unoptimised reference reduction")
    s.add_argument("--filtration-out", help="also write the filtration as text")
    s.add_argument("--out", help="output CSV (default stdout)")
    s.set_defaults(func=cmd_persist)

    s = sub.add_parser("maxpers", help="maximal multiplicative persistence of a diagram")
    s.add_argument("diagram")
    s.add_argument("--n", type=float, help="intensity for the scaling term")
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--metric", default="cube", choices=["cube", "torus"])
    s.add_argument("--d", type=int, default=2, help="ambient dimension (torus essential count)")
    s.set_defaults(func=cmd_maxpers)

    s = sub.add_parser("lowerbound", help="deterministic shell configuration and its persistence")
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--ell", type=float, default=0.05)
    s.add_argument("--L", type=float, default=0.4)
    s.add_argument("--offset", type=float, nargs="+")
    s.add_argument("--out", help="also write the cloud CSV")
    s.set_defaults(func=cmd_lowerbound)

    s = sub.add_parser("experiment", help="run a trial grid from a config file")
    s.add_argument("config")
    s.add_argument("--out", help="records CSV (overrides output_path)")
    s.add_argument("--summary", help="summary CSV (default <out>_summary.csv)")
    s.add_argument("--svg", help="plot (default <out>.svg)")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("fit", help="least-squares fit of pi_max against delta_k from a records CSV")
    s.add_argument("records")
    s.add_argument("--k", type=int, default=1)
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("torus-compare", help="same clouds under cube and flat-torus metrics")
    s.add_argument("config")
    s.add_argument("--out", help="paired records CSV (overrides output_path)")
    s.add_argument("--summary", help="per-n comparison CSV (default <out>_summary.csv)")
    s.set_defaults(func=cmd_torus_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        # downstream reader closed early (e.g. piped into head)
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK
    except TruncationExhaustedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRUNCATED
    except (InvalidInputError, MaxPersError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
