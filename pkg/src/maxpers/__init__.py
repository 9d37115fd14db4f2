"""Maximal multiplicative persistence in random Čech and Vietoris–Rips complexes."""
from ._backend import BACKEND
from .errors import InvalidInputError, MaxPersError, TruncationExhaustedError, UnsupportedConfigurationError
from .experiment import (ExperimentConfig, TrialRecord, load_config, parse_config, read_records,
                         run_experiment, run_torus_comparison, summarize)
from .filtration import FilteredComplex, Flavor, build_cech, build_filtration, build_rips, default_rmax
from .geometry import Ball, Metric, distance, epsilon_net, min_enclosing_ball, neighbor_pairs
from .persistence import (PersistenceDiagram, PersistencePair, compute_persistence, compute_persistence_naive,
                          read_diagram_csv, truncation_check, write_diagram_csv)
from .sampling import (LowerBoundSpec, PointCloud, RngStream, lower_bound_configuration, read_cloud_csv,
                       sample_fixed, sample_poisson, write_cloud_csv)
from .statistics import (FitResult, MaxPersistenceReport, delta_k, histogram, linear_fit, max_persistence,
                         multiplicative_persistence)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Ball", "ExperimentConfig", "FilteredComplex", "FitResult", "Flavor", "InvalidInputError",
    "LowerBoundSpec", "MaxPersError", "MaxPersistenceReport", "Metric", "PersistenceDiagram",
    "PersistencePair", "PointCloud", "RngStream", "TrialRecord", "TruncationExhaustedError",
    "UnsupportedConfigurationError", "build_cech", "build_filtration", "build_rips", "compute_persistence",
    "compute_persistence_naive", "default_rmax", "delta_k", "distance", "epsilon_net", "histogram",
    "linear_fit", "load_config", "lower_bound_configuration", "max_persistence", "min_enclosing_ball",
    "multiplicative_persistence", "neighbor_pairs", "parse_config", "read_cloud_csv", "read_diagram_csv",
    "read_records", "run_experiment", "run_torus_comparison", "sample_fixed", "sample_poisson", "summarize",
    "truncation_check", "write_cloud_csv", "write_diagram_csv",
]
