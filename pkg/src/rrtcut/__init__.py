"""Cutting down random recursive trees.

Simulation and exact reference tooling for vertex- and edge-cutting
processes on uniform random recursive trees: degree-targeted attack,
uniform edge cutting and its record-count equivalent, degree-tail
statistics, and coupled conditioned trees, plus a deterministic CLI runner.
"""

from .coupling import (
    REJECTION_ATTEMPT_BUDGET,
    ConditionedDraw,
    CoupledSample,
    RejectionBudgetError,
    TailRatioDiagnostic,
    build_coupled_pair,
    coupling_diagnostics,
    degree_window,
    sample_conditioned_bernoulli,
)
from .cutting import (
    CutPolicy,
    CutResult,
    record_count,
    targeted_cut,
    uniform_edge_cut,
    y_statistic,
)
from .stats import (
    GAMMA,
    GammaTrendPoint,
    MomentEstimate,
    TvEstimate,
    bernstein_window_bound,
    estimate_tail_moments,
    estimate_tv_to_poisson,
    falling_factorial,
    gamma_trend,
    half_l1_distance,
    root_degree_distribution_exact,
    window_miss_probability,
)
from .trees import (
    RecursiveTree,
    RngStream,
    TailCounts,
    as_generator,
    degree_tail,
    enumerate_increasing_trees,
    generate_rrt,
    root_subtree_after_removal,
    sample_degree_array,
    tail_from_degrees,
)

__version__ = "0.1.0"

__all__ = [
    "CutPolicy",
    "CutResult",
    "ConditionedDraw",
    "CoupledSample",
    "GAMMA",
    "GammaTrendPoint",
    "MomentEstimate",
    "REJECTION_ATTEMPT_BUDGET",
    "RecursiveTree",
    "RejectionBudgetError",
    "RngStream",
    "TailCounts",
    "TailRatioDiagnostic",
    "TvEstimate",
    "as_generator",
    "bernstein_window_bound",
    "build_coupled_pair",
    "coupling_diagnostics",
    "degree_tail",
    "degree_window",
    "enumerate_increasing_trees",
    "estimate_tail_moments",
    "estimate_tv_to_poisson",
    "falling_factorial",
    "gamma_trend",
    "generate_rrt",
    "half_l1_distance",
    "record_count",
    "root_degree_distribution_exact",
    "root_subtree_after_removal",
    "sample_conditioned_bernoulli",
    "sample_degree_array",
    "tail_from_degrees",
    "targeted_cut",
    "uniform_edge_cut",
    "window_miss_probability",
    "y_statistic",
]
