"""Thresholds, positivity certification, and optimization of check-regular
LDPC degree distributions on the binary erasure channel."""

from .ensemble import (
    CheckRegularEnsemble,
    NodePerspectiveDistribution,
    RegularEnsemble,
    as_check_regular,
    binomial_ensemble,
    design_rate,
    from_node_perspective,
    load_ensemble,
    save_ensemble,
    to_node_perspective,
    validate,
)
from .optimize import (
    DEParams,
    OptimizationResult,
    OptimizationSpec,
    PermittedRegion,
    TrajectoryPoint,
    analytic_optimize,
    de_optimize,
    permitted_region,
    solve_dependent_coefficients,
    trajectory,
)
from .ppositive import (
    PositivityCertificate,
    PPolynomial,
    SignChangeReport,
    build_p_polynomial,
    capacity_gap,
    certify_positivity,
    closed_form_threshold,
    fourier_budan_sign_changes,
    is_necessary_condition_met,
    lambda2_for_capacity,
)
from .simulate import SimRunResult, TannerGraph, peel, sample_graph, waterfall
from .threshold import (
    DeRecursionConfig,
    ThresholdMethod,
    ThresholdReport,
    analytic_threshold,
    de_iterate_converges,
    de_threshold,
    h_function,
    phi_function,
    regular_threshold,
)

__version__ = "0.1.0"

__all__ = [
    "CheckRegularEnsemble",
    "DEParams",
    "DeRecursionConfig",
    "NodePerspectiveDistribution",
    "OptimizationResult",
    "OptimizationSpec",
    "PPolynomial",
    "PermittedRegion",
    "PositivityCertificate",
    "RegularEnsemble",
    "SignChangeReport",
    "SimRunResult",
    "TannerGraph",
    "ThresholdMethod",
    "ThresholdReport",
    "TrajectoryPoint",
    "analytic_optimize",
    "analytic_threshold",
    "as_check_regular",
    "binomial_ensemble",
    "build_p_polynomial",
    "capacity_gap",
    "certify_positivity",
    "closed_form_threshold",
    "de_iterate_converges",
    "de_optimize",
    "de_threshold",
    "design_rate",
    "fourier_budan_sign_changes",
    "from_node_perspective",
    "h_function",
    "is_necessary_condition_met",
    "lambda2_for_capacity",
    "load_ensemble",
    "peel",
    "permitted_region",
    "phi_function",
    "regular_threshold",
    "sample_graph",
    "save_ensemble",
    "solve_dependent_coefficients",
    "to_node_perspective",
    "trajectory",
    "validate",
    "waterfall",
]
