"""Numerical laboratory for l1-penalized regularization of diagonal operator equations.

The package models ill-posed sequence-space problems with power-law decay,
solves the quadratic-misfit l1-penalized functional exactly (diagonal case)
or iteratively (dense matrices), chooses the regularization parameter by
discrepancy principles, and verifies the convergence-rate machinery: the
concave rate function, the variational inequality behind it, Hölder-rate
predictions, and the distance-function witness that classical source
conditions fail for non-sparse solutions.
"""

from .param_choice import (
    DiscrepancyConfig,
    DiscrepancyInfeasibleError,
    alpha_a_priori,
    alpha_sequential_discrepancy,
    alpha_strong_discrepancy,
)
from .rates import (
    RateFunction,
    Subgradient,
    bregman_distance,
    distance_function,
    distance_report,
    holder_exponent,
    holder_exponent_sum_form,
    minimal_subgradient,
    phi,
    radius_for_level,
)
from .sequence_model import (
    DecaySequence,
    DiagonalOperator,
    GeneralOperator,
    PowerSigma,
    PowerTail,
    RegProblem,
    apply,
    growth_sum,
    synthesize,
    tail_sum,
    tail_table,
    weighted_sup_norm,
)
from .solver import (
    SolveResult,
    optimality_residual,
    solve_diagonal,
    solve_general,
)
from .vi_verify import (
    RateReport,
    ViSample,
    ViSuiteResult,
    check_lemma_sums,
    check_vi,
    lemma_suite,
    load_sample,
    rate_bound_check,
    save_sample,
    vi_suite,
)

__version__ = "0.1.0"

__all__ = [
    "DecaySequence",
    "DiagonalOperator",
    "GeneralOperator",
    "PowerSigma",
    "PowerTail",
    "RegProblem",
    "apply",
    "growth_sum",
    "synthesize",
    "tail_sum",
    "tail_table",
    "weighted_sup_norm",
    "SolveResult",
    "optimality_residual",
    "solve_diagonal",
    "solve_general",
    "DiscrepancyConfig",
    "DiscrepancyInfeasibleError",
    "alpha_a_priori",
    "alpha_sequential_discrepancy",
    "alpha_strong_discrepancy",
    "RateFunction",
    "Subgradient",
    "bregman_distance",
    "distance_function",
    "distance_report",
    "holder_exponent",
    "holder_exponent_sum_form",
    "minimal_subgradient",
    "phi",
    "radius_for_level",
    "RateReport",
    "ViSample",
    "ViSuiteResult",
    "check_lemma_sums",
    "check_vi",
    "lemma_suite",
    "load_sample",
    "rate_bound_check",
    "save_sample",
    "vi_suite",
]
