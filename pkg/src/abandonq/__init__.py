"""Optimal service-rate control for single-server Markovian queues with
customer abandonment, under discounted and long-run-average criteria and
both payment-at-arrival and payment-at-completion conventions."""

from .evaluate import (
    Evaluation,
    difference_views,
    evaluate_average,
    evaluate_discounted,
    evaluate_policy,
    stationary_distribution,
)
from .hull import LowerEnvelope, best_action, lower_envelope, prune, slope_cap
from .model import (
    IDLE,
    ActionSet,
    Criterion,
    ModelParams,
    Payment,
    Policy,
    reward_rate,
    transition_rates,
    validate,
    with_idle,
)
from .sim import SimEstimate, simulate
from .solver import (
    Diagnostics,
    OracleResult,
    SolveReport,
    SolverError,
    diagnose,
    policy_iteration,
    solve_finite,
    solve_infinite,
    tail_limit,
    value_iteration_oracle,
)
from .structure import (
    BoundCheck,
    ConcavityCheck,
    MonotoneCheck,
    UnimodalCheck,
    VersionOrdering,
    check_bounds,
    check_concavity,
    check_monotone,
    check_unimodal,
    compare_versions,
    trusted_upto,
)
from .transforms import (
    completion_to_arrival,
    completion_to_arrival_average,
    in_service_shift,
)

__version__ = "0.1.0"

__all__ = [
    "IDLE",
    "ActionSet",
    "BoundCheck",
    "ConcavityCheck",
    "Criterion",
    "Diagnostics",
    "Evaluation",
    "LowerEnvelope",
    "ModelParams",
    "MonotoneCheck",
    "OracleResult",
    "Payment",
    "Policy",
    "SimEstimate",
    "SolveReport",
    "SolverError",
    "UnimodalCheck",
    "VersionOrdering",
    "best_action",
    "check_bounds",
    "check_concavity",
    "check_monotone",
    "check_unimodal",
    "compare_versions",
    "completion_to_arrival",
    "completion_to_arrival_average",
    "diagnose",
    "difference_views",
    "evaluate_average",
    "evaluate_discounted",
    "evaluate_policy",
    "in_service_shift",
    "lower_envelope",
    "policy_iteration",
    "prune",
    "reward_rate",
    "simulate",
    "slope_cap",
    "solve_finite",
    "solve_infinite",
    "stationary_distribution",
    "tail_limit",
    "transition_rates",
    "trusted_upto",
    "validate",
    "value_iteration_oracle",
    "with_idle",
]
