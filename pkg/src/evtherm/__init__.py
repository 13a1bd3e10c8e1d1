"""Thermodynamic measures of statistical evidence for the binomial model."""

from .carnot import CarnotCycle, audit_cycle, build_cycle, feasible_start, max_cycle_entropy
from .core import (
    DEFAULT_CONSTANTS,
    EvidentialState,
    ModelConstants,
    ObservationPoint,
    Side,
    entropy,
    log_evidence,
    log_volume,
    make_state,
    state_at,
)
from .errors import (
    ConvergenceError,
    DomainError,
    EvidenceError,
    InfeasibleTargetError,
    InfiniteInformationError,
    NoSolutionError,
    SolverError,
    TargetRangeError,
)
from .fisher import FisherComparison, compare_series
from .numerics import QuadratureConfig, log_reg_inc_beta, reg_inc_beta
from .solvers import (
    Branch,
    TransitionPoint,
    isotherm_point,
    solve_state,
    trace_adiabat,
    trace_isotherm,
    transition_point,
)

__all__ = [
    "Branch",
    "CarnotCycle",
    "ConvergenceError",
    "DEFAULT_CONSTANTS",
    "DomainError",
    "EvidenceError",
    "EvidentialState",
    "FisherComparison",
    "InfeasibleTargetError",
    "InfiniteInformationError",
    "ModelConstants",
    "NoSolutionError",
    "ObservationPoint",
    "QuadratureConfig",
    "Side",
    "SolverError",
    "TargetRangeError",
    "TransitionPoint",
    "audit_cycle",
    "build_cycle",
    "compare_series",
    "entropy",
    "feasible_start",
    "isotherm_point",
    "log_evidence",
    "log_reg_inc_beta",
    "log_volume",
    "make_state",
    "max_cycle_entropy",
    "reg_inc_beta",
    "solve_state",
    "state_at",
    "trace_adiabat",
    "trace_isotherm",
    "transition_point",
]
