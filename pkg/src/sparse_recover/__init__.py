"""Sparse signal recovery by soft-thresholding with a geometrically decaying l1 weight."""
from .checks import CheckReport, check_decay, check_offsupport_count, check_support_evolution, check_trace
from .exceptions import BudgetExceeded, InvalidArgument, MissingRipConstants, NumericalFailure
from .harness import ExperimentPlan, SweepResult, run_sweep, run_trial
from .kernels import BACKEND
from .problem import (MeasurementEnsemble, SparseSignal, generate_matrix, generate_signal,
                      make_problem, measure)
from .rip import (RipEstimate, delta_exact, delta_sampled, recovery_constants, theta_exact,
                  theta_sampled)
from .solver import (IterateTrace, RecoveryConfig, approx_gradient, exact_gradient_step,
                     prox_step, recover, soft_threshold, tau_schedule)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BudgetExceeded",
    "CheckReport",
    "ExperimentPlan",
    "InvalidArgument",
    "IterateTrace",
    "MeasurementEnsemble",
    "MissingRipConstants",
    "NumericalFailure",
    "RecoveryConfig",
    "RipEstimate",
    "SparseSignal",
    "SweepResult",
    "approx_gradient",
    "check_decay",
    "check_offsupport_count",
    "check_support_evolution",
    "check_trace",
    "delta_exact",
    "delta_sampled",
    "exact_gradient_step",
    "generate_matrix",
    "generate_signal",
    "make_problem",
    "measure",
    "prox_step",
    "recover",
    "run_sweep",
    "run_trial",
    "soft_threshold",
    "tau_schedule",
    "recovery_constants",
    "theta_exact",
    "theta_sampled",
]
