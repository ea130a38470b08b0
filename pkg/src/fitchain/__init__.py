"""Fruit-inosculated-tree (FIT) Markov chains.

Build chains whose distance to stationarity follows a prescribed cutoff
profile, and compute their mixing curves exactly in discrete and continuous
time.
"""

__version__ = "0.1.0"

from .errors import FitChainError, ValidationError
from .fit_core import (
    FitParams,
    State,
    StateSpace,
    TransitionMatrix,
    build_transition_matrix,
    enumerate_states,
    four_branch_params,
    parse_state,
    validate_params,
)
from .mixing import (
    FitChain,
    HittingDistribution,
    MixingCurve,
    WorstStartMode,
    distance_curve,
    hitting_distribution,
    propagate,
    return_time_mean,
    stationary,
    tv_distance,
)
from .profiles import (
    ProfileSpec,
    StepProfile,
    build_profile_chain,
    fgF_from_params,
    params_from_step,
    profile_stats,
    window_step_function,
)
from .poissonize import ct_distance, ct_profile_eval, poisson_weights
from .gallery import (
    dense_family,
    interleave,
    nested_windows_params,
    uncountable_windows_params,
    verify_report,
)
from .oracle import exact_curve, exact_tv_by_subsets

__all__ = [
    "FitChainError",
    "ValidationError",
    "FitParams",
    "State",
    "StateSpace",
    "TransitionMatrix",
    "build_transition_matrix",
    "enumerate_states",
    "four_branch_params",
    "parse_state",
    "validate_params",
    "FitChain",
    "HittingDistribution",
    "MixingCurve",
    "WorstStartMode",
    "distance_curve",
    "hitting_distribution",
    "propagate",
    "return_time_mean",
    "stationary",
    "tv_distance",
    "ProfileSpec",
    "StepProfile",
    "build_profile_chain",
    "fgF_from_params",
    "params_from_step",
    "profile_stats",
    "window_step_function",
    "ct_distance",
    "ct_profile_eval",
    "poisson_weights",
    "dense_family",
    "interleave",
    "nested_windows_params",
    "uncountable_windows_params",
    "verify_report",
    "exact_curve",
    "exact_tv_by_subsets",
]
