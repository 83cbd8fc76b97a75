"""Simulation and analysis toolkit for the (1+1) EA on LeadingOnes under prior noise."""
from .bitcore import (
    BitString,
    ConfigurationError,
    MutationKind,
    MutationOp,
    NoiseKind,
    NoiseModel,
    apply_noise,
    leading_ones,
    mutate,
    noisy_fitness,
)
from .ea import EvaluationPolicy, SearchState, TrialResult, run_trial, run_trials
from .rng import RngStream, derive_seed

__version__ = "0.1.0"

__all__ = [
    "BitString",
    "ConfigurationError",
    "EvaluationPolicy",
    "MutationKind",
    "MutationOp",
    "NoiseKind",
    "NoiseModel",
    "RngStream",
    "SearchState",
    "TrialResult",
    "apply_noise",
    "derive_seed",
    "leading_ones",
    "mutate",
    "noisy_fitness",
    "run_trial",
    "run_trials",
]
