"""Memetic algorithms balancing evolution and local search on pseudo-Boolean functions."""

__version__ = "0.1.0"

from .core import BitString, RngStream, derive_seed, hamming, mutate, neighbors
from .engine import (
    InvariantViolation,
    MAConfig,
    Outcome,
    RunRecord,
    copies_of,
    every_tau,
    never,
    run,
    uniform_init,
    with_probability,
)
from .functions import (
    FitnessFunction,
    Label,
    LongPathFn,
    OneMax,
    RaceFn,
    RaceParams,
    SectionedPathFn,
    SectionedPathParams,
    make_function,
)
from .localsearch import (
    FIRST_IMPROVEMENT,
    FIRST_IMPROVEMENT_SHUFFLED,
    RANDOM_IMPROVEMENT,
    STEEPEST_ASCENT,
    PivotRule,
    local_search,
)
from .paths import LongKPath, build_long_k_path, check_path_invariants, path_length
from .stategraph import StateGraph, autocorrelation, build_state_graph, longest_improving_path, sinks

__all__ = [
    "BitString",
    "RngStream",
    "derive_seed",
    "hamming",
    "mutate",
    "neighbors",
    "InvariantViolation",
    "MAConfig",
    "Outcome",
    "RunRecord",
    "copies_of",
    "every_tau",
    "never",
    "run",
    "uniform_init",
    "with_probability",
    "FitnessFunction",
    "Label",
    "LongPathFn",
    "OneMax",
    "RaceFn",
    "RaceParams",
    "SectionedPathFn",
    "SectionedPathParams",
    "make_function",
    "FIRST_IMPROVEMENT",
    "FIRST_IMPROVEMENT_SHUFFLED",
    "RANDOM_IMPROVEMENT",
    "STEEPEST_ASCENT",
    "PivotRule",
    "local_search",
    "LongKPath",
    "build_long_k_path",
    "check_path_invariants",
    "path_length",
    "StateGraph",
    "autocorrelation",
    "build_state_graph",
    "longest_improving_path",
    "sinks",
]
