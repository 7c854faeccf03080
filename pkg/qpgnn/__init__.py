from .exceptions import (
    ConfigurationError,
    CounterexampleFailure,
    DimensionMismatchError,
    EnumerationLimitError,
    InstanceError,
    InstanceParseError,
    IterationLimitError,
    QPError,
    SchemaVersionError,
    SearchIncomplete,
    SolverError,
    TrainingDivergedError,
)
from .instance import LCQPInstance, MILCQPInstance, Sense, ValidationReport, validate
from .load_instance import dumps, loads, read_instance, write_instance
from .graph import QPGraph, VertexPermutation, encode, encode_lcqp, encode_milcqp, permute
from .options import ExperimentSpec, GenConfig, GNNConfig, RefineOptions, Schedule, SolverOptions
from .refinement import WLVariant, refine, stable_partition, wl_equivalent, wl_equivalent_W
from .tractability import TractabilityReport, classify
from .solvers import SolveResult, Status, TargetLabels, brute_force_milcqp, evaluate_targets, solve_lcqp, solve_milcqp
from .utils import logger

__version__: str = "0.1.0"

__all__ = (
    "ConfigurationError",
    "CounterexampleFailure",
    "DimensionMismatchError",
    "EnumerationLimitError",
    "InstanceError",
    "InstanceParseError",
    "IterationLimitError",
    "QPError",
    "SchemaVersionError",
    "SearchIncomplete",
    "SolverError",
    "TrainingDivergedError",
    "LCQPInstance",
    "MILCQPInstance",
    "Sense",
    "ValidationReport",
    "validate",
    "dumps",
    "loads",
    "read_instance",
    "write_instance",
    "QPGraph",
    "VertexPermutation",
    "encode",
    "encode_lcqp",
    "encode_milcqp",
    "permute",
    "ExperimentSpec",
    "GenConfig",
    "GNNConfig",
    "RefineOptions",
    "Schedule",
    "SolverOptions",
    "WLVariant",
    "refine",
    "stable_partition",
    "wl_equivalent",
    "wl_equivalent_W",
    "TractabilityReport",
    "classify",
    "SolveResult",
    "Status",
    "TargetLabels",
    "brute_force_milcqp",
    "evaluate_targets",
    "solve_lcqp",
    "solve_milcqp",
    "logger",
)
