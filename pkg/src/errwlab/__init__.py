"""Reinforced random walks on cycles: simulation and verification lab."""

from ._meta import PACKAGE_VERSION as __version__
from .cycles import CycleGraph, make_cycle
from .errors import (
    ClockUnderflowError,
    ErrwLabError,
    InsufficientSampleError,
    SchemaError,
    SummabilityError,
    TailTruncationError,
)
from .weights import (
    ExponentialWeight,
    PowerWeight,
    TableWeight,
    WeightFunction,
    weight_from_config,
)
from .walk import (
    BatchWalkResult,
    Trajectory,
    WalkState,
    detect_attraction,
    detect_branching_vertex,
    replica_generator,
    simulate,
    simulate_batch,
)
from .timeline import (
    ClockFamily,
    CouplingReport,
    TimelineRun,
    coupling_check,
    exact_prefix_distribution,
    parity_boundary_sums,
    prescribed_clocks,
    run_timeline,
    sample_clocks,
)
from .circulant import (
    incidence_determinant,
    incidence_matrix,
    transpose_kernel_basis,
)
from .driver import (
    DrivenWalkResult,
    Driver,
    OccupationReport,
    delay_first_departure,
    make_random_driver,
    run_driven_walk,
)
from .martingale import (
    EnumerationReport,
    MartingaleTrace,
    RankCheckReport,
    StoppingRecord,
    enumerate_increment_check,
    balance_trace,
    linear_combination_rank_check,
    stopping_constant,
    stopping_time_scan,
)
from .harness import (
    ComparisonReport,
    ExperimentConfig,
    ExperimentResult,
    compare_parities,
    edge_trap_frequency,
    edge_trap_probability,
    run_experiment,
)
from .config import parse_config, parse_config_pair

__all__ = [
    "__version__",
    "CycleGraph",
    "make_cycle",
    "ErrwLabError",
    "SchemaError",
    "SummabilityError",
    "TailTruncationError",
    "ClockUnderflowError",
    "InsufficientSampleError",
    "WeightFunction",
    "PowerWeight",
    "ExponentialWeight",
    "TableWeight",
    "weight_from_config",
    "WalkState",
    "Trajectory",
    "BatchWalkResult",
    "simulate",
    "simulate_batch",
    "replica_generator",
    "detect_attraction",
    "detect_branching_vertex",
    "ClockFamily",
    "TimelineRun",
    "CouplingReport",
    "sample_clocks",
    "prescribed_clocks",
    "run_timeline",
    "parity_boundary_sums",
    "exact_prefix_distribution",
    "coupling_check",
    "incidence_matrix",
    "incidence_determinant",
    "transpose_kernel_basis",
    "Driver",
    "OccupationReport",
    "DrivenWalkResult",
    "make_random_driver",
    "run_driven_walk",
    "delay_first_departure",
    "MartingaleTrace",
    "EnumerationReport",
    "StoppingRecord",
    "RankCheckReport",
    "balance_trace",
    "enumerate_increment_check",
    "stopping_constant",
    "stopping_time_scan",
    "linear_combination_rank_check",
    "ExperimentConfig",
    "ExperimentResult",
    "ComparisonReport",
    "run_experiment",
    "compare_parities",
    "edge_trap_probability",
    "edge_trap_frequency",
    "parse_config",
    "parse_config_pair",
]
