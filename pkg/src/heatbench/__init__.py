"""Shared-memory parallel 1D heat equation solver with queue-based ghost exchange,
a throughput benchmark harness and performance-vs-effort analysis tools."""

from .analysis import (
    ClassificationPoint,
    CocomoEstimate,
    DegenerateFit,
    FitResult,
    classify,
    cocomo,
    count_loc,
    fit_scaling,
    t_average,
)
from .bench import BenchRecord, read_csv, sweep, timed_run, write_csv
from .core import (
    ConfigError,
    Field,
    Partition,
    PartitionError,
    SolverConfig,
    init_field,
    make_partition,
    solve,
    stencil_update,
    sweep_sequential,
    total_heat,
)
from .exchange import Disconnected, GhostMessage, ProtocolError, channel_create, run_queues

__version__ = "0.1.0"
