"""
Simulator module for pixelated photon counters with dark counts and crosstalk.
"""

from .core import (
    CHAIN_CAP,
    TRIGGERS_PER_BLOCK,
    CascadeRangeError,
    SimulationError,
    SimulationOutcome,
    cascade_batch,
    crosstalk_cascade,
    simulate_run,
    simulate_run_with_stats,
    simulate_trigger,
    sweep_intensities,
    sweep_runs,
)
from .rng import (
    BOOTSTRAP_STREAM,
    DARK_FAMILY,
    POINT_FAMILY,
    SIMULATION_STREAM,
    SWEEP_FAMILY,
    block_generator,
    derive_seed,
)
from .types import CASCADE_MODES, SOURCE_STATISTICS, DetectorConfig, RunConfig, SourceConfig

__all__ = [
    "CHAIN_CAP",
    "TRIGGERS_PER_BLOCK",
    "CascadeRangeError",
    "SimulationError",
    "SimulationOutcome",
    "cascade_batch",
    "crosstalk_cascade",
    "simulate_run",
    "simulate_run_with_stats",
    "simulate_trigger",
    "sweep_intensities",
    "sweep_runs",
    "BOOTSTRAP_STREAM",
    "DARK_FAMILY",
    "POINT_FAMILY",
    "SWEEP_FAMILY",
    "SIMULATION_STREAM",
    "block_generator",
    "derive_seed",
    "CASCADE_MODES",
    "SOURCE_STATISTICS",
    "DetectorConfig",
    "RunConfig",
    "SourceConfig",
]
