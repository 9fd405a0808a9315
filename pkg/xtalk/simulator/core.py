"""
Monte Carlo generator of per-trigger photocounts for a pixelated detector.

Triggers are simulated in fixed blocks. Each block draws from its own
counter-based stream, so a run is bit-identical however many workers process
it, and any single trigger can be reproduced from (seed, trigger index).
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from xtalk.config import Config
from xtalk.histogram.types import RecordSet
from xtalk.simulator.rng import SIMULATION_STREAM, block_generator, derive_seed
from xtalk.simulator.types import CASCADE_MODES, CascadeMode, RunConfig

logger = logging.getLogger(__name__)

TRIGGERS_PER_BLOCK = 65536
# Maximum avalanches in one geometric chain, primary included
CHAIN_CAP = 16
_RANGE_TOLERANCE = 1e-12


class SimulationError(Exception):
    """Exception raised for simulator errors."""
    pass


class CascadeRangeError(SimulationError):
    """Exception raised when truncated crosstalk branch probabilities exceed one."""
    pass


@dataclass(frozen=True)
class SimulationOutcome:
    """Records of a run plus how many triggers needed saturated crosstalk branches."""
    records: RecordSet
    saturated_triggers: int


def cascade_batch(
    primaries: np.ndarray,
    p: float,
    mode: CascadeMode,
    rng: np.random.Generator,
    saturate: bool = False,
) -> Tuple[np.ndarray, int]:
    """
    Add crosstalk avalanches to an array of primary avalanche counts.

    In "paper-truncated" mode a trigger with n primaries gains one avalanche
    with probability n p and two with probability n p^2 (exclusive branches).
    In "geometric-cascade" mode every primary starts a chain in which each
    avalanche fires one more with probability p, up to CHAIN_CAP avalanches.

    Args:
        primaries: Primary avalanches per trigger
        p: Crosstalk probability
        mode: Cascade mode
        rng: Random generator
        saturate: Scale branch probabilities down to one instead of raising

    Returns:
        Tuple of (total avalanches per trigger, number of saturated triggers)

    Raises:
        CascadeRangeError: If n p + n p^2 > 1 for some trigger and saturate is False
    """
    if mode not in CASCADE_MODES:
        raise SimulationError(f"Unknown cascade mode: {mode}")
    primaries = np.asarray(primaries, dtype=np.int64)
    size = primaries.size

    if mode == "paper-truncated":
        single = primaries * p
        double = primaries * (p * p)
        reach = single + double
        over = reach > 1.0 + _RANGE_TOLERANCE
        n_over = int(over.sum())
        if n_over:
            if not saturate:
                worst = int(primaries[over].max())
                raise CascadeRangeError(
                    f"Truncated crosstalk needs n*p + n*p^2 <= 1, got {reach[over].max():.4g} "
                    f"for n={worst}, p={p}"
                )
            scale = np.where(over, 1.0 / np.where(over, reach, 1.0), 1.0)
            single = single * scale
            double = double * scale
        u = rng.random(size)
        added = np.where(u < single, 1, np.where(u < single + double, 2, 0))
        return primaries + added, n_over

    chains = int(primaries.sum())
    if chains == 0 or p == 0:
        return primaries.copy(), 0
    secondaries = rng.geometric(1.0 - p, size=chains) - 1
    np.minimum(secondaries, CHAIN_CAP - 1, out=secondaries)
    owner = np.repeat(np.arange(size), primaries)
    added = np.bincount(owner, weights=secondaries, minlength=size).astype(np.int64)
    return primaries + added, 0


def crosstalk_cascade(
    n_primary: int,
    p: float,
    mode: CascadeMode,
    rng: np.random.Generator,
) -> int:
    """
    Total avalanches after crosstalk for a single trigger.

    Raises:
        CascadeRangeError: In paper-truncated mode if n p + n p^2 > 1
    """
    if n_primary < 0:
        raise SimulationError(f"Primary count must be non-negative, got {n_primary}")
    totals, _ = cascade_batch(np.array([n_primary]), p, mode, rng, saturate=False)
    return int(totals[0])


def _distinct_pixels(hits: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    """Number of distinct pixels fired when each hit lands on a uniformly random pixel."""
    primaries = hits.copy()
    multi = np.flatnonzero(hits > 1)
    if multi.size == 0:
        return primaries
    if m == 1:
        primaries[multi] = 1
        return primaries
    owner = np.repeat(np.arange(multi.size, dtype=np.int64), hits[multi])
    pixels = rng.integers(0, m, size=owner.size)
    occupied = np.unique(owner * m + pixels)
    primaries[multi] = np.bincount(occupied // m, minlength=multi.size)
    return primaries


def _simulate_block(run: RunConfig, block: int) -> Tuple[np.ndarray, int]:
    """All TRIGGERS_PER_BLOCK triggers of one block, independent of n_triggers."""
    rng = block_generator(run.seed, SIMULATION_STREAM, block)
    detector, source = run.detector, run.source
    size = TRIGGERS_PER_BLOCK

    if source.statistics == "coherent":
        photons = rng.poisson(source.mean_photons, size)
    elif source.mean_photons > 0:
        # Bose-Einstein photon numbers: geometric on {0, 1, ...}
        photons = rng.geometric(1.0 / (1.0 + source.mean_photons), size) - 1
    else:
        photons = np.zeros(size, dtype=np.int64)

    detected = rng.binomial(photons, detector.eta)
    dark = rng.poisson(detector.dark_rate, size)
    primaries = _distinct_pixels((detected + dark).astype(np.int64), detector.m, rng)
    totals, saturated = cascade_batch(
        primaries, detector.p, detector.cascade_mode, rng, saturate=True
    )
    np.minimum(totals, detector.m, out=totals)
    return totals, saturated


def simulate_trigger(run: RunConfig, trigger_index: int) -> int:
    """
    Photocount of a single trigger, identical to that trigger in simulate_run.

    Args:
        run: Run configuration
        trigger_index: Index of the trigger, 0 <= index < n_triggers
    """
    if not 0 <= trigger_index < run.n_triggers:
        raise SimulationError(f"Trigger index {trigger_index} outside run of {run.n_triggers}")
    block, offset = divmod(trigger_index, TRIGGERS_PER_BLOCK)
    totals, _ = _simulate_block(run, block)
    return int(totals[offset])


def simulate_run_with_stats(
    run: RunConfig,
    workers: Optional[int] = None,
    k_max: Optional[int] = None,
) -> SimulationOutcome:
    """
    Simulate every trigger of a run.

    Args:
        run: Run configuration
        workers: Threads to spread blocks over; defaults from configuration
        k_max: Cap for the resulting RecordSet; None uses the configured default

    Returns:
        SimulationOutcome with the records and the saturated-trigger count
    """
    workers = workers or Config.get_simulation_settings()["workers"]
    n_blocks = -(-run.n_triggers // TRIGGERS_PER_BLOCK)
    logger.debug(
        f"Simulating {run.n_triggers} triggers in {n_blocks} blocks "
        f"(mean photons {run.source.mean_photons}, seed {run.seed}, workers {workers})"
    )

    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(lambda b: _simulate_block(run, b), range(n_blocks)))
    else:
        blocks = [_simulate_block(run, b) for b in range(n_blocks)]

    counts = np.concatenate([totals for totals, _ in blocks])[: run.n_triggers]
    # Saturation is counted over whole blocks, including triggers beyond n_triggers
    saturated = sum(n for _, n in blocks)
    if saturated:
        logger.warning(
            f"{saturated} simulated triggers exceeded n*p + n*p^2 = 1 and were saturated "
            f"(p={run.detector.p}, mean photons {run.source.mean_photons})"
        )
    return SimulationOutcome(records=RecordSet(counts=counts, k_max=k_max), saturated_triggers=saturated)


def simulate_run(run: RunConfig, workers: Optional[int] = None) -> RecordSet:
    """Simulate every trigger of a run and return the records."""
    return simulate_run_with_stats(run, workers=workers).records


def sweep_runs(base: RunConfig, means: Sequence[float]) -> List[RunConfig]:
    """
    One run per intensity, each with a seed derived from (base.seed, index).

    Raises:
        SimulationError: If the list is empty or a mean is negative
    """
    if len(means) == 0:
        raise SimulationError("Intensity sweep needs at least one mean photon number")
    runs = []
    for index, mean in enumerate(means):
        if not mean >= 0:
            raise SimulationError(f"Mean photon number must be non-negative, got {mean}")
        runs.append(base.with_source(float(mean), derive_seed(base.seed, index)))
    return runs


def sweep_intensities(
    base: RunConfig,
    means: Sequence[float],
    workers: Optional[int] = None,
) -> List[Tuple[float, RecordSet]]:
    """
    Simulate the same detector at a series of light intensities.

    Returns:
        List of (mean_photons, RecordSet) in the order of ``means``
    """
    return [
        (run.source.mean_photons, simulate_run(run, workers=workers))
        for run in sweep_runs(base, means)
    ]
