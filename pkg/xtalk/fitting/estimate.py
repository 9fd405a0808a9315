"""
Bootstrap estimation of g2 points.

Resampling triggers with replacement is drawn as a multinomial over the
histogram bins, which is the same distribution and independent of the trigger
count. Resample r uses its own counter-based stream so the estimate depends
only on (data, seed, number of resamples).
"""

import logging
from typing import Optional, Union

import numpy as np

from xtalk.config import Config
from xtalk.histogram.core import (
    HistogramError,
    SubtractionMode,
    UndefinedStatisticError,
    build_distribution,
    distribution_from_counts,
    g2,
    mean_photocounts,
    subtract_dark,
)
from xtalk.histogram.types import PhotocountDistribution, RecordSet
from xtalk.fitting.types import DegeneratePointError, FitError, G2Point
from xtalk.simulator.rng import BOOTSTRAP_STREAM, block_generator

logger = logging.getLogger(__name__)

MIN_BOOTSTRAP_RESAMPLES = 50


def _as_distribution(data: Union[RecordSet, PhotocountDistribution]) -> PhotocountDistribution:
    if isinstance(data, RecordSet):
        return build_distribution(data)
    return data


def _resample(dist: PhotocountDistribution, rng: np.random.Generator) -> PhotocountDistribution:
    return distribution_from_counts(rng.multinomial(dist.n_triggers, dist.f / dist.total))


def _point_statistics(
    signal: PhotocountDistribution,
    dark: Optional[PhotocountDistribution],
    mode: SubtractionMode,
):
    clean = subtract_dark(signal, dark, mode) if dark is not None else signal
    return mean_photocounts(clean), g2(clean)


def estimate_g2_point(
    records: Union[RecordSet, PhotocountDistribution],
    dark: Optional[PhotocountDistribution] = None,
    bootstrap_b: Optional[int] = None,
    seed: int = 0,
    subtract_mode: SubtractionMode = "deconvolve",
) -> G2Point:
    """
    Estimate g2 and its bootstrap standard error at one intensity.

    Args:
        records: Signal records (or an already built distribution)
        dark: Dark distribution to subtract, if any; it is resampled too
        bootstrap_b: Number of resamples; None uses the configured default
        seed: Seed of the bootstrap streams
        subtract_mode: Dark-subtraction mode

    Returns:
        G2Point; a point whose resamples all agree has sigma = 0 and is
        rejected by the fit

    Raises:
        FitError: If fewer than 50 resamples are requested
        DegeneratePointError: If the (dark-subtracted) mean photocount is zero
    """
    resamples = bootstrap_b if bootstrap_b is not None else Config.get_bootstrap_settings()["resamples"]
    if resamples < MIN_BOOTSTRAP_RESAMPLES:
        raise FitError(f"Bootstrap needs at least {MIN_BOOTSTRAP_RESAMPLES} resamples, got {resamples}")

    signal = _as_distribution(records)
    try:
        mu_ct, value = _point_statistics(signal, dark, subtract_mode)
    except UndefinedStatisticError as e:
        raise DegeneratePointError(f"Cannot estimate g2: {str(e)}") from e

    samples = np.full(resamples, np.nan)
    for r in range(resamples):
        rng = block_generator(seed, BOOTSTRAP_STREAM, r)
        signal_r = _resample(signal, rng)
        dark_r = _resample(dark, rng) if dark is not None else None
        try:
            samples[r] = _point_statistics(signal_r, dark_r, subtract_mode)[1]
        except HistogramError as e:
            logger.debug(f"Bootstrap resample {r} is degenerate: {str(e)}")

    valid = samples[np.isfinite(samples)]
    sigma = float(np.std(valid, ddof=1)) if valid.size > 1 else 0.0
    if valid.size < resamples:
        logger.info(f"{resamples - valid.size} of {resamples} bootstrap resamples were degenerate")
    if sigma == 0:
        logger.warning(f"g2 point at mu_ct={mu_ct:.4g} has zero bootstrap spread and will be rejected")

    logger.debug(f"g2 point: mu_ct={mu_ct:.6g}, g2={value:.6g} +/- {sigma:.3g} ({resamples} resamples)")
    return G2Point(mu_ct=mu_ct, g2=value, sigma=sigma)
