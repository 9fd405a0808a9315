"""
Photocount histograms and the statistics computed from them.

All statistics are defined on per-trigger fractions f_k, so they do not depend
on the size of the trigger ensemble.
"""

import logging
import math
from typing import Literal

import numpy as np
from scipy.linalg import solve_triangular

from xtalk.histogram.types import DarkCalibration, PhotocountDistribution, RecordSet

logger = logging.getLogger(__name__)

SubtractionMode = Literal["simple", "deconvolve"]
SUBTRACTION_MODES = ("simple", "deconvolve")


class HistogramError(Exception):
    """Exception raised for invalid histogram data."""
    pass


class EmptyRecordsError(HistogramError):
    """Exception raised when a record set holds no triggers."""
    pass


class CountOverflowError(HistogramError):
    """Exception raised when a trigger count exceeds the k_max cap."""
    pass


class UndefinedStatisticError(HistogramError):
    """Exception raised when a statistic is undefined for the distribution."""
    pass


class SaturatedDarkError(HistogramError):
    """Exception raised when a dark distribution has no zero-count triggers."""
    pass


class NoDarkCountsError(HistogramError):
    """Exception raised when a dark distribution holds no dark counts at all."""
    pass


class DegenerateSubtractionError(HistogramError):
    """Exception raised when dark subtraction leaves nothing of the signal."""
    pass


def build_distribution(records: RecordSet) -> PhotocountDistribution:
    """
    Normalize raw trigger counts into per-trigger fractions.

    Args:
        records: Per-trigger photoelectron counts

    Returns:
        PhotocountDistribution with k_max + 1 bins
    """
    hist = np.bincount(records.counts, minlength=records.k_max + 1)
    return distribution_from_counts(hist)


def distribution_from_counts(hist: np.ndarray) -> PhotocountDistribution:
    """
    Build a distribution from integer trigger counts per bin.

    Raises:
        EmptyRecordsError: If the histogram holds no triggers
    """
    hist = np.asarray(hist, dtype=np.int64)
    n_triggers = int(hist.sum())
    if n_triggers < 1:
        raise EmptyRecordsError("Histogram holds no triggers")
    return PhotocountDistribution(f=hist / n_triggers, n_triggers=n_triggers)


def mean_photocounts(dist: PhotocountDistribution) -> float:
    """Mean number of photocounts per trigger, sum of k*f_k."""
    k = np.arange(dist.f.size)
    return float(np.dot(k, dist.f))


def pairwise_coincidence_rate(dist: PhotocountDistribution) -> float:
    """Pairwise coincidences per trigger, sum of C(k,2)*f_k."""
    k = np.arange(dist.f.size)
    return float(np.dot(k * (k - 1) / 2.0, dist.f))


def g2(dist: PhotocountDistribution) -> float:
    """
    Second-order correlation estimated from the photocount distribution.

    Each pixel pair acts as one HBT setup, so
    g2 = 2 * sum C(k,2) f_k / (sum k f_k)^2.

    Raises:
        UndefinedStatisticError: If the distribution has zero mean
    """
    mean = mean_photocounts(dist)
    if mean <= 0:
        raise UndefinedStatisticError("g2 is undefined for a distribution with zero mean")
    return 2.0 * pairwise_coincidence_rate(dist) / mean ** 2


def dark_mean(dark: PhotocountDistribution) -> float:
    """
    Mean dark counts per trigger under the crosstalk-free Poisson assumption.

    Raises:
        SaturatedDarkError: If no trigger recorded zero counts
    """
    f0 = float(dark.f[0])
    if f0 <= 0:
        raise SaturatedDarkError("Dark distribution has no zero-count triggers")
    return -math.log(f0)


def dark_crosstalk_probability(dark: PhotocountDistribution) -> DarkCalibration:
    """
    Estimate crosstalk from the deficit of single-count dark events.

    p_dc = 1 - f_1 / (<N> exp(-<N>)) with <N> = -ln f_0. The standard error is
    propagated from the multinomial variances of f_0 and f_1 including their
    covariance. Negative estimates are reported as they are.

    Args:
        dark: Dark-noise photocount distribution

    Returns:
        DarkCalibration

    Raises:
        SaturatedDarkError: If f_0 = 0
        NoDarkCountsError: If f_0 = 1, i.e. there are no dark counts
    """
    mean = dark_mean(dark)
    if mean == 0:
        raise NoDarkCountsError("Dark distribution holds no dark counts; p_dc is undefined")

    f0 = float(dark.f[0])
    f1 = float(dark.f[1]) if dark.f.size > 1 else 0.0
    n = dark.n_triggers
    # exp(-<N>) is f0 itself
    denom = mean * f0
    p_dc = 1.0 - f1 / denom

    d_f1 = -1.0 / denom
    d_f0 = f1 * (mean - 1.0) / denom ** 2
    var_f0 = f0 * (1.0 - f0) / n
    var_f1 = f1 * (1.0 - f1) / n
    cov = -f0 * f1 / n
    variance = d_f0 ** 2 * var_f0 + d_f1 ** 2 * var_f1 + 2.0 * d_f0 * d_f1 * cov
    stderr = math.sqrt(max(variance, 0.0))

    logger.debug(f"Dark calibration: <N>={mean:.6g}, p_dc={p_dc:.6g} +/- {stderr:.3g} ({n} triggers)")
    return DarkCalibration(mean_dark=mean, p_dc=p_dc, p_dc_stderr=stderr, n_triggers=n)


def convolve(a: PhotocountDistribution, b: PhotocountDistribution) -> PhotocountDistribution:
    """Distribution of the sum of independent counts, truncated to the longer support."""
    size = max(a.f.size, b.f.size)
    f = np.convolve(a.f, b.f)[:size]
    return PhotocountDistribution(f=f, n_triggers=min(a.n_triggers, b.n_triggers))


def subtract_dark(
    signal: PhotocountDistribution,
    dark: PhotocountDistribution,
    mode: SubtractionMode = "deconvolve",
) -> PhotocountDistribution:
    """
    Remove the dark-noise contribution from a measured distribution.

    Mode "deconvolve" solves measured = clean * dark (a lower-triangular
    Toeplitz system) for the clean distribution. Mode "simple" subtracts the
    dark excess over the zero bin bin by bin. Both clamp negative bins to zero,
    renormalize, and record the clamped mass on the result.

    Args:
        signal: Distribution measured with light
        dark: Distribution measured with the light blocked
        mode: "deconvolve" or "simple"

    Returns:
        The dark-subtracted, renormalized distribution

    Raises:
        DegenerateSubtractionError: If the dark is heavier than the signal or
            nothing survives the subtraction
    """
    if mode not in SUBTRACTION_MODES:
        raise HistogramError(f"Unknown subtraction mode: {mode}")
    if mean_photocounts(dark) > mean_photocounts(signal):
        raise DegenerateSubtractionError(
            "Dark distribution is heavier than the signal "
            f"({mean_photocounts(dark):.6g} > {mean_photocounts(signal):.6g} counts/trigger)"
        )

    size = signal.f.size
    measured = signal.f
    d = dark.padded(size)[:size]

    if mode == "deconvolve":
        if d[0] <= 0:
            raise DegenerateSubtractionError("Dark distribution has an empty zero bin")
        # Row i holds d[i-j] for j <= i
        idx = np.subtract.outer(np.arange(size), np.arange(size))
        toeplitz = np.where(idx >= 0, d[np.clip(idx, 0, None)], 0.0)
        clean = solve_triangular(toeplitz, measured, lower=True)
    else:
        clean = measured - d
        clean[0] += 1.0

    negative = clean < 0
    clamped = float(-clean[negative].sum())
    clean[negative] = 0.0
    total = clean.sum()
    if total <= 0:
        raise DegenerateSubtractionError("Nothing of the signal survives dark subtraction")
    if clamped > 0:
        logger.warning(f"Dark subtraction ({mode}) clamped {clamped:.3g} of negative probability mass")

    return PhotocountDistribution(
        f=clean / total,
        n_triggers=signal.n_triggers,
        renormalized=True,
        clamped_mass=clamped,
    )
