"""
Histogram module for photocount distributions and their statistics.
"""

from .core import (
    SUBTRACTION_MODES,
    CountOverflowError,
    DegenerateSubtractionError,
    EmptyRecordsError,
    HistogramError,
    NoDarkCountsError,
    SaturatedDarkError,
    UndefinedStatisticError,
    build_distribution,
    convolve,
    dark_crosstalk_probability,
    dark_mean,
    distribution_from_counts,
    g2,
    mean_photocounts,
    pairwise_coincidence_rate,
    subtract_dark,
)
from .files import HistogramFile, HistogramFileError, RecordFile, load_distribution
from .types import DarkCalibration, PhotocountDistribution, RecordSet

__all__ = [
    "SUBTRACTION_MODES",
    "CountOverflowError",
    "DegenerateSubtractionError",
    "EmptyRecordsError",
    "HistogramError",
    "NoDarkCountsError",
    "SaturatedDarkError",
    "UndefinedStatisticError",
    "build_distribution",
    "convolve",
    "dark_crosstalk_probability",
    "dark_mean",
    "distribution_from_counts",
    "g2",
    "mean_photocounts",
    "pairwise_coincidence_rate",
    "subtract_dark",
    "HistogramFile",
    "HistogramFileError",
    "RecordFile",
    "load_distribution",
    "DarkCalibration",
    "PhotocountDistribution",
    "RecordSet",
]
