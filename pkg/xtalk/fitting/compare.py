"""
Comparison of the g2-method aggregate with the dark-count crosstalk estimate.
"""

import logging
import math
from typing import Optional

from xtalk.fitting.types import ComparisonReport, FitResult
from xtalk.histogram.types import DarkCalibration
from xtalk.model.crosstalk import ModelError, solve_p_from_aggregate

logger = logging.getLogger(__name__)

CONSISTENCY_SIGMA = 2.0


def compare_values(
    aggregate: float,
    aggregate_stderr: float,
    p_dc: float,
    p_dc_stderr: float,
    order: int = 2,
) -> ComparisonReport:
    """
    Compare two crosstalk aggregates with their 1-sigma errors.

    The methods are consistent when they differ by at most two combined sigma.

    Examples:
        >>> compare_values(0.21, 0.005, 0.23, 0.03).consistent
        True
    """
    difference = aggregate - p_dc
    combined = math.hypot(aggregate_stderr, p_dc_stderr)
    if combined > 0:
        n_sigma = abs(difference) / combined
    else:
        n_sigma = 0.0 if difference == 0 else math.inf

    p_from_dark: Optional[float] = None
    if p_dc >= 0:
        try:
            p_from_dark = solve_p_from_aggregate(p_dc, order).p
        except ModelError:
            logger.debug(f"p_dc={p_dc} has no per-pixel p below the model bound")

    consistent = n_sigma <= CONSISTENCY_SIGMA
    logger.debug(
        f"Aggregate {aggregate:.4g}+/-{aggregate_stderr:.2g} vs p_dc {p_dc:.4g}+/-{p_dc_stderr:.2g}: "
        f"{n_sigma:.3g} sigma"
    )
    return ComparisonReport(
        aggregate=aggregate,
        aggregate_stderr=aggregate_stderr,
        p_dc=p_dc,
        p_dc_stderr=p_dc_stderr,
        difference=difference,
        combined_sigma=combined,
        n_sigma=n_sigma,
        consistent=consistent,
        p_from_dark=p_from_dark,
    )


def compare_methods(g2_fit: FitResult, dark_cal: DarkCalibration) -> ComparisonReport:
    """Compare a fit with a dark calibration, using the fit error that includes g0."""
    return compare_values(
        g2_fit.aggregate,
        g2_fit.aggregate_stderr_total,
        dark_cal.p_dc,
        dark_cal.p_dc_stderr,
        order=g2_fit.order,
    )
