"""
Fitting module: bootstrap g2 points, the crosstalk fit and the method comparison.
"""

from .compare import compare_methods, compare_values
from .estimate import estimate_g2_point
from .levmar import chi_square, chi_square_gradient, fit_crosstalk, weighted_cod
from .types import (
    ComparisonReport,
    ConvergenceError,
    DegeneratePointError,
    FitError,
    FitResult,
    G2Point,
    TooFewPointsError,
)

__all__ = [
    "compare_methods",
    "compare_values",
    "estimate_g2_point",
    "chi_square",
    "chi_square_gradient",
    "fit_crosstalk",
    "weighted_cod",
    "ComparisonReport",
    "ConvergenceError",
    "DegeneratePointError",
    "FitError",
    "FitResult",
    "G2Point",
    "TooFewPointsError",
]
