"""
Crosstalk model module: histogram transform, closed-form aggregates and the
g2 calibration curve.
"""

from .crosstalk import (
    P_UPPER_BOUND,
    CrosstalkParam,
    InvalidCrosstalkError,
    ModelCurveInput,
    ModelError,
    ModelOutOfRangeError,
    ValidityReport,
    aggregate_from_p,
    aggregate_totals,
    apply_crosstalk,
    model_curve,
    model_curve_dp,
    predicted_g2,
    solve_p_from_aggregate,
    validity_check,
)

__all__ = [
    "P_UPPER_BOUND",
    "CrosstalkParam",
    "InvalidCrosstalkError",
    "ModelCurveInput",
    "ModelError",
    "ModelOutOfRangeError",
    "ValidityReport",
    "aggregate_from_p",
    "aggregate_totals",
    "apply_crosstalk",
    "model_curve",
    "model_curve_dp",
    "predicted_g2",
    "solve_p_from_aggregate",
    "validity_check",
]
