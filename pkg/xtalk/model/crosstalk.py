"""
Nonlinear crosstalk model.

A k-count event gains one extra count with probability k*p and two extra
counts with probability k*p^2 (second order). The first-order model keeps only
the single-gain branch. Everything here is a pure function of its inputs.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Literal, Optional, Tuple, Union

import numpy as np

from xtalk.config import Config
from xtalk.histogram.core import mean_photocounts, pairwise_coincidence_rate
from xtalk.histogram.types import PhotocountDistribution

logger = logging.getLogger(__name__)

ModelOrder = Literal[1, 2]
P_UPPER_BOUND = 0.5
# Slack on the per-bin precondition for round-off in k*p + k*p^2
_RANGE_TOLERANCE = 1e-12


class ModelError(Exception):
    """Exception raised for crosstalk model errors."""
    pass


class InvalidCrosstalkError(ModelError):
    """Exception raised for crosstalk probabilities outside [0, 0.5)."""
    pass


class ModelOutOfRangeError(ModelError):
    """Exception raised when the model would produce a negative bin."""

    def __init__(self, k: int, p: float, order: int):
        self.k = k
        self.p = p
        self.order = order
        super().__init__(
            f"Crosstalk model (order {order}) is out of range at k={k} for p={p}: "
            f"the bin would lose more than all of its events"
        )


@dataclass(frozen=True)
class CrosstalkParam:
    """Per-pixel crosstalk probability."""
    p: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.p < P_UPPER_BOUND) or math.isnan(self.p):
            raise InvalidCrosstalkError(
                f"Crosstalk probability must lie in [0, {P_UPPER_BOUND}), got {self.p}"
            )


@dataclass(frozen=True)
class ModelCurveInput:
    """Crosstalk-free correlation g0 and the measured mean photocounts per trigger."""
    mu_ct: float
    g0: float = 1.0

    def __post_init__(self) -> None:
        if self.g0 < 0:
            raise ModelError(f"g0 must be non-negative, got {self.g0}")
        if not self.mu_ct > 0:
            raise ModelError(f"mu_ct must be positive, got {self.mu_ct}")


@dataclass(frozen=True)
class ValidityReport:
    """Ratio of the neglected third-order term to the kept terms, with a verdict."""
    ratio: float
    verdict: str

    @property
    def ok(self) -> bool:
        return self.verdict == "ok"


def _as_param(p: Union[CrosstalkParam, float]) -> CrosstalkParam:
    return p if isinstance(p, CrosstalkParam) else CrosstalkParam(float(p))


def _check_order(order: int) -> None:
    if order not in (1, 2):
        raise ModelError(f"Only first- and second-order crosstalk models exist, got order {order}")


def double_gain(p: float, order: int = 2) -> float:
    return p * p if order == 2 else 0.0


def apply_crosstalk(
    clean: PhotocountDistribution,
    p: Union[CrosstalkParam, float],
    order: ModelOrder = 2,
) -> PhotocountDistribution:
    """
    Transform a crosstalk-free distribution into the one a detector reports.

    f_ct[k] = f[k](1 - k p - k p^2) + (k-1) p f[k-1] + (k-2) p^2 f[k-2]

    The zero bin never gains or loses events, and the total is conserved. The
    result has two more bins than the input.

    Args:
        clean: Crosstalk-free distribution
        p: Per-pixel crosstalk probability
        order: 2 for the nonlinear model, 1 for the single-crosstalk model

    Returns:
        The distribution with crosstalk

    Raises:
        ModelOutOfRangeError: If an occupied bin k has k p + k p^2 > 1
    """
    _check_order(order)
    param = _as_param(p)
    a = param.p
    b = double_gain(param.p, order)

    f = clean.f
    k = np.arange(f.size)
    loss = k * (a + b)
    bad = np.flatnonzero((f > 0) & (loss > 1.0 + _RANGE_TOLERANCE))
    if bad.size:
        raise ModelOutOfRangeError(int(bad[0]), param.p, order)

    out = np.zeros(f.size + 2)
    out[: f.size] += f * (1.0 - loss)
    out[1 : f.size + 1] += a * k * f
    out[2 : f.size + 2] += b * k * f
    return PhotocountDistribution(
        f=np.clip(out, 0.0, None),
        n_triggers=clean.n_triggers,
        renormalized=clean.renormalized,
        clamped_mass=clean.clamped_mass,
    )


def aggregate_coefficients(p: float, order: int = 2) -> Tuple[float, float, float]:
    """
    Coefficients (c_pairs, c_linear, c_total) of the closed-form aggregates.

    coinc_ct = c_pairs * sum C(k,2) f_k + c_linear * sum k f_k
    total_ct = c_total * sum k f_k
    """
    _check_order(order)
    if order == 2:
        return 1 + 2 * p + 4 * p * p, p * (1 + 3 * p), 1 + p + 2 * p * p
    return 1 + 2 * p, p, 1 + p


def aggregate_totals(
    clean: PhotocountDistribution,
    p: Union[CrosstalkParam, float],
    order: ModelOrder = 2,
) -> Tuple[float, float]:
    """
    Pairwise coincidences and total photocounts per trigger after crosstalk.

    Returns:
        Tuple (coinc_ct, total_ct)
    """
    param = _as_param(p)
    c_pairs, c_linear, c_total = aggregate_coefficients(param.p, order)
    pairs = pairwise_coincidence_rate(clean)
    total = mean_photocounts(clean)
    return c_pairs * pairs + c_linear * total, c_total * total


def curve_coefficients(p: float, order: int = 2) -> Tuple[float, float]:
    """
    Coefficients (A, B) of the calibration curve g2 = A g0 + B / mu_ct.
    """
    c_pairs, c_linear, c_total = aggregate_coefficients(p, order)
    return c_pairs / c_total ** 2, 2.0 * c_linear / c_total


def curve_coefficient_derivatives(p: float, order: int = 2) -> Tuple[float, float]:
    """Derivatives (dA/dp, dB/dp) of the calibration-curve coefficients."""
    _check_order(order)
    if order == 2:
        num, d_num = 1 + 2 * p + 4 * p * p, 2 + 8 * p
        den, d_den = 1 + p + 2 * p * p, 1 + 4 * p
        lin, d_lin = 2 * p + 6 * p * p, 2 + 12 * p
    else:
        num, d_num = 1 + 2 * p, 2.0
        den, d_den = 1 + p, 1.0
        lin, d_lin = 2 * p, 2.0
    d_a = d_num / den ** 2 - 2 * num * d_den / den ** 3
    d_b = d_lin / den - lin * d_den / den ** 2
    return d_a, d_b


def predicted_g2(
    params: Union[CrosstalkParam, float],
    curve_input: ModelCurveInput,
    order: ModelOrder = 2,
) -> float:
    """
    Calibration curve: g2 measured at mean photocounts mu_ct for crosstalk p.

    g2 = (1+2p+4p^2)/(1+p+2p^2)^2 * g0 + 2p(1+3p)/(1+p+2p^2) * 1/mu_ct
    """
    param = _as_param(params)
    a, b = curve_coefficients(param.p, order)
    return a * curve_input.g0 + b / curve_input.mu_ct


def model_curve(p: float, g0: float, mu_ct: np.ndarray, order: int = 2) -> np.ndarray:
    """Vectorised calibration curve over an array of mean photocounts."""
    a, b = curve_coefficients(p, order)
    return a * g0 + b / np.asarray(mu_ct, dtype=np.float64)


def model_curve_dp(p: float, g0: float, mu_ct: np.ndarray, order: int = 2) -> np.ndarray:
    """Derivative of the calibration curve with respect to p."""
    d_a, d_b = curve_coefficient_derivatives(p, order)
    return d_a * g0 + d_b / np.asarray(mu_ct, dtype=np.float64)


def aggregate_from_p(p: Union[CrosstalkParam, float], order: ModelOrder = 2) -> float:
    """Impact of crosstalk on the total counts: p + 2p^2 (p for the first-order model)."""
    param = _as_param(p)
    _check_order(order)
    return param.p + 2.0 * param.p ** 2 if order == 2 else param.p


def solve_p_from_aggregate(v: float, order: ModelOrder = 2) -> CrosstalkParam:
    """
    Invert the aggregate: the non-negative root of p + 2p^2 = v.

    Raises:
        ModelError: If v is negative
        InvalidCrosstalkError: If the root falls outside [0, 0.5)
    """
    _check_order(order)
    if v < 0 or math.isnan(v):
        raise ModelError(f"Aggregate crosstalk must be non-negative, got {v}")
    if order == 1:
        return CrosstalkParam(v)
    # 2v / (1 + sqrt(1 + 8v)) equals (-1 + sqrt(1 + 8v)) / 4 without cancellation
    return CrosstalkParam(2.0 * v / (1.0 + math.sqrt(1.0 + 8.0 * v)))


def validity_check(
    p: Union[CrosstalkParam, float],
    thresholds: Optional[Dict[str, float]] = None,
    order: ModelOrder = 2,
) -> ValidityReport:
    """
    Check how much the truncation of the model neglects.

    The ratio r = 3p^3 / (p + 2p^2) compares the first neglected term with the
    kept ones (p^2 / p for the first-order model). r = 0 at p = 0.

    Args:
        p: Crosstalk probability
        thresholds: {"warn": ..., "fail": ...}; defaults from configuration

    Returns:
        ValidityReport with verdict "ok", "warn" or "fail"
    """
    param = _as_param(p)
    limits = thresholds or Config.get_validity_thresholds()
    kept = aggregate_from_p(param, order)
    neglected = 3 * param.p ** 3 if order == 2 else 2 * param.p ** 2
    ratio = neglected / kept if kept > 0 else 0.0

    if ratio < limits["warn"]:
        verdict = "ok"
    elif ratio < limits["fail"]:
        verdict = "warn"
    else:
        verdict = "fail"
    if verdict != "ok":
        logger.warning(f"Crosstalk model validity {verdict}: neglected/kept ratio {ratio:.3g} at p={param.p:.4g}")
    return ValidityReport(ratio=ratio, verdict=verdict)
