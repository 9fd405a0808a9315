"""
Weighted Levenberg-Marquardt fit of the crosstalk probability.

The model is the calibration curve g2(mu) = A(p) g0 + B(p) / mu with p the
only free parameter. Steps are projected onto [0, P_MAX].
"""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from xtalk.config import Config
from xtalk.fitting.types import ConvergenceError, FitError, FitResult, G2Point, TooFewPointsError
from xtalk.model.crosstalk import P_UPPER_BOUND, aggregate_from_p, curve_coefficients, model_curve, model_curve_dp

logger = logging.getLogger(__name__)

MIN_POINTS = 3
P_MAX = P_UPPER_BOUND - 1e-6
STEP_TOLERANCE = 1e-10
CHI_SQUARE_TOLERANCE = 1e-12
_START_GRID = np.linspace(0.0, 0.49, 50)


def _arrays(points: Sequence[G2Point]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    mu = np.array([pt.mu_ct for pt in points], dtype=np.float64)
    g = np.array([pt.g2 for pt in points], dtype=np.float64)
    sigma = np.array([pt.sigma for pt in points], dtype=np.float64)
    return mu, g, sigma


def chi_square(p: float, points: Sequence[G2Point], g0: float, order: int = 2) -> float:
    """Weighted sum of squared residuals of the calibration curve."""
    mu, g, sigma = _arrays(points)
    r = (g - model_curve(p, g0, mu, order)) / sigma
    return float(np.dot(r, r))


def chi_square_gradient(p: float, points: Sequence[G2Point], g0: float, order: int = 2) -> float:
    """Analytic d(chi^2)/dp."""
    mu, g, sigma = _arrays(points)
    r = (g - model_curve(p, g0, mu, order)) / sigma
    jac = model_curve_dp(p, g0, mu, order) / sigma
    return float(-2.0 * np.dot(r, jac))


def weighted_cod(g: np.ndarray, predicted: np.ndarray, sigma: np.ndarray) -> float:
    """Weighted coefficient of determination, 1 - sum w r^2 / sum w (g - g_w)^2."""
    w = 1.0 / sigma ** 2
    mean = float(np.dot(w, g) / w.sum())
    ss_res = float(np.dot(w, (g - predicted) ** 2))
    ss_tot = float(np.dot(w, (g - mean) ** 2))
    if ss_tot == 0:
        return 1.0 if ss_res == 0 else 0.0
    return 1.0 - ss_res / ss_tot


def fit_crosstalk(
    points: Sequence[G2Point],
    g0: float = 1.0,
    g0_sigma: float = 0.0,
    order: int = 2,
    max_iterations: Optional[int] = None,
    damping: Optional[float] = None,
) -> FitResult:
    """
    Fit p to a set of g2 points.

    Args:
        points: Calibration points; rejected points (sigma <= 0) are dropped
        g0: Crosstalk-free correlation of the source, held fixed
        g0_sigma: Uncertainty of g0, propagated into the *_total errors
        order: 2 for the nonlinear model, 1 for the first-order model
        max_iterations: Iteration limit; None uses the configured default
        damping: Initial damping; None uses the configured default

    Returns:
        FitResult; boundary-pinned solutions carry ``at_boundary=True``

    Raises:
        TooFewPointsError: If fewer than three usable points remain
        ConvergenceError: If the iteration limit is reached
        FitError: If g0 or g0_sigma are invalid
    """
    settings = Config.get_fit_settings()
    max_iterations = max_iterations if max_iterations is not None else settings["max_iterations"]
    lam = damping if damping is not None else settings["damping"]

    if not g0 > 0:
        raise FitError(f"g0 must be positive, got {g0}")
    if not g0_sigma >= 0:
        raise FitError(f"g0_sigma must be non-negative, got {g0_sigma}")

    usable = [pt for pt in points if not pt.rejected]
    n_rejected = len(points) - len(usable)
    if n_rejected:
        logger.warning(f"Dropped {n_rejected} g2 points without a positive finite sigma")
    if len(usable) < MIN_POINTS:
        raise TooFewPointsError(f"Fit needs at least {MIN_POINTS} usable points, got {len(usable)}")

    mu, g, sigma = _arrays(usable)

    def chi2_at(value: float) -> float:
        r = (g - model_curve(value, g0, mu, order)) / sigma
        return float(np.dot(r, r))

    start = [chi2_at(value) for value in _START_GRID]
    p = float(_START_GRID[int(np.argmin(start))])
    chi2 = min(start)
    logger.debug(f"Starting LM at p={p:.4g} (chi2={chi2:.6g}, {len(usable)} points)")

    converged = chi2 == 0
    iterations = 0
    while not converged:
        if iterations >= max_iterations:
            raise ConvergenceError(
                f"Fit did not converge in {max_iterations} iterations (last p={p:.6g})",
                last_p=p,
                iterations=iterations,
            )
        iterations += 1

        r = (g - model_curve(p, g0, mu, order)) / sigma
        jac = model_curve_dp(p, g0, mu, order) / sigma
        jtj = float(np.dot(jac, jac))
        if jtj == 0:
            raise FitError(f"Calibration curve is flat in p at p={p:.6g}")
        candidate = min(max(p + float(np.dot(jac, r)) / (jtj * (1.0 + lam)), 0.0), P_MAX)
        candidate_chi2 = chi2_at(candidate)

        if candidate_chi2 <= chi2:
            step = abs(candidate - p)
            change = chi2 - candidate_chi2
            p, previous, chi2 = candidate, chi2, candidate_chi2
            lam /= 10.0
            converged = (
                step < STEP_TOLERANCE
                or chi2 == 0
                or change <= CHI_SQUARE_TOLERANCE * previous
            )
        else:
            lam *= 10.0
            converged = abs(candidate - p) < STEP_TOLERANCE

    predicted = model_curve(p, g0, mu, order)
    residuals = (g - predicted) / sigma
    jac = model_curve_dp(p, g0, mu, order) / sigma
    fisher = float(np.dot(jac, jac))
    n = len(usable)
    reduced = chi2 / (n - 1)
    # Exact points leave no scatter to scale by; fall back to the stated sigmas
    p_stderr = math.sqrt((reduced if reduced > 0 else 1.0) / fisher)

    a, _ = curve_coefficients(p, order)
    dp_dg0 = -float(np.dot(jac, a / sigma)) / fisher
    p_stderr_total = math.hypot(p_stderr, dp_dg0 * g0_sigma)

    slope = 1.0 + 4.0 * p if order == 2 else 1.0
    at_boundary = p <= 0.0 or p >= P_MAX
    if at_boundary:
        logger.warning(f"Crosstalk fit is pinned at the boundary p={p:.6g}")

    result = FitResult(
        p_hat=p,
        p_stderr=p_stderr,
        aggregate=aggregate_from_p(p, order),
        aggregate_stderr=slope * p_stderr,
        cod=weighted_cod(g, predicted, sigma),
        n_points=n,
        converged=True,
        residuals=tuple(float(x) for x in residuals),
        p_stderr_total=p_stderr_total,
        aggregate_stderr_total=slope * p_stderr_total,
        at_boundary=at_boundary,
        iterations=iterations,
        chi_square=chi2,
        n_rejected=n_rejected,
        order=order,
        g0=g0,
        g0_sigma=g0_sigma,
    )
    logger.info(
        f"Fitted p={p:.6g} +/- {p_stderr:.3g}, aggregate={result.aggregate:.6g}, "
        f"COD={result.cod:.6g} after {iterations} iterations"
    )
    return result
