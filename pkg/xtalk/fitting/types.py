import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple


class FitError(Exception):
    """Exception raised for fitting errors."""
    pass


class TooFewPointsError(FitError):
    """Exception raised when fewer than three usable points reach the fit."""
    pass


class DegeneratePointError(FitError):
    """Exception raised when a g2 point cannot be estimated (zero mean photocounts)."""
    pass


class ConvergenceError(FitError):
    """Exception raised when Levenberg-Marquardt exhausts its iterations."""

    def __init__(self, message: str, last_p: float, iterations: int):
        self.last_p = last_p
        self.iterations = iterations
        super().__init__(message)


@dataclass(frozen=True)
class G2Point:
    """One intensity point of the calibration curve."""
    mu_ct: float
    g2: float
    sigma: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mu_ct) and self.mu_ct > 0):
            raise DegeneratePointError(f"mu_ct must be positive, got {self.mu_ct}")
        if not (math.isfinite(self.g2) and self.g2 >= 0):
            raise DegeneratePointError(f"g2 must be finite and non-negative, got {self.g2}")

    @property
    def rejected(self) -> bool:
        """Points without a positive, finite sigma carry no weight and are dropped."""
        return not (math.isfinite(self.sigma) and self.sigma > 0)


@dataclass(frozen=True)
class FitResult:
    """Outcome of the single-parameter crosstalk fit."""
    p_hat: float
    p_stderr: float
    aggregate: float
    aggregate_stderr: float
    cod: float
    n_points: int
    converged: bool
    residuals: Tuple[float, ...]
    # Errors including the propagated g0 uncertainty
    p_stderr_total: float = 0.0
    aggregate_stderr_total: float = 0.0
    at_boundary: bool = False
    iterations: int = 0
    chi_square: float = 0.0
    n_rejected: int = 0
    order: int = 2
    g0: float = 1.0
    g0_sigma: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        """Plain mapping in report key order; errors are 1 sigma."""
        return {
            "p_hat": float(self.p_hat),
            "p_stderr": float(self.p_stderr),
            "p_stderr_total": float(self.p_stderr_total),
            "aggregate": float(self.aggregate),
            "aggregate_stderr": float(self.aggregate_stderr),
            "aggregate_stderr_total": float(self.aggregate_stderr_total),
            "error_convention": "1 sigma",
            "cod": float(self.cod),
            "chi_square": float(self.chi_square),
            "n_points": int(self.n_points),
            "n_rejected": int(self.n_rejected),
            "converged": bool(self.converged),
            "at_boundary": bool(self.at_boundary),
            "iterations": int(self.iterations),
            "order": int(self.order),
            "g0": float(self.g0),
            "g0_sigma": float(self.g0_sigma),
            "residuals": [float(r) for r in self.residuals],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FitResult":
        """
        Rebuild a result from a report mapping.

        Raises:
            FitError: If required keys are missing
        """
        known = {name for name in cls.__dataclass_fields__}
        values = {key: value for key, value in data.items() if key in known}
        values["residuals"] = tuple(values.get("residuals", ()))
        try:
            return cls(**values)
        except TypeError as e:
            raise FitError(f"Incomplete fit result: {str(e)}") from e


@dataclass(frozen=True)
class ComparisonReport:
    """The g2-method aggregate against the dark-count estimate."""
    aggregate: float
    aggregate_stderr: float
    p_dc: float
    p_dc_stderr: float
    difference: float
    combined_sigma: float
    n_sigma: float
    consistent: bool
    # p_dc read as a per-pixel p through the aggregate relation
    p_from_dark: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "aggregate": float(self.aggregate),
            "aggregate_stderr": float(self.aggregate_stderr),
            "p_dc": float(self.p_dc),
            "p_dc_stderr": float(self.p_dc_stderr),
            "difference": float(self.difference),
            "combined_sigma": float(self.combined_sigma),
            "n_sigma": float(self.n_sigma),
            "consistent": bool(self.consistent),
            "p_from_dark": None if self.p_from_dark is None else float(self.p_from_dark),
        }
