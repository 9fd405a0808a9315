from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from xtalk.config import Config


def _frozen(values: np.ndarray) -> np.ndarray:
    values.flags.writeable = False
    return values


@dataclass(frozen=True)
class RecordSet:
    """Per-trigger photoelectron counts, the raw measurement unit."""
    counts: np.ndarray
    # Hard cap on counts per trigger; None means the configured default
    k_max: Optional[int] = None

    def __post_init__(self) -> None:
        # Imported here to keep types.py free of circular imports
        from xtalk.histogram.core import CountOverflowError, EmptyRecordsError, HistogramError

        counts = np.asarray(self.counts)
        if counts.ndim != 1 or counts.size == 0:
            raise EmptyRecordsError("Record set must contain at least one trigger")
        if not np.issubdtype(counts.dtype, np.integer):
            raise HistogramError(f"Counts must be integers, got dtype {counts.dtype}")
        if counts.min() < 0:
            raise HistogramError(f"Negative count {counts.min()} in record set")

        k_max = self.k_max if self.k_max is not None else Config.get_histogram_settings()["k_max"]
        largest = int(counts.max())
        if largest > k_max:
            raise CountOverflowError(
                f"Count {largest} exceeds k_max={k_max} "
                f"(trigger {int(np.argmax(counts))})"
            )
        object.__setattr__(self, "counts", _frozen(counts.astype(np.int64, copy=True)))
        object.__setattr__(self, "k_max", k_max)

    @property
    def n_triggers(self) -> int:
        return int(self.counts.size)


@dataclass(frozen=True)
class PhotocountDistribution:
    """
    Per-trigger fractions f_k of k-photocount events, k = 0..len(f)-1.

    Measured distributions sum to one. Distributions produced by dark
    subtraction carry ``renormalized=True`` and the probability mass that was
    clamped away.
    """
    f: np.ndarray
    n_triggers: int
    renormalized: bool = False
    clamped_mass: float = 0.0

    def __post_init__(self) -> None:
        from xtalk.histogram.core import HistogramError

        f = np.asarray(self.f, dtype=np.float64)
        if f.ndim != 1 or f.size == 0:
            raise HistogramError("Distribution needs at least the k=0 bin")
        if not np.all(np.isfinite(f)) or f.min() < 0:
            raise HistogramError("Distribution bins must be finite and non-negative")
        if self.n_triggers < 1:
            raise HistogramError(f"n_triggers must be positive, got {self.n_triggers}")
        object.__setattr__(self, "f", _frozen(f.copy()))

    @property
    def k_max(self) -> int:
        return int(self.f.size - 1)

    @property
    def total(self) -> float:
        return float(self.f.sum())

    def counts(self) -> np.ndarray:
        """Trigger counts per bin implied by the fractions and n_triggers."""
        return np.rint(self.f * self.n_triggers).astype(np.int64)

    def padded(self, size: int) -> np.ndarray:
        """Bins as a mutable array zero-padded (never truncated) to ``size``."""
        out = np.zeros(max(size, self.f.size))
        out[: self.f.size] = self.f
        return out


@dataclass(frozen=True)
class DarkCalibration:
    """Dark-noise calibration: mean dark counts and the crosstalk estimate."""
    mean_dark: float
    p_dc: float
    p_dc_stderr: float
    n_triggers: int = field(default=1)
