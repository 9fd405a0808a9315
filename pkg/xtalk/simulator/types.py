from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, Literal

CascadeMode = Literal["paper-truncated", "geometric-cascade"]
SourceStatistics = Literal["coherent", "thermal-single-mode"]

CASCADE_MODES = ("paper-truncated", "geometric-cascade")
SOURCE_STATISTICS = ("coherent", "thermal-single-mode")
SEED_LIMIT = 2 ** 64


def _invalid(message: str) -> Exception:
    from xtalk.simulator.core import SimulationError

    return SimulationError(message)


@dataclass(frozen=True)
class DetectorConfig:
    """Ground truth of a simulated detector."""
    m: int
    eta: float
    p: float
    dark_rate: float
    cascade_mode: CascadeMode = "paper-truncated"

    def __post_init__(self) -> None:
        if int(self.m) != self.m or self.m < 1:
            raise _invalid(f"Pixel count must be a positive integer, got {self.m}")
        if not 0.0 <= self.eta <= 1.0:
            raise _invalid(f"Detection efficiency must lie in [0, 1], got {self.eta}")
        if not 0.0 <= self.p < 0.5:
            raise _invalid(f"Crosstalk probability must lie in [0, 0.5), got {self.p}")
        if not self.dark_rate >= 0.0:
            raise _invalid(f"Dark rate must be non-negative, got {self.dark_rate}")
        if self.cascade_mode not in CASCADE_MODES:
            raise _invalid(f"Unknown cascade mode: {self.cascade_mode}")


@dataclass(frozen=True)
class SourceConfig:
    """Light at the detector face: mean photons per trigger and their statistics."""
    mean_photons: float
    statistics: SourceStatistics = "coherent"

    def __post_init__(self) -> None:
        if not self.mean_photons >= 0.0:
            raise _invalid(f"Mean photon number must be non-negative, got {self.mean_photons}")
        if self.statistics not in SOURCE_STATISTICS:
            raise _invalid(f"Unknown source statistics: {self.statistics}")


@dataclass(frozen=True)
class RunConfig:
    """One simulated acquisition: detector, source, trigger count and seed."""
    detector: DetectorConfig
    source: SourceConfig
    n_triggers: int
    seed: int

    def __post_init__(self) -> None:
        if int(self.n_triggers) != self.n_triggers or self.n_triggers < 1:
            raise _invalid(f"n_triggers must be a positive integer, got {self.n_triggers}")
        if not 0 <= self.seed < SEED_LIMIT:
            raise _invalid(f"Seed must be a 64-bit unsigned integer, got {self.seed}")

    def with_source(self, mean_photons: float, seed: int) -> "RunConfig":
        """Copy of this run at another intensity and seed."""
        return replace(self, source=replace(self.source, mean_photons=mean_photons), seed=seed)

    def to_dict(self) -> Dict[str, Any]:
        """Plain mapping suitable for a manifest."""
        return {
            "detector": asdict(self.detector),
            "source": asdict(self.source),
            "n_triggers": int(self.n_triggers),
            "seed": int(self.seed),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        """
        Rebuild a run from a manifest mapping.

        Raises:
            SimulationError: If keys are missing or values are invalid
        """
        try:
            return cls(
                detector=DetectorConfig(**data["detector"]),
                source=SourceConfig(**data["source"]),
                n_triggers=int(data["n_triggers"]),
                seed=int(data["seed"]),
            )
        except (KeyError, TypeError) as e:
            raise _invalid(f"Incomplete run configuration: {str(e)}") from e
