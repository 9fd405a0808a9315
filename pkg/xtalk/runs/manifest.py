"""
Manifest and report file handling module.

Manifests and reports are YAML mappings whose first key is ``version``. Keys
keep their insertion order and nothing time-dependent is written, so identical
runs produce byte-identical files.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union

import yaml

from xtalk import REPORT_FORMAT_VERSION
from xtalk.simulator.types import RunConfig

logger = logging.getLogger(__name__)


class ReportFileError(Exception):
    """Exception raised for manifest or report file errors."""
    pass


class ReportFile:
    """Class for reading and writing versioned YAML manifests and reports."""

    def __init__(self, path: Union[str, Path]):
        """
        Initialize with path to the file.

        Args:
            path: Path to the manifest or report
        """
        self.path = Path(path)

    def read(self) -> Dict[str, Any]:
        """
        Read and validate the file.

        Returns:
            The mapping without its version key

        Raises:
            ReportFileError: If the file is unreadable, not a mapping, or has
                an unsupported version
        """
        try:
            text = self.path.read_text(encoding="utf-8")
        except UnicodeDecodeError as e:
            raise ReportFileError(f"{self.path}: not a UTF-8 text file: {str(e)}") from e
        except OSError as e:
            logger.error(f"Error reading {self.path}: {str(e)}")
            raise ReportFileError(f"Failed to read {self.path}: {str(e)}") from e

        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            where = f":{mark.line + 1}" if mark is not None else ""
            raise ReportFileError(f"{self.path}{where}: invalid YAML: {str(e)}") from e

        if not isinstance(data, dict):
            raise ReportFileError(f"{self.path}: expected a mapping at the top level")
        version = data.pop("version", None)
        if version != REPORT_FORMAT_VERSION:
            raise ReportFileError(
                f"{self.path}: unsupported version {version!r}, expected {REPORT_FORMAT_VERSION}"
            )
        return data

    def write(self, data: Dict[str, Any]) -> None:
        """
        Write the mapping with the version key first.

        Raises:
            ReportFileError: If the file cannot be written
        """
        document = {"version": REPORT_FORMAT_VERSION, **data}
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("w", encoding="utf-8", newline="\n") as handle:
                yaml.safe_dump(document, handle, sort_keys=False, default_flow_style=False)
            logger.debug(f"Wrote {self.path}")
        except OSError as e:
            logger.error(f"Error writing {self.path}: {str(e)}")
            raise ReportFileError(f"Failed to write {self.path}: {str(e)}") from e


@dataclass(frozen=True)
class SimulationPlan:
    """Everything a simulate command needs to reproduce its outputs."""
    base: RunConfig
    means: Tuple[float, ...]
    dark_triggers: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            **self.base.to_dict(),
            "means": [float(mean) for mean in self.means],
            "dark_triggers": int(self.dark_triggers),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SimulationPlan":
        """
        Rebuild a plan from a manifest mapping.

        Raises:
            ReportFileError: If the sweep is missing or malformed
        """
        try:
            means = tuple(float(mean) for mean in data["means"])
            dark_triggers = int(data.get("dark_triggers", 0))
        except (KeyError, TypeError, ValueError) as e:
            raise ReportFileError(f"Manifest field 'means' or 'dark_triggers' is invalid: {str(e)}") from e
        return cls(base=RunConfig.from_dict(data), means=means, dark_triggers=dark_triggers)


def write_columns(path: Union[str, Path], header: Sequence[str], rows: List[Sequence[float]]) -> None:
    """
    Write a plot-ready, tab-separated column file.

    Floats are written with 17 significant digits so reruns compare byte for byte.

    Raises:
        ReportFileError: If the file cannot be written
    """
    lines = ["# " + "\t".join(header)]
    lines += ["\t".join(f"{value:.17g}" for value in row) for row in rows]
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as handle:
            handle.write("\n".join(lines) + "\n")
    except OSError as e:
        raise ReportFileError(f"Failed to write {path}: {str(e)}") from e
