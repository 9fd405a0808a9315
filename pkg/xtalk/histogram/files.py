"""
Record and histogram file handling module.

Record files hold one non-negative integer per line (photoelectrons per
trigger) with optional ``#`` comment lines. Histogram files start with a
``triggers=<n>`` header followed by ``k<TAB>count`` lines.
"""

import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from xtalk.config import Config
from xtalk.histogram.core import CountOverflowError, HistogramError, build_distribution, distribution_from_counts
from xtalk.histogram.types import PhotocountDistribution, RecordSet

logger = logging.getLogger(__name__)

HISTOGRAM_HEADER = "triggers="


class HistogramFileError(Exception):
    """Exception raised for record or histogram file errors."""
    pass


class RecordFile:
    """Class for reading and writing per-trigger record files."""

    def __init__(self, path: Union[str, Path]):
        """
        Initialize with path to the record file.

        Args:
            path: Path to the record file
        """
        self.path = Path(path)

    def read(self, k_max: Optional[int] = None) -> RecordSet:
        """
        Read and validate the record file.

        Args:
            k_max: Hard cap on counts; None uses the configured default

        Returns:
            RecordSet with the file's counts

        Raises:
            HistogramFileError: If the file cannot be read or parsed
            HistogramError: If the counts violate the RecordSet invariants
        """
        try:
            counts: List[int] = []
            with self.path.open("r", encoding="utf-8") as handle:
                for number, line in enumerate(handle, start=1):
                    line = line.strip()
                    if not line or line.startswith("#"):
                        continue
                    try:
                        counts.append(int(line))
                    except ValueError:
                        raise HistogramFileError(
                            f"{self.path}:{number}: expected an integer count, got {line!r}"
                        )
        except UnicodeDecodeError as e:
            raise HistogramFileError(f"{self.path}: not a UTF-8 text file: {str(e)}") from e
        except OSError as e:
            logger.error(f"Error reading record file {self.path}: {str(e)}")
            raise HistogramFileError(f"Failed to read record file {self.path}: {str(e)}") from e

        logger.debug(f"Read {len(counts)} triggers from {self.path}")
        try:
            return RecordSet(counts=np.asarray(counts, dtype=np.int64), k_max=k_max)
        except HistogramError as e:
            raise type(e)(f"{self.path}: {str(e)}") from e

    def write(self, records: RecordSet, comments: Optional[List[str]] = None) -> None:
        """
        Write records, one count per line, after optional comment lines.

        Raises:
            HistogramFileError: If the file cannot be written
        """
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            header = "".join(f"# {comment}\n" for comment in comments or [])
            body = "\n".join(map(str, records.counts.tolist()))
            with self.path.open("w", encoding="utf-8", newline="\n") as handle:
                handle.write(header + body + "\n")
            logger.debug(f"Wrote {records.n_triggers} triggers to {self.path}")
        except OSError as e:
            logger.error(f"Error writing record file {self.path}: {str(e)}")
            raise HistogramFileError(f"Failed to write record file {self.path}: {str(e)}") from e


class HistogramFile:
    """Class for reading and writing ``k<TAB>count`` histogram files."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)

    def read(self, k_max: Optional[int] = None) -> PhotocountDistribution:
        """
        Read the histogram and normalize it.

        Args:
            k_max: Hard cap on k; None uses the configured default

        Raises:
            HistogramFileError: If the file is malformed or the counts do not
                add up to the declared number of triggers
            CountOverflowError: If a bin lies above k_max
        """
        try:
            lines = self.path.read_text(encoding="utf-8").splitlines()
        except UnicodeDecodeError as e:
            raise HistogramFileError(f"{self.path}: not a UTF-8 text file: {str(e)}") from e
        except OSError as e:
            raise HistogramFileError(f"Failed to read histogram file {self.path}: {str(e)}") from e

        if k_max is None:
            k_max = Config.get_histogram_settings()["k_max"]
        declared: Optional[int] = None
        bins = {}
        for number, line in enumerate(lines, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                if line.startswith(HISTOGRAM_HEADER):
                    declared = int(line[len(HISTOGRAM_HEADER):])
                    continue
                k_text, count_text = line.split("\t")
                k, count = int(k_text), int(count_text)
            except ValueError:
                raise HistogramFileError(f"{self.path}:{number}: malformed line {line!r}")
            if k < 0 or count < 0 or k in bins:
                raise HistogramFileError(f"{self.path}:{number}: invalid or repeated bin {line!r}")
            if k > k_max:
                raise CountOverflowError(f"{self.path}:{number}: bin k={k} exceeds k_max={k_max}")
            bins[k] = count

        if declared is None:
            raise HistogramFileError(f"{self.path}: missing '{HISTOGRAM_HEADER}<n>' header")
        hist = np.zeros(max(bins, default=0) + 1, dtype=np.int64)
        for k, count in bins.items():
            hist[k] = count
        if int(hist.sum()) != declared:
            raise HistogramFileError(
                f"{self.path}: bins add up to {int(hist.sum())} triggers, header declares {declared}"
            )
        return distribution_from_counts(hist)

    def write(self, dist: PhotocountDistribution) -> None:
        """
        Write the trigger counts of a measured distribution.

        Raises:
            HistogramFileError: If the file cannot be written
        """
        counts = dist.counts()
        last = int(np.flatnonzero(counts).max()) if counts.any() else 0
        lines = [f"{HISTOGRAM_HEADER}{int(counts.sum())}"]
        lines += [f"{k}\t{int(counts[k])}" for k in range(last + 1)]
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("w", encoding="utf-8", newline="\n") as handle:
                handle.write("\n".join(lines) + "\n")
        except OSError as e:
            raise HistogramFileError(f"Failed to write histogram file {self.path}: {str(e)}") from e


def is_histogram_file(path: Union[str, Path]) -> bool:
    """Check whether the first non-comment line is a histogram header."""
    try:
        with Path(path).open("r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line and not line.startswith("#"):
                    return line.startswith(HISTOGRAM_HEADER)
    except UnicodeDecodeError as e:
        raise HistogramFileError(f"{path}: not a UTF-8 text file: {str(e)}") from e
    except OSError as e:
        raise HistogramFileError(f"Failed to read {path}: {str(e)}") from e
    return False


def load_distribution(path: Union[str, Path], k_max: Optional[int] = None) -> PhotocountDistribution:
    """
    Load a distribution from either a record file or a histogram file.

    Args:
        path: Path to the file
        k_max: Hard cap on counts

    Returns:
        The normalized photocount distribution
    """
    if is_histogram_file(path):
        return HistogramFile(path).read(k_max=k_max)
    return build_distribution(RecordFile(path).read(k_max=k_max))
