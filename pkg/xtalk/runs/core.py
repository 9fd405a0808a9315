"""
Command workflows: simulation sweeps, both calibration methods and their comparison.

Each workflow writes its outputs under one directory, reports progress through
``log_callback`` and raises RunError subclasses that carry the process exit code.
"""

import logging
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from xtalk.config import Config, ConfigError
from xtalk.fitting import (
    ConvergenceError,
    FitError,
    FitResult,
    TooFewPointsError,
    compare_methods,
    compare_values,
    estimate_g2_point,
    fit_crosstalk,
)
from xtalk.histogram import (
    DarkCalibration,
    HistogramError,
    HistogramFileError,
    RecordFile,
    dark_crosstalk_probability,
    load_distribution,
)
from xtalk.model import ModelError, validity_check
from xtalk.runs.manifest import ReportFile, ReportFileError, SimulationPlan, write_columns
from xtalk.simulator import (
    DARK_FAMILY,
    POINT_FAMILY,
    SimulationError,
    derive_seed,
    simulate_run_with_stats,
    sweep_runs,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
LogCallback = Callable[[str], Any]

MANIFEST_NAME = "manifest.yaml"
DARK_RECORD_NAME = "dark.txt"
POINTS_NAME = "points.tsv"
G2_REPORT_NAME = "g2_report.yaml"
DARK_REPORT_NAME = "dark_report.yaml"
COMPARE_REPORT_NAME = "compare_report.yaml"
SERIES_NAME = "series.tsv"
MIN_SIGNAL_FILES = 3

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_CONVERGENCE = 4
EXIT_IO = 5


class RunError(Exception):
    """Exception raised for command workflow errors."""
    exit_code = 1


class UsageRunError(RunError):
    """Exception raised for invalid command inputs."""
    exit_code = EXIT_USAGE


class DataRunError(RunError):
    """Exception raised when the data cannot be calibrated."""
    exit_code = EXIT_DATA


class ConvergenceRunError(RunError):
    """Exception raised when the crosstalk fit does not converge."""
    exit_code = EXIT_CONVERGENCE


class InputOutputRunError(RunError):
    """Exception raised when an input or output file cannot be accessed."""
    exit_code = EXIT_IO


def signal_record_name(index: int) -> str:
    return f"signal_{index:03d}.txt"


@contextmanager
def _run_errors(context: str) -> Iterator[None]:
    """Translate library errors into RunError subclasses prefixed with ``context``."""
    try:
        yield
    except RunError:
        raise
    except ConvergenceError as e:
        raise ConvergenceRunError(f"{context}: {str(e)}") from e
    except (HistogramFileError, ReportFileError) as e:
        if isinstance(e.__cause__, OSError):
            raise InputOutputRunError(f"{context}: {str(e)}") from e
        raise DataRunError(f"{context}: {str(e)}") from e
    except OSError as e:
        raise InputOutputRunError(f"{context}: {str(e)}") from e
    except (HistogramError, ModelError, SimulationError, FitError, ConfigError) as e:
        raise DataRunError(f"{context}: {str(e)}") from e


def intensity_grid(start: float, stop: float, count: int, geometric: bool = False) -> List[float]:
    """
    Mean photon numbers of an intensity sweep, ``start:stop:count``.

    Raises:
        UsageRunError: If the grid is empty or a geometric grid touches zero
    """
    if count < 1:
        raise UsageRunError(f"Intensity sweep needs a positive point count, got {count}")
    if start < 0 or stop < 0:
        raise UsageRunError(f"Mean photon numbers must be non-negative, got {start}:{stop}")
    if count == 1:
        return [float(start)]
    if geometric:
        if start <= 0 or stop <= 0:
            raise UsageRunError("A geometric sweep needs positive start and stop")
        return [float(mean) for mean in np.geomspace(start, stop, count)]
    return [float(mean) for mean in np.linspace(start, stop, count)]


def run_simulate(
    plan: SimulationPlan,
    out_dir: PathLike,
    workers: Optional[int] = None,
    log_callback: Optional[LogCallback] = None,
) -> Dict[str, Any]:
    """
    Simulate an intensity sweep (and optionally a dark run) into record files.

    Args:
        plan: Detector, source, trigger count, seed and sweep
        out_dir: Output directory; receives one record file per intensity,
            ``dark.txt`` when a dark run is requested, and ``manifest.yaml``
        workers: Simulation threads; the outputs do not depend on it
        log_callback: Progress callback, print by default

    Returns:
        The manifest mapping that was written

    Raises:
        RunError: On invalid configuration, data or I/O failures
    """
    log = log_callback or print
    out = Path(out_dir)
    logger.debug(f"Simulation plan: {plan.to_dict()}")

    entries = []
    with _run_errors("simulate"):
        k_max = Config.get_histogram_settings()["k_max"]
        runs = sweep_runs(plan.base, plan.means)
        for index, run in enumerate(runs):
            log(f"🔄 Simulating mean photons {run.source.mean_photons:.6g} ({index + 1}/{len(runs)})")
            outcome = simulate_run_with_stats(run, workers=workers, k_max=k_max)
            name = signal_record_name(index)
            RecordFile(out / name).write(
                outcome.records,
                comments=[f"mean_photons={run.source.mean_photons!r} seed={run.seed}"],
            )
            entries.append({
                "file": name,
                "mean_photons": float(run.source.mean_photons),
                "seed": int(run.seed),
                "saturated_triggers": int(outcome.saturated_triggers),
            })

        manifest: Dict[str, Any] = {
            "command": "simulate",
            **plan.to_dict(),
            "k_max": k_max,
            "signals": entries,
        }

        if plan.dark_triggers > 0:
            dark_run = replace(
                plan.base.with_source(0.0, derive_seed(plan.base.seed, 0, DARK_FAMILY)),
                n_triggers=plan.dark_triggers,
            )
            log(f"🔄 Simulating dark run ({plan.dark_triggers} triggers)")
            outcome = simulate_run_with_stats(dark_run, workers=workers, k_max=k_max)
            RecordFile(out / DARK_RECORD_NAME).write(outcome.records, comments=[f"dark seed={dark_run.seed}"])
            manifest["dark"] = {
                "file": DARK_RECORD_NAME,
                "seed": int(dark_run.seed),
                "saturated_triggers": int(outcome.saturated_triggers),
            }

        ReportFile(out / MANIFEST_NAME).write(manifest)

    log(f"✅ Wrote {len(entries)} record files and {MANIFEST_NAME} to {out}")
    return manifest


def load_plan(manifest_path: PathLike) -> SimulationPlan:
    """
    Read a simulation plan back from a manifest.

    Raises:
        RunError: If the manifest is missing or invalid
    """
    with _run_errors(str(manifest_path)):
        try:
            return SimulationPlan.from_dict(ReportFile(manifest_path).read())
        except (ReportFileError, SimulationError) as e:
            if isinstance(e.__cause__, OSError):
                raise
            raise UsageRunError(f"{manifest_path}: invalid manifest: {str(e)}") from e


def signal_files_from_manifest(manifest_path: PathLike) -> Tuple[List[Path], Optional[Path]]:
    """Signal record files and the dark record file (if any) listed in a manifest."""
    with _run_errors(str(manifest_path)):
        data = ReportFile(manifest_path).read()
    base = Path(manifest_path).parent
    try:
        signals = [base / entry["file"] for entry in data["signals"]]
    except (KeyError, TypeError) as e:
        raise UsageRunError(f"{manifest_path}: manifest lists no signal files") from e
    dark = data.get("dark")
    return signals, (base / dark["file"]) if isinstance(dark, dict) else None


def run_calibrate_g2(
    signal_paths: Sequence[PathLike],
    dark_path: Optional[PathLike],
    out_dir: PathLike,
    g0: float = 1.0,
    g0_sigma: float = 0.0,
    bootstrap_b: Optional[int] = None,
    subtract_mode: str = "deconvolve",
    seed: int = 0,
    order: int = 2,
    log_callback: Optional[LogCallback] = None,
) -> Dict[str, Any]:
    """
    Calibrate crosstalk from the g2 intensity dependence.

    Writes ``points.tsv`` (mu_ct, g2, sigma per file) and ``g2_report.yaml``.
    The bootstrap of point i is seeded from (seed, i).

    Returns:
        The report mapping that was written

    Raises:
        UsageRunError: If fewer than three signal files are given
        ConvergenceRunError: If the fit does not converge
        RunError: On data or I/O failures, with the offending file named
    """
    log = log_callback or print
    out = Path(out_dir)
    if len(signal_paths) < MIN_SIGNAL_FILES:
        raise UsageRunError(
            f"g2 calibration needs at least {MIN_SIGNAL_FILES} signal files, got {len(signal_paths)}"
        )

    with _run_errors("calibrate g2"):
        k_max = Config.get_histogram_settings()["k_max"]
        resamples = bootstrap_b if bootstrap_b is not None else Config.get_bootstrap_settings()["resamples"]
        fit_settings = Config.get_fit_settings()
        thresholds = Config.get_validity_thresholds()

    dark = None
    if dark_path is not None:
        with _run_errors(str(dark_path)):
            dark = load_distribution(dark_path, k_max=k_max)

    points = []
    point_entries = []
    for index, path in enumerate(signal_paths):
        log(f"🔄 Estimating g2 for {path} ({index + 1}/{len(signal_paths)})")
        with _run_errors(str(path)):
            point = estimate_g2_point(
                load_distribution(path, k_max=k_max),
                dark=dark,
                bootstrap_b=resamples,
                seed=derive_seed(seed, index, POINT_FAMILY),
                subtract_mode=subtract_mode,
            )
        points.append(point)
        point_entries.append({
            "file": str(path),
            "mu_ct": float(point.mu_ct),
            "g2": float(point.g2),
            "sigma": float(point.sigma),
            "rejected": point.rejected,
        })

    with _run_errors("calibrate g2"):
        write_columns(
            out / POINTS_NAME,
            ("mu_ct", "g2", "sigma"),
            [(pt.mu_ct, pt.g2, pt.sigma) for pt in points],
        )
        try:
            fit = fit_crosstalk(
                points,
                g0=g0,
                g0_sigma=g0_sigma,
                order=order,
                max_iterations=fit_settings["max_iterations"],
                damping=fit_settings["damping"],
            )
        except TooFewPointsError as e:
            raise DataRunError(f"calibrate g2: {str(e)}") from e
        validity = validity_check(fit.p_hat, thresholds=thresholds, order=order)

        report = {
            "command": "calibrate-g2",
            "inputs": {
                "signals": [str(path) for path in signal_paths],
                "dark": None if dark_path is None else str(dark_path),
            },
            "settings": {
                "g0": float(g0),
                "g0_sigma": float(g0_sigma),
                "bootstrap": int(resamples),
                "subtract_mode": subtract_mode,
                "seed": int(seed),
                "order": int(order),
                "k_max": int(k_max),
                "max_iterations": int(fit_settings["max_iterations"]),
                "damping": float(fit_settings["damping"]),
                "validity_warn": float(thresholds["warn"]),
                "validity_fail": float(thresholds["fail"]),
            },
            "points": point_entries,
            "fit": fit.to_dict(),
            "validity": {"ratio": float(validity.ratio), "verdict": validity.verdict},
        }
        ReportFile(out / G2_REPORT_NAME).write(report)

    flag = " (pinned at boundary)" if fit.at_boundary else ""
    log(
        f"✅ p = {fit.p_hat:.5f} ± {fit.p_stderr:.5f}{flag}, "
        f"p+2p² = {fit.aggregate:.5f} ± {fit.aggregate_stderr:.5f}, COD = {fit.cod:.5f}"
    )
    return report


def run_calibrate_dark(
    dark_path: PathLike,
    out_dir: PathLike,
    log_callback: Optional[LogCallback] = None,
) -> Dict[str, Any]:
    """
    Calibrate crosstalk from the single-count deficit of dark triggers.

    Writes ``dark_report.yaml`` with the mean dark count, p_DC and its error.

    Raises:
        RunError: On saturated or empty dark data, or I/O failures
    """
    log = log_callback or print
    out = Path(out_dir)
    with _run_errors(str(dark_path)):
        k_max = Config.get_histogram_settings()["k_max"]
        calibration = dark_crosstalk_probability(load_distribution(dark_path, k_max=k_max))
        report = {
            "command": "calibrate-dark",
            "inputs": {"dark": str(dark_path)},
            "settings": {"k_max": int(k_max)},
            "dark": {
                "n_triggers": int(calibration.n_triggers),
                "mean_dark": float(calibration.mean_dark),
                "p_dc": float(calibration.p_dc),
                "p_dc_stderr": float(calibration.p_dc_stderr),
                "error_convention": "1 sigma",
            },
        }
        ReportFile(out / DARK_REPORT_NAME).write(report)

    log(f"✅ <N>_DC = {calibration.mean_dark:.5g}, p_DC = {calibration.p_dc:.4f} ± {calibration.p_dc_stderr:.4f}")
    return report


def _read_pair(g2_report: PathLike, dark_report: PathLike) -> Tuple[FitResult, DarkCalibration]:
    with _run_errors(str(g2_report)):
        data = ReportFile(g2_report).read()
        if "fit" not in data:
            raise DataRunError(f"{g2_report}: not a g2 calibration report")
        fit = FitResult.from_dict(data["fit"])
    with _run_errors(str(dark_report)):
        data = ReportFile(dark_report).read()
        try:
            dark = data["dark"]
            calibration = DarkCalibration(
                mean_dark=float(dark["mean_dark"]),
                p_dc=float(dark["p_dc"]),
                p_dc_stderr=float(dark["p_dc_stderr"]),
                n_triggers=int(dark["n_triggers"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise DataRunError(f"{dark_report}: not a dark calibration report") from e
    return fit, calibration


def run_compare(
    pairs: Sequence[Tuple[PathLike, PathLike]],
    values: Sequence[Tuple[float, float, float, float]],
    out_dir: PathLike,
    log_callback: Optional[LogCallback] = None,
) -> Dict[str, Any]:
    """
    Compare g2-method aggregates with dark-count estimates.

    Args:
        pairs: (g2 report, dark report) paths
        values: Literal (aggregate, aggregate error, p_dc, p_dc error) rows
        out_dir: Receives ``compare_report.yaml`` and, for more than one
            comparison, the plot-ready ``series.tsv``

    Raises:
        UsageRunError: If nothing is given to compare
    """
    log = log_callback or print
    out = Path(out_dir)
    if not pairs and not values:
        raise UsageRunError("Nothing to compare: give --pair or --values")

    comparisons = []
    for g2_report, dark_report in pairs:
        fit, calibration = _read_pair(g2_report, dark_report)
        source = {"g2_report": str(g2_report), "dark_report": str(dark_report)}
        comparisons.append((source, compare_methods(fit, calibration)))
    for row in values:
        comparisons.append(({"values": [float(v) for v in row]}, compare_values(*row)))

    entries = []
    for source, comparison in comparisons:
        verdict = "consistent" if comparison.consistent else "inconsistent"
        log(
            f"{'✅' if comparison.consistent else '⚠️'} p+2p² = {comparison.aggregate:.4f} ± {comparison.aggregate_stderr:.4f} "
            f"vs p_DC = {comparison.p_dc:.4f} ± {comparison.p_dc_stderr:.4f}: "
            f"{comparison.n_sigma:.2f}σ, {verdict} at 2σ"
        )
        entries.append({**source, **comparison.to_dict()})

    with _run_errors("compare"):
        ReportFile(out / COMPARE_REPORT_NAME).write({"command": "compare", "comparisons": entries})
        if len(comparisons) > 1:
            write_columns(
                out / SERIES_NAME,
                ("aggregate", "aggregate_stderr", "p_dc", "p_dc_stderr"),
                [(c.aggregate, c.aggregate_stderr, c.p_dc, c.p_dc_stderr) for _, c in comparisons],
            )
    return {"comparisons": entries}
