"""
Runs module: the workflows behind each command, with their manifests and reports.
"""

from .core import (
    COMPARE_REPORT_NAME,
    DARK_RECORD_NAME,
    DARK_REPORT_NAME,
    G2_REPORT_NAME,
    MANIFEST_NAME,
    POINTS_NAME,
    SERIES_NAME,
    ConvergenceRunError,
    DataRunError,
    InputOutputRunError,
    RunError,
    UsageRunError,
    intensity_grid,
    load_plan,
    run_calibrate_dark,
    run_calibrate_g2,
    run_compare,
    run_simulate,
    signal_files_from_manifest,
    signal_record_name,
)
from .manifest import ReportFile, ReportFileError, SimulationPlan, write_columns

__all__ = [
    "COMPARE_REPORT_NAME",
    "DARK_RECORD_NAME",
    "DARK_REPORT_NAME",
    "G2_REPORT_NAME",
    "MANIFEST_NAME",
    "POINTS_NAME",
    "SERIES_NAME",
    "ConvergenceRunError",
    "DataRunError",
    "InputOutputRunError",
    "RunError",
    "UsageRunError",
    "intensity_grid",
    "load_plan",
    "run_calibrate_dark",
    "run_calibrate_g2",
    "run_compare",
    "run_simulate",
    "signal_files_from_manifest",
    "signal_record_name",
    "ReportFile",
    "ReportFileError",
    "SimulationPlan",
    "write_columns",
]
