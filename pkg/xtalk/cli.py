"""
Command Line Interface for the Xtalk toolkit.
"""

import sys
import logging
from functools import wraps
from typing import Any, Dict, Optional, Tuple

import click
from click.core import ParameterSource

logging.basicConfig(
    level=logging.WARNING,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

from xtalk import __version__
from xtalk.histogram import SUBTRACTION_MODES
from xtalk.runs import (
    RunError,
    SimulationPlan,
    intensity_grid,
    load_plan,
    run_calibrate_dark,
    run_calibrate_g2,
    run_compare,
    run_simulate,
    signal_files_from_manifest,
)
from xtalk.simulator import (
    CASCADE_MODES,
    DetectorConfig,
    RunConfig,
    SimulationError,
    SourceConfig,
)

SEED_RANGE = click.IntRange(0, 2 ** 64 - 1)

# CLI source names and the statistics they select
SOURCES = {
    "coherent": "coherent",
    "thermal": "thermal-single-mode",
}

# Simulation flags that may override a manifest given with --config
SIMULATION_FLAGS = (
    "pixels", "eta", "p", "dark", "means", "geometric",
    "triggers", "seed", "cascade_mode", "source", "dark_triggers",
)
REQUIRED_SIMULATION_FLAGS = ("pixels", "eta", "p", "means", "triggers", "seed")


def validate_means(ctx, param, value: Optional[str]) -> Optional[Tuple[float, float, int]]:
    """Parse ``start:stop:count`` or a single mean photon number."""
    if value is None:
        return None
    parts = value.split(":")
    try:
        if len(parts) == 1:
            return float(parts[0]), float(parts[0]), 1
        if len(parts) == 3:
            return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        pass
    raise click.BadParameter(f"Expected start:stop:count or a single value, got {value!r}")


def common_options(func):
    """Decorator that adds common options to all commands."""
    @click.option("--debug", is_flag=True, help="Enable debug logging")
    @wraps(func)
    def wrapper(*args, **kwargs):
        if kwargs.get("debug"):
            logging.getLogger().setLevel(logging.DEBUG)
            click.echo("Debug logging enabled", err=True)
        return func(*args, **kwargs)
    return wrapper


def handle_run_errors(func):
    """Decorator that reports workflow errors and exits with their code."""
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except RunError as e:
            click.echo(f"❌ {str(e)}", err=True)
            sys.exit(e.exit_code)
    return wrapper


@click.group()
@click.version_option(version=__version__)
@common_options
def cli(debug: bool):
    """Xtalk - optical crosstalk calibration for multi-pixel photon counters."""
    pass


def _simulation_plan(config_path: Optional[str], flags: Dict[str, Any]) -> SimulationPlan:
    """Build the plan from flags, on top of a manifest when one is given."""
    ctx = click.get_current_context()
    if config_path:
        plan = load_plan(config_path)
        detector, source = plan.base.detector, plan.base.source
        values: Dict[str, Any] = {
            "pixels": detector.m,
            "eta": detector.eta,
            "p": detector.p,
            "dark": detector.dark_rate,
            "cascade_mode": detector.cascade_mode,
            "source": source.statistics,
            "triggers": plan.base.n_triggers,
            "seed": plan.base.seed,
            "means": list(plan.means),
            "dark_triggers": plan.dark_triggers,
        }
        explicit = [
            name for name in SIMULATION_FLAGS
            if ctx.get_parameter_source(name) == ParameterSource.COMMANDLINE
        ]
    else:
        missing = [name for name in REQUIRED_SIMULATION_FLAGS if flags[name] is None]
        if missing:
            options = ", ".join("--" + name.replace("_", "-") for name in missing)
            raise click.UsageError(f"Missing option(s) {options} (or give --config)")
        values = {}
        explicit = list(SIMULATION_FLAGS)

    for name in explicit:
        if name == "means" and flags["means"] is not None:
            values["means"] = intensity_grid(*flags["means"], geometric=flags["geometric"])
        elif name == "source":
            values["source"] = SOURCES[flags["source"]]
        elif name not in ("means", "geometric"):
            values[name] = flags[name]

    try:
        base = RunConfig(
            detector=DetectorConfig(
                m=values["pixels"],
                eta=values["eta"],
                p=values["p"],
                dark_rate=values["dark"],
                cascade_mode=values["cascade_mode"],
            ),
            source=SourceConfig(mean_photons=values["means"][0], statistics=values["source"]),
            n_triggers=values["triggers"],
            seed=values["seed"],
        )
    except SimulationError as e:
        raise click.UsageError(f"Invalid simulation configuration: {str(e)}")
    return SimulationPlan(base=base, means=tuple(values["means"]), dark_triggers=values["dark_triggers"])


@cli.command("simulate")
@click.option("--pixels", type=click.IntRange(min=1), help="Pixel count m")
@click.option("--eta", type=float, help="Photon detection efficiency")
@click.option("--p", "p", type=float, help="Per-avalanche crosstalk probability")
@click.option("--dark", type=float, default=0.0, show_default=True, help="Mean dark avalanches per trigger")
@click.option("--means", callback=validate_means, help="Mean photons: start:stop:count or a single value")
@click.option("--geometric", is_flag=True, help="Space the sweep geometrically instead of linearly")
@click.option("--triggers", type=click.IntRange(min=1), help="Triggers per intensity")
@click.option("--seed", type=SEED_RANGE, help="64-bit seed (mandatory without --config)")
@click.option("--cascade-mode", type=click.Choice(CASCADE_MODES), default="paper-truncated", show_default=True)
@click.option("--source", type=click.Choice(sorted(SOURCES)), default="coherent", show_default=True)
@click.option("--dark-triggers", type=click.IntRange(min=0), default=0, help="Also simulate a dark run of N triggers")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="Manifest of an earlier run to reproduce")
@click.option("--workers", type=click.IntRange(min=1), help="Simulation threads (outputs do not depend on it)")
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory")
@common_options
@handle_run_errors
def simulate(
    pixels: Optional[int],
    eta: Optional[float],
    p: Optional[float],
    dark: float,
    means: Optional[Tuple[float, float, int]],
    geometric: bool,
    triggers: Optional[int],
    seed: Optional[int],
    cascade_mode: str,
    source: str,
    dark_triggers: int,
    config_path: Optional[str],
    workers: Optional[int],
    out: str,
    debug: bool,
):
    """Simulate an intensity sweep into record files plus a manifest."""
    flags = {
        "pixels": pixels, "eta": eta, "p": p, "dark": dark, "means": means,
        "geometric": geometric, "triggers": triggers, "seed": seed,
        "cascade_mode": cascade_mode, "source": source, "dark_triggers": dark_triggers,
    }
    plan = _simulation_plan(config_path, flags)
    run_simulate(plan, out, workers=workers, log_callback=click.echo)


@cli.group()
@common_options
def calibrate(debug: bool):
    """Calibrate crosstalk by the g2 method or the dark-count method."""
    pass


@calibrate.command("g2")
@click.argument("signals", nargs=-1, type=click.Path(dir_okay=False))
@click.option("--manifest", type=click.Path(dir_okay=False), help="Take signal (and dark) files from a simulate manifest")
@click.option("--dark", "dark_path", type=click.Path(dir_okay=False), help="Dark record or histogram file")
@click.option("--g0", type=click.FloatRange(min=0, min_open=True), default=1.0, show_default=True)
@click.option("--g0-sigma", type=click.FloatRange(min=0), default=0.0, show_default=True)
@click.option("--bootstrap", type=click.IntRange(min=50), help="Bootstrap resamples per point")
@click.option("--subtract-mode", type=click.Choice(SUBTRACTION_MODES), default="deconvolve", show_default=True)
@click.option("--seed", type=SEED_RANGE, default=0, show_default=True, help="Bootstrap seed")
@click.option("--order", type=click.Choice(["1", "2"]), default="2", show_default=True, help="Crosstalk model order")
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory")
@common_options
@handle_run_errors
def calibrate_g2(
    signals: Tuple[str, ...],
    manifest: Optional[str],
    dark_path: Optional[str],
    g0: float,
    g0_sigma: float,
    bootstrap: Optional[int],
    subtract_mode: str,
    seed: int,
    order: str,
    out: str,
    debug: bool,
):
    """Fit p to the g2 intensity dependence of SIGNALS (at least three files)."""
    signal_paths = list(signals)
    if manifest:
        listed, listed_dark = signal_files_from_manifest(manifest)
        signal_paths += [str(path) for path in listed]
        if dark_path is None and listed_dark is not None:
            dark_path = str(listed_dark)
    run_calibrate_g2(
        signal_paths,
        dark_path,
        out,
        g0=g0,
        g0_sigma=g0_sigma,
        bootstrap_b=bootstrap,
        subtract_mode=subtract_mode,
        seed=seed,
        order=int(order),
        log_callback=click.echo,
    )


@calibrate.command("dark")
@click.argument("dark_path", type=click.Path(dir_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory")
@common_options
@handle_run_errors
def calibrate_dark(dark_path: str, out: str, debug: bool):
    """Estimate p_DC from the dark record or histogram file DARK_PATH."""
    run_calibrate_dark(dark_path, out, log_callback=click.echo)


@cli.command("compare")
@click.option("--pair", "pairs", nargs=2, multiple=True, type=click.Path(dir_okay=False),
              help="A g2 report and a dark report")
@click.option("--values", "values", nargs=4, multiple=True, type=float,
              help="Literal AGGREGATE AGGREGATE_ERR P_DC P_DC_ERR")
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory")
@common_options
@handle_run_errors
def compare(pairs: Tuple[Tuple[str, str], ...], values: Tuple[Tuple[float, ...], ...], out: str, debug: bool):
    """Compare g2-method aggregates with dark-count estimates."""
    run_compare(list(pairs), [tuple(row) for row in values], out, log_callback=click.echo)


def main():
    """Main entry point for the CLI."""
    cli()


if __name__ == "__main__":
    main()
