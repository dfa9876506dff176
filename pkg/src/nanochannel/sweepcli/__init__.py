"""Sweeps, figure reproduction, plotting and the command-line interface."""

from .config import ConfigError, RunConfig, load_config, parse_config
from .figures import FIGURES, reproduce_figure
from .plot import PlotError, render_svg
from .sweep import CSV_COLUMNS, SweepRecord, SweepSpec, run_sweep

__all__ = [
    "CSV_COLUMNS",
    "ConfigError",
    "FIGURES",
    "PlotError",
    "RunConfig",
    "SweepRecord",
    "SweepSpec",
    "load_config",
    "parse_config",
    "render_svg",
    "reproduce_figure",
    "run_sweep",
]
