"""Experiment harness: data, configs, runs, grids, plots and the check battery."""

from .config import ConfigError, ExperimentConfig, ModelSpec, OptimizerSpec, ProblemSpec
from .data import ParseError, load_ethanol, standardize, synth_gaussian, synth_illcond, write_batch
from .plot import emit_plot
from .runner import DEFAULT_RATES, GridResult, RunResult, execute, grid_search, run_experiment
from .suite import verify_suite

__all__ = [
    "ConfigError",
    "DEFAULT_RATES",
    "ExperimentConfig",
    "GridResult",
    "ModelSpec",
    "OptimizerSpec",
    "ParseError",
    "ProblemSpec",
    "RunResult",
    "emit_plot",
    "execute",
    "grid_search",
    "load_ethanol",
    "run_experiment",
    "standardize",
    "synth_gaussian",
    "synth_illcond",
    "verify_suite",
]
