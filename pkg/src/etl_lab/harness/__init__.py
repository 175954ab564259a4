"""Experiment configuration, batch execution and summaries."""

from .config import ExperimentConfig, load_config, parse_config
from .experiments import OUTPUT_DIR_ENV, run_experiment, run_recovery_protocol, run_tournament
from .summary import SchemaError, summarize

__all__ = [
    "ExperimentConfig",
    "OUTPUT_DIR_ENV",
    "SchemaError",
    "load_config",
    "parse_config",
    "run_experiment",
    "run_recovery_protocol",
    "run_tournament",
    "summarize",
]
