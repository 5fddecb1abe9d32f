"""Configuration-driven experiment runner."""
from .config import ConfigError, ExperimentConfig, StateConfig, load_config, parse_config
from .report import ComparisonReport, read_csv, write_csv
from .runner import build_state, compute, converge, fig3_configs, reproduce_fig3, run

__all__ = [
    "ComparisonReport", "ConfigError", "ExperimentConfig", "StateConfig", "build_state",
    "compute", "converge", "fig3_configs", "load_config", "parse_config", "read_csv",
    "reproduce_fig3", "run", "write_csv",
]
