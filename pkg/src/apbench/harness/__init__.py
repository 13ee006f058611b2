"""Configuration, fixtures, experiments and report emission."""
from .config import ConfigError, ExperimentConfig, load_config
from .experiments import (
    COMMANDS, cmd_balanced, cmd_lemma_lt, cmd_signatures, cmd_theorem1, cmd_theorem3, cmd_verify,
)
from .report import Check, RunReport, Table, emit, load_report, write_csv

__all__ = [
    "ConfigError", "ExperimentConfig", "load_config", "COMMANDS", "cmd_balanced", "cmd_lemma_lt",
    "cmd_signatures", "cmd_theorem1", "cmd_theorem3", "cmd_verify", "Check", "RunReport", "Table",
    "emit", "load_report", "write_csv",
]
