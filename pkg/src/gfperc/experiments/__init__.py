"""Experiment harness: configuration, runners, persistence and the command line."""
from .config import DEFAULTS, EXPERIMENTS, ConfigError, ExperimentConfig, default_config
from .records import CSV_COLUMNS, ResultRecord, ResultSink, boolean_record
from .runners import RUNNERS, run

__all__ = ["DEFAULTS", "EXPERIMENTS", "ConfigError", "ExperimentConfig", "default_config",
           "CSV_COLUMNS", "ResultRecord", "ResultSink", "boolean_record", "RUNNERS", "run"]
