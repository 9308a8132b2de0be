"""Experiment runner: configs, artifacts, reports and the ``lab`` command."""
from .artifacts import Criterion, format_value, write_csv
from .config import ExperimentConfig, load_config, resolve
from .experiments import EXPERIMENTS
from .report import emit_report
from .runner import run_experiment

__all__ = ["Criterion", "EXPERIMENTS", "ExperimentConfig", "emit_report", "format_value", "load_config",
           "resolve", "run_experiment", "write_csv"]
