"""Experiment harness: configuration, evaluation runs, JSONL records and reports."""

from planeval.harness.config import ExperimentConfig, build_config, load_config_file
from planeval.harness.dataset import generate_dataset
from planeval.harness.records import (
    SCHEMA_VERSION,
    EvalRecord,
    JsonlWriter,
    load_records,
    regrade,
)
from planeval.harness.report import summarize, write_report
from planeval.harness.runner import run_experiment

__all__ = [
    "SCHEMA_VERSION",
    "EvalRecord",
    "ExperimentConfig",
    "JsonlWriter",
    "build_config",
    "generate_dataset",
    "load_config_file",
    "load_records",
    "regrade",
    "run_experiment",
    "summarize",
    "write_report",
]
