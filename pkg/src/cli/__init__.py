"""
CLI Module

Experiment configuration, the seeded shot runner, per-run metrics and the
click command group
"""

from .config import ExperimentConfig, load_config
from .main import cli, main
from .metrics import RunMetrics
from .runner import ShotReport, WireReport, build_experiment, oracle_sweep, run_batch, run_shot, summarize

__all__ = [
    "ExperimentConfig",
    "RunMetrics",
    "ShotReport",
    "WireReport",
    "build_experiment",
    "cli",
    "load_config",
    "main",
    "oracle_sweep",
    "run_batch",
    "run_shot",
    "summarize",
]
