"""Experiment runner, config files and command-line interface."""

from .config import dump_config, load_config, parse_config
from .runner import (DETECTORS, AdvantageReport, ExperimentConfig, MemoryReport, OracleDetector,
                     arm_schedule, build_detector, compare_to_bound, multi_pass_run, run_trials)
from .stats import wilson_interval
