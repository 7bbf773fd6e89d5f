"""Experiment configuration, sweeps, metrics and artifact emission."""

from dynalab.harness.config import (AlgorithmEntry, ExperimentConfig, load_config,
                                    parse_config, preset_names, sample_alphas)
from dynalab.harness.heatmap import emit_heatmap, read_csv_grid, read_pgm, value_grid
from dynalab.harness.metrics import compute_auc, mean_and_stderr
from dynalab.harness.oracle import value_iteration_oracle
from dynalab.harness.sweep import SettingResult, SweepResult, run_experiment, write_outputs

__all__ = [
    "AlgorithmEntry", "ExperimentConfig", "load_config", "parse_config", "preset_names",
    "sample_alphas", "emit_heatmap", "read_csv_grid", "read_pgm", "value_grid",
    "compute_auc", "mean_and_stderr", "value_iteration_oracle", "SettingResult",
    "SweepResult", "run_experiment", "write_outputs",
]
