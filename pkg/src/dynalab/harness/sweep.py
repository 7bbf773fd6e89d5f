"""Multi-seed sweeps, aggregation and CSV output."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from dynalab.agent import LOG_COLUMNS, RunLog, run
from dynalab.harness.config import AlgorithmEntry, ExperimentConfig
from dynalab.harness.heatmap import emit_heatmap
from dynalab.harness.metrics import compute_auc, mean_and_stderr

log = logging.getLogger(__name__)

SUMMARY_COLUMNS = ("variant", "alpha", "beta", "seed", "auc", "final_cumulative_reward",
                   "steps_completed", "aborted", "planning_updates",
                   "hallucinated_bootstrap_count", "simulated_bootstrap_count",
                   "mean_abs_delta", "diagnostic")


@dataclass
class SettingResult:
    entry: AlgorithmEntry
    alpha: float
    beta: float
    runs: list
    mean_curve: np.ndarray
    stderr_curve: np.ndarray
    aucs: np.ndarray
    finals: np.ndarray

    @property
    def label(self) -> str:
        return self.entry.label

    @property
    def completed(self) -> list:
        return [r for r in self.runs if not r.aborted]

    @property
    def auc_mean(self) -> float:
        return float(self.aucs.mean()) if self.aucs.size else float("nan")

    @property
    def auc_stderr(self) -> float:
        if self.aucs.size < 2:
            return 0.0
        return float(self.aucs.std(ddof=1) / np.sqrt(self.aucs.size))

    @property
    def final_mean(self) -> float:
        return float(self.finals.mean()) if self.finals.size else float("nan")


@dataclass
class SweepResult:
    config: ExperimentConfig
    settings: list = field(default_factory=list)

    @property
    def runs(self) -> list[RunLog]:
        return [r for s in self.settings for r in s.runs]

    def best(self) -> dict:
        """Best-alpha setting per (label, beta), by mean AUC over completed runs."""
        out: dict = {}
        for s in self.settings:
            if not s.aucs.size:
                continue
            key = (s.label, s.beta)
            if key not in out or s.auc_mean > out[key].auc_mean:
                out[key] = s
        return out

    def best_by_label(self) -> dict:
        """Best (alpha, beta) setting per algorithm label, by mean AUC."""
        out: dict = {}
        for (label, _beta), s in self.best().items():
            if label not in out or s.auc_mean > out[label].auc_mean:
                out[label] = s
        return out

    def setting(self, label: str, alpha: float, beta: float) -> SettingResult:
        for s in self.settings:
            if s.label == label and s.alpha == alpha and s.beta == beta:
                return s
        raise KeyError((label, alpha, beta))


def _execute(task):
    spec, seed = task
    return run(spec, seed)


def _aggregate(entry, alpha, beta, runs) -> SettingResult:
    done = [r for r in runs if not r.aborted]
    if len(done) < len(runs):
        log.warning("%s alpha=%g beta=%g: %d of %d runs aborted; aggregating the rest",
                    entry.label, alpha, beta, len(runs) - len(done), len(runs))
    if done:
        mean, se = mean_and_stderr([r.cumulative_reward for r in done])
    else:
        mean, se = np.zeros(0), np.zeros(0)
    aucs = np.array([compute_auc(r.cumulative_reward) for r in done])
    finals = np.array([r.total_reward for r in done])
    return SettingResult(entry, alpha, beta, list(runs), mean, se, aucs, finals)


def run_experiment(cfg: ExperimentConfig, parallel: int = 1) -> SweepResult:
    """Run every (setting, seed) pair and aggregate per setting."""
    settings = list(cfg.settings())
    tasks = [(cfg.run_spec(e, a, b), seed) for e, a, b in settings for seed in cfg.seeds]
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            logs = list(pool.map(_execute, tasks))
    else:
        logs = [_execute(t) for t in tasks]
    result = SweepResult(cfg)
    k = len(cfg.seeds)
    for i, (entry, alpha, beta) in enumerate(settings):
        result.settings.append(_aggregate(entry, alpha, beta, logs[i * k:(i + 1) * k]))
    return result


def _header(cfg: ExperimentConfig) -> str:
    return "".join(f"# {line}\n" for line in cfg.echo())


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, cfg: ExperimentConfig, columns, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(_header(cfg))
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def run_filename(label: str, alpha_index: int, beta: float, seed: int) -> str:
    return f"{label.replace('@', '_beta')}_a{alpha_index:02d}_b{beta:g}_s{seed}.csv"


def write_outputs(result: SweepResult, out_dir, heatmaps: bool = False) -> Path:
    """Write summary, per-setting, best-alpha, curve and per-run CSV files."""
    cfg = result.config
    out = Path(out_dir)
    alphas = cfg.resolved_alphas()
    summary, per_setting, curves = [], [], []
    for s in result.settings:
        for r in s.runs:
            st = r.stats
            auc = compute_auc(r.cumulative_reward) if len(r.cumulative_reward) else float("nan")
            summary.append((s.label, s.alpha, s.beta, r.seed, auc, r.total_reward,
                            len(r.cumulative_reward), int(r.aborted), st.updates,
                            st.hallucinated_bootstraps, st.simulated_bootstraps,
                            st.mean_abs_delta, r.diagnostic))
            name = run_filename(s.label, alphas.index(s.alpha), s.beta, r.seed)
            _write_csv(out / "runs" / name, cfg, LOG_COLUMNS, r.rows)
        per_setting.append((s.label, s.alpha, s.beta, len(s.runs), len(s.runs) - len(s.completed),
                            s.auc_mean, s.auc_stderr, s.final_mean))
        if s.mean_curve.size:
            every = cfg.base.log_every
            for t in range(every, s.mean_curve.size + 1, every):
                curves.append((s.label, s.alpha, s.beta, t,
                               float(s.mean_curve[t - 1]), float(s.stderr_curve[t - 1])))
    _write_csv(out / "summary.csv", cfg, SUMMARY_COLUMNS, summary)
    _write_csv(out / "settings.csv", cfg,
               ("variant", "alpha", "beta", "runs", "aborted", "auc_mean", "auc_stderr",
                "final_mean"), per_setting)
    _write_csv(out / "curves.csv", cfg,
               ("variant", "alpha", "beta", "step", "mean_cumulative_reward", "stderr"), curves)
    best = [(label, beta, s.alpha, s.auc_mean, s.final_mean)
            for (label, beta), s in result.best().items()]
    _write_csv(out / "best_alpha.csv", cfg,
               ("variant", "beta", "best_alpha", "auc_mean", "final_mean"), best)
    if heatmaps:
        for (label, beta), s in result.best().items():
            for r in s.runs:
                if r.env is not None and getattr(r.env, "tabular", False):
                    name = run_filename(label, alphas.index(s.alpha), beta, r.seed)
                    emit_heatmap(r.qf, r.env, out / "heatmaps" / name)
    return out
