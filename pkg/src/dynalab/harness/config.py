"""Flat ``key = value`` experiment configuration files."""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from dynalab.agent import ALGORITHMS, RunSpec
from dynalab.errors import ConfigError
from dynalab.planner import PlanConfig

_RUNSPEC_FIELDS = {f.name: f for f in dataclasses.fields(RunSpec)}
# Keys with a list form, parsed separately from the scalar RunSpec fields.
_SWEEP_KEYS = {"algorithm", "alpha", "beta", "seeds"}
_META_KEYS = {"name", "out", "direction", "inject", "heatmaps", "alpha_seed", "full_alpha_samples",
              "full_seeds"}
KNOWN_KEYS = (set(_RUNSPEC_FIELDS) | _SWEEP_KEYS | _META_KEYS)

_ALPHA_SAMPLE = re.compile(r"^(\d+)\s+in\s+\(\s*([-+\d.eE]+)\s*,\s*([-+\d.eE]+)\s*\]$")


@dataclass(frozen=True)
class AlgorithmEntry:
    """An algorithm name with an optional pinned beta (``one-step-predecessor@0``)."""

    algorithm: str
    beta: float | None = None

    @property
    def label(self) -> str:
        return self.algorithm if self.beta is None else f"{self.algorithm}@{self.beta:g}"


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    algorithms: list = field(default_factory=lambda: [AlgorithmEntry("multi-step-predecessor")])
    alphas: list = field(default_factory=lambda: [0.1])
    alpha_sample: tuple | None = None   # (count, low, high) for "k in (low, high]"
    alpha_seed: int = 0
    betas: list = field(default_factory=lambda: [0.5])
    seeds: list = field(default_factory=lambda: list(range(10)))
    out: str = "results"
    full_alpha_samples: int = 20
    full_seeds: int = 30
    heatmaps: bool = False
    base: RunSpec = field(default_factory=RunSpec)
    source_text: str = ""

    def resolved_alphas(self) -> list[float]:
        if self.alpha_sample is None:
            return list(self.alphas)
        count, low, high = self.alpha_sample
        return sample_alphas(count, low, high, self.alpha_seed)

    def apply_full_scale(self) -> None:
        self.seeds = list(range(self.full_seeds))
        if self.alpha_sample is not None:
            self.alpha_sample = (self.full_alpha_samples, *self.alpha_sample[1:])

    def settings(self):
        """(entry, alpha, beta) triples in a fixed order."""
        for entry in self.algorithms:
            betas = [entry.beta] if entry.beta is not None else list(self.betas)
            if entry.algorithm == "q-learning":
                betas = [0.0]
            for beta in betas:
                for alpha in self.resolved_alphas():
                    yield entry, alpha, beta

    def run_spec(self, entry: AlgorithmEntry, alpha: float, beta: float) -> RunSpec:
        return dataclasses.replace(self.base, algorithm=entry.algorithm, alpha=alpha, beta=beta)

    def echo(self) -> list[str]:
        """Every effective setting, one ``key = value`` per line."""
        lines = [f"name = {self.name}",
                 "algorithm = " + ", ".join(e.label for e in self.algorithms),
                 "alpha = " + ", ".join(repr(a) for a in self.resolved_alphas()),
                 "beta = " + ", ".join(repr(b) for b in self.betas),
                 "seeds = " + ", ".join(str(s) for s in self.seeds)]
        for key, value in dataclasses.asdict(self.base).items():
            if key not in ("algorithm", "alpha", "beta"):
                lines.append(f"{key} = {value}")
        return lines


def sample_alphas(count: int, low: float, high: float, seed: int) -> list[float]:
    """``count`` distinct step sizes drawn uniformly from (low, high]."""
    rng = np.random.default_rng(seed)
    values: list[float] = []
    while len(values) < count:
        a = float(high - (high - low) * rng.random())  # in (low, high]
        if a > low and a not in values:
            values.append(a)
    return values


def _parse_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _parse_seeds(value: str) -> list[int]:
    value = value.strip()
    if re.fullmatch(r"\d+\s*-\s*\d+", value):
        lo, hi = (int(v) for v in value.split("-"))
        return list(range(lo, hi + 1))
    items = _parse_list(value)
    if len(items) == 1 and value.startswith("count:"):
        return list(range(int(value[6:])))
    return [int(v) for v in items]


def _parse_bool(key: str, raw: str) -> bool:
    lowered = raw.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def _coerce(key: str, raw: str):
    ftype = _RUNSPEC_FIELDS[key].type
    try:
        if ftype in ("int", int):
            return int(raw)
        if ftype in ("float", float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None
    return raw


def parse_config(text: str) -> ExperimentConfig:
    cfg = ExperimentConfig(source_text=text)
    scalars = {}
    direction = None
    inject = None
    seen = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        if key == "algorithm":
            cfg.algorithms = [_parse_algorithm(v) for v in _parse_list(value)]
        elif key == "alpha":
            m = _ALPHA_SAMPLE.match(value)
            if m:
                cfg.alpha_sample = (int(m.group(1)), float(m.group(2)), float(m.group(3)))
            else:
                cfg.alphas = [float(v) for v in _parse_list(value)]
        elif key == "beta":
            cfg.betas = [float(v) for v in _parse_list(value)]
        elif key == "seeds":
            cfg.seeds = _parse_seeds(value)
        elif key == "name":
            cfg.name = value
        elif key == "out":
            cfg.out = value
        elif key == "direction":
            direction = value
        elif key == "heatmaps":
            cfg.heatmaps = _parse_bool(key, value)
        elif key == "inject":
            inject = _parse_bool(key, value)
        elif key in ("alpha_seed", "full_alpha_samples", "full_seeds"):
            setattr(cfg, key, int(value))
        else:
            scalars[key] = _coerce(key, value)
    if inject is not None:
        kind = scalars.get("model", RunSpec.model)
        if not kind.startswith("exact"):
            raise ConfigError("inject applies only to exact borderworld models")
        scalars["model"] = "exact-hallucinating" if inject else "exact"
    try:
        cfg.base = RunSpec(**scalars)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    validate(cfg, direction)
    return cfg


def _parse_algorithm(value: str) -> AlgorithmEntry:
    name, _, beta = value.partition("@")
    if name not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {name!r}; choose from {ALGORITHMS}")
    return AlgorithmEntry(name, float(beta) if beta else None)


def validate(cfg: ExperimentConfig, direction: str | None = None) -> None:
    """Check every field's range before any run starts."""
    if not cfg.algorithms or not cfg.seeds:
        raise ConfigError("need at least one algorithm and one seed")
    if cfg.alpha_sample is not None:
        count, low, high = cfg.alpha_sample
        if count < 1 or not 0.0 <= low < high <= 1.0:
            raise ConfigError(f"bad alpha sample spec {cfg.alpha_sample}")
    elif not cfg.alphas:
        raise ConfigError("need at least one alpha")
    for entry, alpha, beta in cfg.settings():
        spec = cfg.run_spec(entry, alpha, beta)
        if direction is not None and spec.planning and spec.plan_config().direction != direction:
            raise ConfigError(f"direction = {direction} conflicts with algorithm {entry.algorithm}")
        PlanConfig(alpha=alpha, gamma=spec.gamma, beta=beta, rho=spec.rho,
                   planning_steps=spec.planning_steps, capacity=spec.queue_capacity)


def preset_names() -> list[str]:
    root = resources.files("dynalab.harness") / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_config(path_or_preset: str) -> ExperimentConfig:
    """Parse a config file, or a shipped preset given by name (e.g. ``fig3-borderworld``)."""
    path = Path(path_or_preset)
    if path.is_file():
        return parse_config(path.read_text())
    preset = resources.files("dynalab.harness") / "presets" / f"{path_or_preset}.cfg"
    if preset.is_file():
        return parse_config(preset.read_text())
    raise ConfigError(f"no config file or preset named {path_or_preset!r} "
                      f"(presets: {', '.join(preset_names())})")
