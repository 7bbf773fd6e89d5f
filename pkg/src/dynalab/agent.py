"""One seeded learning run: act, learn from the real step, plan."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from dynalab.approx.features import FeatureExtractor, PretrainConfig, pretrain_features
from dynalab.approx.tiles import TileCoder
from dynalab.envs import make_env
from dynalab.errors import ConfigError
from dynalab.model import Transition, make_model
from dynalab.planner import VARIANTS, PlanConfig, PlanningQueue, PlanStats, plan, real_step_update
from dynalab.qfunc import EpsGreedyPolicy, LinearQ, TabularQ

log = logging.getLogger(__name__)

Q_LEARNING = "q-learning"
ALGORITHMS = (Q_LEARNING, *VARIANTS)


@dataclass
class RunSpec:
    """Every setting of a single run; one point of an experiment sweep."""

    env: str = "borderworld"
    env_params: str = ""
    algorithm: str = "multi-step-predecessor"
    alpha: float = 0.1
    beta: float = 0.5
    rho: float = 1e-4
    planning_steps: int = 10
    gamma: float = 0.95
    epsilon: float = 0.1
    tie_break: str = "first"
    init: str = "optimistic"
    q0: float = 1.0
    model: str = "exact-hallucinating"
    model_lr: float = 1e-3
    model_hidden: int = 64
    features: str = "tabular"
    tilings: int = 8
    tiles: int = 8
    feature_seed: int = 0
    feature_frames: int = 50_000
    features_file: str = ""
    total_steps: int = 20_000
    episode_cap: int = 1_000
    queue_capacity: int = 10_000
    log_every: int = 100

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if self.total_steps < 0 or self.episode_cap < 1 or self.log_every < 1:
            raise ConfigError("total_steps >= 0, episode_cap >= 1 and log_every >= 1 required")
        if self.init not in ("optimistic", "zero", "normal"):
            raise ConfigError(f"unknown init mode {self.init!r}")
        if self.features not in ("tabular", "tiles", "dqn"):
            raise ConfigError(f"unknown feature source {self.features!r}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError(f"epsilon must be in [0, 1], got {self.epsilon}")
        self.plan_config()  # validates the planner ranges
        try:
            make_env(self.env, rng=None, **self.env_kwargs())
        except TypeError as exc:
            raise ConfigError(f"bad env_params {self.env_params!r}: {exc}") from None

    def env_kwargs(self) -> dict:
        """Constructor overrides from ``env_params``, e.g. "start_high=0.3; noise=0.02"."""
        kwargs = {}
        for item in filter(None, (p.strip() for p in self.env_params.split(";"))):
            key, sep, raw = (t.strip() for t in item.partition("="))
            if not sep or not key:
                raise ConfigError(f"env_params entry {item!r} is not key=value")
            try:
                kwargs[key] = int(raw) if raw.lstrip("-").isdigit() else float(raw)
            except ValueError:
                raise ConfigError(f"env_params {key}: cannot parse {raw!r}") from None
        return kwargs

    @property
    def planning(self) -> bool:
        return self.algorithm != Q_LEARNING

    def plan_config(self) -> PlanConfig:
        variant = self.algorithm if self.planning else VARIANTS[-1]
        return PlanConfig(alpha=self.alpha, gamma=self.gamma, beta=self.beta, rho=self.rho,
                          planning_steps=self.planning_steps, variant=variant,
                          capacity=self.queue_capacity)


LOG_COLUMNS = ("step", "cumulative_reward", "episodes_completed", "planning_updates",
               "hallucinated_bootstrap_count", "simulated_bootstrap_count")


@dataclass
class RunLog:
    spec: RunSpec
    seed: int
    cumulative_reward: np.ndarray
    rows: list = field(default_factory=list)
    stats: PlanStats = field(default_factory=PlanStats)
    episodes: int = 0
    episode_returns: list = field(default_factory=list)
    aborted: bool = False
    diagnostic: str = ""
    qf: object = None
    env: object = None

    @property
    def total_reward(self) -> float:
        return float(self.cumulative_reward[-1]) if len(self.cumulative_reward) else 0.0


_FEATURE_CACHE: dict = {}


def build_features(spec: RunSpec, env):
    """Feature source for linear Q; DQN extractors are cached per process."""
    if spec.features == "tiles":
        return TileCoder(env.scale_low, env.scale_high, spec.tilings, spec.tiles)
    if spec.features_file:
        return FeatureExtractor.load(spec.features_file)
    key = (spec.env, spec.env_params, spec.feature_seed, spec.feature_frames)
    if key not in _FEATURE_CACHE:
        pre_env = make_env(spec.env, rng=np.random.default_rng(spec.feature_seed),
                           **spec.env_kwargs())
        cfg = PretrainConfig(seed=spec.feature_seed, frames=spec.feature_frames,
                             episode_cap=spec.episode_cap)
        _FEATURE_CACHE[key] = pretrain_features(pre_env, cfg)
    return _FEATURE_CACHE[key]


def build_q(spec: RunSpec, env, rng: np.random.Generator):
    if env.tabular:
        if spec.features != "tabular":
            raise ConfigError(f"{spec.env} is tabular; use features = tabular")
        if spec.init == "normal":
            raise ConfigError("tabular value functions support init = optimistic | zero")
        q0 = spec.q0 if spec.init == "optimistic" else 0.0
        return TabularQ(env.enumerate_states(), env.n_actions, q0)
    if spec.features == "tabular":
        raise ConfigError(f"{spec.env} is continuous; use features = tiles | dqn")
    source = build_features(spec, env)
    if spec.init == "normal":
        return LinearQ.normal_init(source, source.n_features, env.n_actions, rng)
    if spec.init == "zero":
        return LinearQ(source, source.n_features, env.n_actions)
    raise ConfigError("linear value functions support init = normal | zero")


def build_model(spec: RunSpec, env, rng: np.random.Generator):
    if not spec.planning:
        return None
    if spec.model.startswith("exact") and not env.tabular:
        raise ConfigError(f"exact models exist only for borderworld, not {spec.env}")
    return make_model(spec.model, env, spec.plan_config().direction, rng=rng,
                      lr=spec.model_lr, hidden=spec.model_hidden)


def run(spec: RunSpec, seed: int, trace: bool = False) -> RunLog:
    """Execute exactly ``spec.total_steps`` real environment steps.

    Planning steps are not counted. A non-finite value aborts the run; the
    returned log then holds the steps completed so far and a diagnostic.
    """
    policy_rng, env_rng, model_rng, init_rng = (
        np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(4))
    env = make_env(spec.env, rng=env_rng, **spec.env_kwargs())
    qf = build_q(spec, env, init_rng)
    model = build_model(spec, env, model_rng)
    cfg = spec.plan_config()
    queue = PlanningQueue(cfg.capacity, cfg.rho) if spec.planning else None
    policy = EpsGreedyPolicy(spec.epsilon, spec.tie_break)
    stats = PlanStats(trace=trace)

    curve = np.zeros(spec.total_steps)
    runlog = RunLog(spec, seed, curve, stats=stats, qf=qf, env=env)
    cumulative = 0.0
    ep_return, ep_len = 0.0, 0
    state = env.reset() if spec.total_steps else None
    step = 0
    try:
        for step in range(spec.total_steps):
            action = policy.select_action(qf, state, policy_rng)
            result = env.step(action)
            transition = Transition(state, action, result.reward, result.next_state,
                                    result.terminal)
            real_step_update(qf, model, queue, transition, cfg)
            if queue is not None:
                plan(qf, model, queue, cfg, stats)
            cumulative += result.reward
            curve[step] = cumulative
            ep_return += result.reward
            ep_len += 1
            if result.terminal or ep_len >= spec.episode_cap:
                runlog.episodes += 1
                runlog.episode_returns.append(ep_return)
                ep_return, ep_len = 0.0, 0
                state = env.reset()
            else:
                state = result.next_state
            t = step + 1
            if t % spec.log_every == 0 or t == spec.total_steps:
                runlog.rows.append((t, cumulative, runlog.episodes, stats.updates,
                                    stats.hallucinated_bootstraps, stats.simulated_bootstraps))
    except FloatingPointError as exc:
        runlog.aborted = True
        runlog.diagnostic = f"step {step}: {exc}"
        runlog.cumulative_reward = curve[:step]
        log.warning("run %s seed %d aborted: %s", spec.algorithm, seed, runlog.diagnostic)
    return runlog


def evaluate_greedy(qf, env, episodes: int, episode_cap: int = 1_000) -> float:
    """Mean undiscounted return of the epsilon=0 policy, without learning."""
    if episodes <= 0:
        log.warning("evaluate_greedy called with episodes=%d; returning 0", episodes)
        return 0.0
    policy = EpsGreedyPolicy(0.0)
    total = 0.0
    for _ in range(episodes):
        state = env.reset()
        for _ in range(episode_cap):
            result = env.step(policy.greedy(qf, state))
            total += result.reward
            if result.terminal:
                break
            state = result.next_state
    return total / episodes


def spec_dict(spec: RunSpec) -> dict:
    return asdict(spec)
