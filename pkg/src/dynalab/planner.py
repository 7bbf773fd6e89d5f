"""Prioritised planning over stored trajectories.

A popped trajectory is extended by one model step for every action. The
four update rules differ in which end of the trajectory they extend and in
which state-action pair they move toward which target:

=======================  ============  ===================  ===========================
variant                  extends       updates              bootstraps on
=======================  ============  ===================  ===========================
one-step-successor       newest end    newest state         new simulated successor
multi-step-successor     newest end    real anchor (s, a)   new simulated successor
one-step-predecessor     oldest end    new predecessor      previous oldest state
multi-step-predecessor   oldest end    new predecessor      newest state (always real)
=======================  ============  ===================  ===========================

Multi-step targets are the discounted sum of every reward on the extended
trajectory plus ``gamma ** len`` times the bootstrap value, without any
importance-sampling correction.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Any, NamedTuple

from dynalab.errors import ConfigError, ContractError
from dynalab.model import PREDECESSOR, SUCCESSOR, ModelPrediction, Transition

ONE_STEP_SUCCESSOR = "one-step-successor"
MULTI_STEP_SUCCESSOR = "multi-step-successor"
ONE_STEP_PREDECESSOR = "one-step-predecessor"
MULTI_STEP_PREDECESSOR = "multi-step-predecessor"
VARIANTS = (ONE_STEP_SUCCESSOR, MULTI_STEP_SUCCESSOR, ONE_STEP_PREDECESSOR, MULTI_STEP_PREDECESSOR)


@dataclass
class PlanConfig:
    alpha: float = 0.1
    gamma: float = 0.95
    beta: float = 0.5
    rho: float = 1e-4
    planning_steps: int = 10
    variant: str = MULTI_STEP_PREDECESSOR
    capacity: int = 10_000

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown planning variant {self.variant!r}")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigError(f"gamma must be in [0, 1), got {self.gamma}")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta must be in [0, 1], got {self.beta}")
        if not self.rho > 0.0:
            raise ConfigError(f"rho must be > 0, got {self.rho}")
        if self.planning_steps < 0 or self.capacity < 1:
            raise ConfigError("planning_steps must be >= 0 and capacity >= 1")

    @property
    def direction(self) -> str:
        return SUCCESSOR if self.variant.endswith("successor") else PREDECESSOR

    @property
    def multi_step(self) -> bool:
        return self.variant.startswith("multi")


@dataclass(slots=True)
class Trajectory:
    """States s_0..s_L with actions/rewards between them, oldest first.

    ``real`` marks states observed in the environment, ``hallucinated``
    marks model outputs the model itself flags as impossible, and
    ``terminal`` marks states with no successor.
    """

    states: list
    actions: list
    rewards: list
    terminal: list
    real: list
    hallucinated: list
    direction: str

    @classmethod
    def from_transition(cls, tr: Transition, direction: str) -> "Trajectory":
        return cls([tr.state, tr.next_state], [tr.action], [tr.reward], [False, tr.terminal],
                   [True, True], [False, False], direction)

    @property
    def n(self) -> int:
        """Number of model extensions applied to the real transition."""
        return len(self.states) - 2

    @property
    def real_anchor(self) -> tuple[int, int]:
        """Indices of the real transition's two states."""
        if self.direction == SUCCESSOR:
            return 0, 1
        last = len(self.states) - 1
        return last - 1, last

    def extend_forward(self, action: int, pred: ModelPrediction) -> "Trajectory":
        return Trajectory(self.states + [pred.state], self.actions + [action],
                          self.rewards + [pred.reward], self.terminal + [pred.terminal],
                          self.real + [False], self.hallucinated + [pred.hallucinated],
                          self.direction)

    def extend_backward(self, action: int, pred: ModelPrediction) -> "Trajectory":
        return Trajectory([pred.state] + self.states, [action] + self.actions,
                          [pred.reward] + self.rewards, [pred.terminal] + self.terminal,
                          [False] + self.real, [pred.hallucinated] + self.hallucinated,
                          self.direction)


@dataclass(slots=True)
class QueueEntry:
    trajectory: Trajectory
    priority: float


class PlanningQueue:
    """Bounded max-priority queue; FIFO among equal priorities.

    Kept as a list sorted by ``(priority, -insertion_no)``: the last element
    is the next pop, the first is the eviction victim (lowest priority,
    newest among ties).
    """

    def __init__(self, capacity: int = 10_000, rho: float = 0.0):
        self.capacity = capacity
        self.rho = rho
        self._items: list[tuple[float, int, QueueEntry]] = []
        self._seq = 0
        self.evictions = 0

    def __len__(self) -> int:
        return len(self._items)

    def push(self, trajectory: Trajectory, priority: float) -> None:
        if priority < self.rho:
            raise ContractError(f"priority {priority} below threshold {self.rho}")
        self._seq += 1
        bisect.insort(self._items, (priority, -self._seq, QueueEntry(trajectory, priority)))
        if len(self._items) > self.capacity:
            del self._items[0]
            self.evictions += 1

    def pop(self) -> QueueEntry | None:
        """Highest-priority entry, or None when the queue is empty."""
        if not self._items:
            return None
        return self._items.pop()[2]

    def entries(self) -> list[QueueEntry]:
        return [item[2] for item in reversed(self._items)]


class UpdateRecord(NamedTuple):
    variant: str
    state: Any
    action: int
    target: float
    delta: float
    bootstrap_value: float
    bootstrap_terminal: bool
    bootstrap_real: bool
    bootstrap_hallucinated: bool
    trajectory: Trajectory


@dataclass
class PlanStats:
    """Counters for planning updates; ``trace=True`` also keeps every event."""

    updates: int = 0
    simulated_bootstraps: int = 0
    hallucinated_bootstraps: int = 0
    abs_delta_sum: float = 0.0
    insertions: int = 0
    max_inserted_n: int = 0
    trace: bool = False
    update_log: list = field(default_factory=list)
    insert_log: list = field(default_factory=list)  # (n, priority, |delta|)

    @property
    def mean_abs_delta(self) -> float:
        return self.abs_delta_sum / self.updates if self.updates else 0.0

    def record_update(self, variant, state, action, target, delta, boot_value, boot_terminal,
                      boot_real, boot_halluc, traj):
        self.updates += 1
        self.abs_delta_sum += abs(delta)
        if not boot_terminal:
            if not boot_real:
                self.simulated_bootstraps += 1
            if boot_halluc:
                self.hallucinated_bootstraps += 1
        if self.trace:
            self.update_log.append(UpdateRecord(variant, state, action, target, delta, boot_value,
                                                boot_terminal, boot_real, boot_halluc, traj))

    def record_insert(self, traj: Trajectory, priority: float, delta: float):
        self.insertions += 1
        if traj.n > self.max_inserted_n:
            self.max_inserted_n = traj.n
        if self.trace:
            self.insert_log.append((traj.n, priority, abs(delta)))


def discounted_return(rewards, gamma: float, bootstrap: float) -> float:
    """sum_k gamma^k r_k + gamma^len * bootstrap, accumulated back to front."""
    g = bootstrap
    for r in reversed(rewards):
        g = r + gamma * g
    return g


def _bootstrap(qf, state, terminal: bool) -> float:
    return 0.0 if terminal else qf.max_value(state)


def planning_td_update_one_step_successor(qf, model, traj, action, cfg, stats=None, pred=None):
    s = traj.states[-1]
    if pred is None:
        pred = model.predict(s, action)
    ext = traj.extend_forward(action, pred)
    boot = _bootstrap(qf, pred.state, pred.terminal)
    target = pred.reward + cfg.gamma * boot
    delta = target - qf.q(s, action)
    qf.apply_td(s, action, delta, cfg.alpha)
    if stats is not None:
        stats.record_update(ONE_STEP_SUCCESSOR, s, action, target, delta, boot, pred.terminal,
                            False, pred.hallucinated, ext)
    return ext, delta


def planning_td_update_multi_step_successor(qf, model, traj, action, cfg, stats=None, pred=None):
    if pred is None:
        pred = model.predict(traj.states[-1], action)
    ext = traj.extend_forward(action, pred)
    s0, a0 = ext.states[0], ext.actions[0]
    boot = _bootstrap(qf, pred.state, pred.terminal)
    target = discounted_return(ext.rewards, cfg.gamma, boot)
    delta = target - qf.q(s0, a0)
    qf.apply_td(s0, a0, delta, cfg.alpha)
    if stats is not None:
        stats.record_update(MULTI_STEP_SUCCESSOR, s0, a0, target, delta, boot, pred.terminal,
                            False, pred.hallucinated, ext)
    return ext, delta


def planning_td_update_one_step_predecessor(qf, model, traj, action, cfg, stats=None, pred=None):
    oldest = traj.states[0]
    if pred is None:
        pred = model.predict(oldest, action)
    ext = traj.extend_backward(action, pred)
    boot = _bootstrap(qf, oldest, traj.terminal[0])
    target = pred.reward + cfg.gamma * boot
    delta = target - qf.q(pred.state, action)
    qf.apply_td(pred.state, action, delta, cfg.alpha)
    if stats is not None:
        stats.record_update(ONE_STEP_PREDECESSOR, pred.state, action, target, delta, boot,
                            traj.terminal[0], traj.real[0], traj.hallucinated[0], ext)
    return ext, delta


def planning_td_update_multi_step_predecessor(qf, model, traj, action, cfg, stats=None, pred=None):
    if pred is None:
        pred = model.predict(traj.states[0], action)
    ext = traj.extend_backward(action, pred)
    boot = _bootstrap(qf, ext.states[-1], ext.terminal[-1])
    target = discounted_return(ext.rewards, cfg.gamma, boot)
    delta = target - qf.q(pred.state, action)
    qf.apply_td(pred.state, action, delta, cfg.alpha)
    if stats is not None:
        stats.record_update(MULTI_STEP_PREDECESSOR, pred.state, action, target, delta, boot,
                            ext.terminal[-1], ext.real[-1], ext.hallucinated[-1], ext)
    return ext, delta


def predict_all(model, state, n_actions: int) -> list[ModelPrediction]:
    """One prediction per action; models may batch this into a single query."""
    batched = getattr(model, "predict_actions", None)
    if batched is not None:
        return batched(state, n_actions)
    return [model.predict(state, a) for a in range(n_actions)]


PLANNING_UPDATES = {
    ONE_STEP_SUCCESSOR: planning_td_update_one_step_successor,
    MULTI_STEP_SUCCESSOR: planning_td_update_multi_step_successor,
    ONE_STEP_PREDECESSOR: planning_td_update_one_step_predecessor,
    MULTI_STEP_PREDECESSOR: planning_td_update_multi_step_predecessor,
}


def real_step_update(qf, model, queue, transition: Transition, cfg: PlanConfig) -> float:
    """Q-learning update on a real transition, model update, and queue insertion."""
    s, a = transition.state, transition.action
    boot = _bootstrap(qf, transition.next_state, transition.terminal)
    delta = transition.reward + cfg.gamma * boot - qf.q(s, a)
    qf.apply_td(s, a, delta, cfg.alpha)
    if model is not None:
        model.update_model(transition)
    if queue is not None and abs(delta) >= cfg.rho:
        queue.push(Trajectory.from_transition(transition, cfg.direction), abs(delta))
    return delta


def plan(qf, model, queue: PlanningQueue, cfg: PlanConfig, stats: PlanStats | None = None) -> int:
    """Run up to ``cfg.planning_steps`` pops; returns the number of pops made."""
    update = PLANNING_UPDATES[cfg.variant]
    forward = cfg.direction == SUCCESSOR
    pops = 0
    for _ in range(cfg.planning_steps):
        entry = queue.pop()
        if entry is None:
            break
        pops += 1
        traj = entry.trajectory
        if forward and traj.terminal[-1]:
            continue
        decay = cfg.beta ** (traj.n + 1)
        query = traj.states[-1] if forward else traj.states[0]
        preds = predict_all(model, query, qf.n_actions)
        for action in range(qf.n_actions):
            ext, delta = update(qf, model, traj, action, cfg, stats, preds[action])
            priority = abs(delta) * decay
            if priority >= cfg.rho and not (forward and ext.terminal[-1]):
                queue.push(ext, priority)
                if stats is not None:
                    stats.record_insert(ext, priority, delta)
    return pops


def queue_push(queue: PlanningQueue, trajectory: Trajectory, priority: float) -> None:
    queue.push(trajectory, priority)


def queue_pop(queue: PlanningQueue) -> QueueEntry | None:
    return queue.pop()
