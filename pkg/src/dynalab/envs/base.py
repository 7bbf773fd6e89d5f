"""Shared environment types."""

from __future__ import annotations

from typing import Any, NamedTuple

import numpy as np

from dynalab.errors import ContractError, UnsupportedOperation


class StepResult(NamedTuple):
    next_state: Any
    reward: float
    terminal: bool


class ContinuousEnv:
    """Base class for the vector-state benchmark environments.

    Subclasses set ``low``/``high`` (hard bounds every non-terminal state
    respects) and ``scale_low``/``scale_high`` (the typical operating range,
    used for input normalisation and tile coding; values outside are clipped).
    """

    name = "continuous"
    tabular = False
    n_actions = 0
    state_dim = 0
    low: np.ndarray
    high: np.ndarray
    scale_low: np.ndarray
    scale_high: np.ndarray
    reward_range: tuple[float, float] = (-1.0, 1.0)
    # Mean episode return over recent episodes counted as "solved" by the
    # feature pretrainer; None disables the check.
    solved_return: float | None = None

    def __init__(self, rng: np.random.Generator | None = None):
        self.rng = rng if rng is not None else np.random.default_rng()
        self.state: np.ndarray | None = None
        self.done = True

    def reset(self) -> np.ndarray:
        self.state = self._initial_state()
        self.done = False
        return self.state.copy()

    def step(self, action: int) -> StepResult:
        if not 0 <= action < self.n_actions:
            raise ContractError(f"action {action} out of range 0..{self.n_actions - 1}")
        if self.done or self.state is None:
            raise ContractError("step() called on a terminated episode; call reset()")
        next_state, reward = self._dynamics(self.state, action)
        terminal = self.is_terminal(next_state)
        self.state = next_state
        self.done = terminal
        return StepResult(next_state.copy(), float(reward), terminal)

    def in_bounds(self, state) -> bool:
        s = np.asarray(state)
        return bool(np.all(s >= self.low) and np.all(s <= self.high))

    def enumerate_states(self):
        raise UnsupportedOperation(f"{self.name} has a continuous state space")

    def encode(self, state) -> np.ndarray:
        return np.asarray(state, dtype=float)

    # subclass hooks
    def _initial_state(self) -> np.ndarray:
        raise NotImplementedError

    def _dynamics(self, state: np.ndarray, action: int) -> tuple[np.ndarray, float]:
        raise NotImplementedError

    def is_terminal(self, state) -> bool:
        raise NotImplementedError
