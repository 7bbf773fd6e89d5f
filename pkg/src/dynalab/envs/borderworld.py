"""Borderworld: a grid whose outermost ring of cells can never be entered."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from dynalab.envs.base import StepResult
from dynalab.errors import ContractError

NORTH, EAST, SOUTH, WEST = 0, 1, 2, 3
ACTION_NAMES = ("North", "East", "South", "West")
# (dx, dy); y grows downwards, so North decreases y.
DELTAS = ((0, -1), (1, 0), (0, 1), (-1, 0))


class GridPos(NamedTuple):
    x: int
    y: int


class Borderworld:
    """Deterministic four-action grid with an unreachable one-cell border.

    Moving into the border (or off the grid) leaves the agent where it is.
    Entering the goal pays 1 and ends the episode; every other transition
    pays 0.
    """

    name = "borderworld"
    tabular = True
    n_actions = 4
    state_dim = 2

    def __init__(self, width: int = 12, height: int = 12, start: tuple[int, int] = (1, 1),
                 rng: np.random.Generator | None = None):
        if width < 3 or height < 3:
            raise ContractError("Borderworld needs at least a 3x3 grid")
        self.width = width
        self.height = height
        self.goal = GridPos(width // 2, height // 2)
        self.start = GridPos(*start)
        self.rng = rng
        cells = self.enumerate_states()
        self.unreachable_set = frozenset(p for p in cells if self.is_border(p))
        self.reachable_set = frozenset(p for p in cells if not self.is_border(p))
        if self.start not in self.reachable_set or self.start == self.goal:
            raise ContractError(f"start {self.start} must be a reachable non-goal cell")
        self.low = np.zeros(2)
        self.high = np.array([width - 1, height - 1], dtype=float)
        self.scale_low, self.scale_high = self.low, self.high
        self.reward_range = (0.0, 1.0)
        self.agent = self.start
        self.done = True

    # geometry -----------------------------------------------------------

    def in_grid(self, pos) -> bool:
        return 0 <= pos[0] < self.width and 0 <= pos[1] < self.height

    def is_border(self, pos) -> bool:
        x, y = pos
        return x == 0 or y == 0 or x == self.width - 1 or y == self.height - 1

    def is_terminal(self, pos) -> bool:
        return (pos[0], pos[1]) == self.goal

    def in_bounds(self, pos) -> bool:
        return self.in_grid(pos)

    @staticmethod
    def shift(pos, action: int) -> GridPos:
        dx, dy = DELTAS[action]
        return GridPos(pos[0] + dx, pos[1] + dy)

    def index(self, pos) -> int:
        return pos[1] * self.width + pos[0]

    def enumerate_states(self) -> list[GridPos]:
        """Every cell, border included, in row-major order."""
        return [GridPos(x, y) for y in range(self.height) for x in range(self.width)]

    def encode(self, pos) -> np.ndarray:
        return np.array(pos, dtype=float)

    # dynamics -----------------------------------------------------------

    def true_step(self, pos, action: int) -> tuple[GridPos, float, bool]:
        """Ground-truth transition from a reachable cell, without touching the agent."""
        nxt = self.shift(pos, action)
        if not self.in_grid(nxt) or self.is_border(nxt):
            nxt = GridPos(*pos)
        terminal = nxt == self.goal
        return nxt, (1.0 if terminal else 0.0), terminal

    def reset(self) -> GridPos:
        self.agent = self.start
        self.done = False
        return self.agent

    def step(self, action: int) -> StepResult:
        if not 0 <= action < self.n_actions:
            raise ContractError(f"action {action} out of range 0..{self.n_actions - 1}")
        if self.done:
            raise ContractError("step() called on a terminated episode; call reset()")
        nxt, reward, terminal = self.true_step(self.agent, action)
        self.agent = nxt
        self.done = terminal
        return StepResult(nxt, reward, terminal)
