"""Puddle World: noisy 2-D navigation on the unit square with two penalising puddles."""

from __future__ import annotations

import numpy as np

from dynalab.envs.base import ContinuousEnv

# Each puddle is a capsule: segment endpoints and radius.
PUDDLES = (
    ((0.10, 0.75), (0.45, 0.75), 0.1),
    ((0.45, 0.40), (0.45, 0.80), 0.1),
)
# North, East, South, West; y grows upwards here.
MOVES = np.array([[0.0, 1.0], [1.0, 0.0], [0.0, -1.0], [-1.0, 0.0]])


def _segment_distance(p, a, b) -> float:
    p, a, b = (np.asarray(v, dtype=float) for v in (p, a, b))
    ab = b - a
    t = np.clip(np.dot(p - a, ab) / np.dot(ab, ab), 0.0, 1.0)
    return float(np.linalg.norm(p - (a + t * ab)))


class PuddleWorld(ContinuousEnv):
    """Reward is -1 per step minus ``puddle_scale`` times the depth inside any puddle.

    The goal is the corner region x + y >= ``goal_threshold``. Starts are
    uniform on [0, start_high]^2 (always outside the goal).
    """

    name = "puddleworld"
    n_actions = 4
    state_dim = 2
    solved_return = None

    def __init__(self, rng=None, step_size=0.05, noise=0.01, puddle_scale=400.0,
                 goal_threshold=1.9, start_high=0.6):
        super().__init__(rng)
        self.step_size = step_size
        self.noise = noise
        self.puddle_scale = puddle_scale
        self.goal_threshold = goal_threshold
        self.start_high = start_high
        self.low = np.zeros(2)
        self.high = np.ones(2)
        self.scale_low, self.scale_high = self.low, self.high
        deepest = max(r for _, _, r in PUDDLES)
        self.reward_range = (-1.0 - puddle_scale * deepest, -1.0)

    def puddle_penalty(self, pos) -> float:
        depth = 0.0
        for a, b, radius in PUDDLES:
            depth = max(depth, radius - _segment_distance(pos, a, b))
        return self.puddle_scale * depth

    def _initial_state(self):
        return self.rng.uniform(0.0, self.start_high, size=2)

    def _dynamics(self, state, action):
        step = self.step_size * MOVES[action] + self.rng.normal(0.0, self.noise, size=2)
        nxt = np.clip(state + step, 0.0, 1.0)
        return nxt, -1.0 - self.puddle_penalty(nxt)

    def is_terminal(self, state) -> bool:
        return bool(state[0] + state[1] >= self.goal_threshold)
