"""Catcher: move a paddle along the bottom edge to catch falling fruit."""

from __future__ import annotations

import numpy as np

from dynalab.envs.base import ContinuousEnv


class Catcher(ContinuousEnv):
    """State is (paddle x, fruit x, fruit height), all in [0, 1].

    Actions: 0 left, 1 stay, 2 right. A fruit reaching the bottom pays +1
    if it lands within ``paddle_half_width`` of the paddle and -1 otherwise;
    a miss costs a life and the episode ends when lives run out.
    """

    name = "catcher"
    n_actions = 3
    state_dim = 3
    reward_range = (-1.0, 1.0)
    solved_return = None

    def __init__(self, rng=None, paddle_speed=0.08, fall_speed=0.04, paddle_half_width=0.1,
                 lives=3):
        super().__init__(rng)
        self.paddle_speed = paddle_speed
        self.fall_speed = fall_speed
        self.paddle_half_width = paddle_half_width
        self.max_lives = lives
        self.lives = lives
        self.low = np.zeros(3)
        self.high = np.ones(3)
        self.scale_low, self.scale_high = self.low, self.high

    def _initial_state(self):
        self.lives = self.max_lives
        return np.array([0.5, self.rng.uniform(), 0.0])

    def _dynamics(self, state, action):
        paddle = float(np.clip(state[0] + (action - 1) * self.paddle_speed, 0.0, 1.0))
        fruit_x, fruit_y = float(state[1]), float(state[2]) + self.fall_speed
        reward = 0.0
        if fruit_y >= 1.0:
            if abs(fruit_x - paddle) <= self.paddle_half_width:
                reward = 1.0
            else:
                reward = -1.0
                self.lives -= 1
            fruit_x, fruit_y = float(self.rng.uniform()), 0.0
        return np.array([paddle, fruit_x, fruit_y]), reward

    def is_terminal(self, state) -> bool:
        # Termination depends on the life counter, which is not part of the
        # observation, so no observation is terminal on its own.
        return False

    def step(self, action):
        result = super().step(action)
        if self.lives <= 0:
            self.done = True
            return result._replace(terminal=True)
        return result
