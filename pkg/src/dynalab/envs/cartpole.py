"""Cart-pole balancing with the classic Barto-Sutton-Anderson physics (Euler integration)."""

from __future__ import annotations

import math

import numpy as np

from dynalab.envs.base import ContinuousEnv


class CartPole(ContinuousEnv):
    """State is (cart position, cart velocity, pole angle, pole angular velocity).

    Actions: 0 pushes left, 1 pushes right. Reward 1 per step; the episode
    ends once the pole leans past ``theta_limit`` or the cart leaves the track.
    """

    name = "cartpole"
    n_actions = 2
    state_dim = 4
    reward_range = (0.0, 1.0)
    solved_return = 195.0

    def __init__(self, rng=None, gravity=9.8, mass_cart=1.0, mass_pole=0.1, half_length=0.5,
                 force=10.0, tau=0.02, x_limit=2.4, theta_limit=12 * 2 * math.pi / 360):
        super().__init__(rng)
        self.gravity = gravity
        self.mass_cart = mass_cart
        self.mass_pole = mass_pole
        self.half_length = half_length
        self.force = force
        self.tau = tau
        self.x_limit = x_limit
        self.theta_limit = theta_limit
        # Hard bounds are twice the termination limits (a terminal state may
        # overshoot by one step). Velocities have no physical cap; cumulative
        # acceleration before termination keeps them well inside +/-10.
        self.low = np.array([-2 * x_limit, -10.0, -2 * theta_limit, -10.0])
        self.high = -self.low
        self.scale_low = np.array([-x_limit, -3.0, -theta_limit, -3.5])
        self.scale_high = -self.scale_low

    def _initial_state(self):
        return self.rng.uniform(-0.05, 0.05, size=4)

    def _dynamics(self, state, action):
        x, x_dot, theta, theta_dot = state
        force = self.force if action == 1 else -self.force
        total_mass = self.mass_cart + self.mass_pole
        pole_ml = self.mass_pole * self.half_length
        cos, sin = math.cos(theta), math.sin(theta)
        temp = (force + pole_ml * theta_dot**2 * sin) / total_mass
        theta_acc = (self.gravity * sin - cos * temp) / (
            self.half_length * (4.0 / 3.0 - self.mass_pole * cos**2 / total_mass))
        x_acc = temp - pole_ml * theta_acc * cos / total_mass
        nxt = np.array([
            x + self.tau * x_dot,
            x_dot + self.tau * x_acc,
            theta + self.tau * theta_dot,
            theta_dot + self.tau * theta_acc,
        ])
        return nxt, 1.0

    def is_terminal(self, state) -> bool:
        return bool(abs(state[0]) > self.x_limit or abs(state[2]) > self.theta_limit)
