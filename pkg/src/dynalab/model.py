"""Dynamics models queried during planning.

Successor models answer "where does (s, a) lead"; predecessor models answer
"which state p satisfies p --a--> s". Models answer every query, including
for states the real environment can never produce.
"""

from __future__ import annotations

from typing import Any, NamedTuple

import numpy as np

from dynalab.approx.features import normalise
from dynalab.approx.network import FeedForwardNet
from dynalab.envs.borderworld import Borderworld, GridPos
from dynalab.errors import ConfigError, ContractError

SUCCESSOR, PREDECESSOR = "successor", "predecessor"


class Transition(NamedTuple):
    state: Any
    action: int
    reward: float
    next_state: Any
    terminal: bool


class ModelPrediction(NamedTuple):
    state: Any
    reward: float
    terminal: bool
    hallucinated: bool


def _check_direction(direction: str) -> None:
    if direction not in (SUCCESSOR, PREDECESSOR):
        raise ConfigError(f"direction must be {SUCCESSOR!r} or {PREDECESSOR!r}, got {direction!r}")


class ExactBorderModel:
    """Borderworld dynamics, optionally with injected border hallucinations.

    With ``inject=False`` real cells get the true dynamics (stay-in-place at
    walls). With ``inject=True``:

    * successor: a move from a reachable cell into the border lands *in* the
      border cell; border cells move along the ring and never leave it.
    * predecessor: the predecessor of a border-adjacent cell under the
      action pointing away from the border is that border cell; a border
      cell's predecessor is the neighbouring cell the action came from
      (ring cells, or the adjacent reachable cell that "walked into" it).

    All predictions are precomputed into a lookup table.
    """

    def __init__(self, env: Borderworld, direction: str = SUCCESSOR, inject: bool = False):
        _check_direction(direction)
        self.env = env
        self.direction = direction
        self.inject = inject
        build = self._successor if direction == SUCCESSOR else self._predecessor
        self._table = {(pos, a): build(pos, a)
                       for pos in env.enumerate_states() for a in range(env.n_actions)}

    def _prediction(self, pos: GridPos, reward: float, terminal: bool) -> ModelPrediction:
        return ModelPrediction(pos, reward, terminal, self.env.is_border(pos))

    def _ring_move(self, pos: GridPos, cand: GridPos) -> GridPos:
        env = self.env
        return cand if env.in_grid(cand) and env.is_border(cand) else pos

    def _successor(self, pos: GridPos, action: int) -> ModelPrediction:
        env = self.env
        if env.is_border(pos):
            # Only reachable with injection; the ring is closed either way.
            return self._prediction(self._ring_move(pos, env.shift(pos, action)), 0.0, False)
        cand = env.shift(pos, action)
        if self.inject and env.is_border(cand):
            return self._prediction(cand, 0.0, False)
        nxt, reward, terminal = env.true_step(pos, action)
        return self._prediction(nxt, reward, terminal)

    def _exact_predecessor(self, pos: GridPos, action: int) -> GridPos:
        env = self.env
        dx, dy = env.shift((0, 0), action)
        cand = GridPos(pos[0] - dx, pos[1] - dy)
        if (cand in env.reachable_set and cand != env.goal
                and env.true_step(cand, action)[0] == pos):
            return cand
        return GridPos(*pos)

    def _predecessor(self, pos: GridPos, action: int) -> ModelPrediction:
        env = self.env
        dx, dy = env.shift((0, 0), action)
        cand = GridPos(pos[0] - dx, pos[1] - dy)
        if self.inject and env.in_grid(cand):
            if env.is_border(cand):
                return self._prediction(cand, 0.0, False)
            if env.is_border(pos):
                prev = cand if cand != env.goal else pos
                return self._prediction(prev, 0.0, False)
        if env.is_border(pos):
            return self._prediction(self._ring_move(pos, cand), 0.0, False)
        prev = self._exact_predecessor(pos, action)
        reward = 1.0 if pos == env.goal and prev != pos else 0.0
        return self._prediction(prev, reward, False)

    def predict(self, state, action: int) -> ModelPrediction:
        return self._table[(state, action)]

    def predict_actions(self, state, n_actions: int) -> list[ModelPrediction]:
        return [self._table[(state, a)] for a in range(n_actions)]

    def update_model(self, transition: Transition) -> None:
        pass


class LearnedModel:
    """MLP dynamics model trained online, one SGD step per real transition.

    Input is the normalised state concatenated with a one-hot action; output
    is the normalised predicted state followed by the normalised reward.
    With ``residual=True`` the network output is added to the normalised
    input state, so an untrained net starts out predicting "no change".
    """

    def __init__(self, env, direction: str = SUCCESSOR, hidden: int = 64, lr: float = 1e-3,
                 rng: np.random.Generator | None = None, residual: bool = True):
        _check_direction(direction)
        self.env = env
        self.direction = direction
        self.residual = residual
        self.low = np.asarray(env.scale_low, dtype=float)
        self.high = np.asarray(env.scale_high, dtype=float)
        self.r_low, self.r_high = env.reward_range
        if self.r_high <= self.r_low:
            self.r_high = self.r_low + 1.0
        self.state_dim = env.state_dim
        self.n_actions = env.n_actions
        self.net = FeedForwardNet([self.state_dim + self.n_actions, hidden, self.state_dim + 1],
                                  hidden="tanh", lr=lr, rng=rng)
        self.train_steps = 0

    def _span(self):
        return self.high - self.low

    def _inputs(self, state, action: int) -> tuple[np.ndarray, np.ndarray]:
        if not 0 <= action < self.n_actions:
            raise ContractError(f"action {action} out of range")
        s = self.env.encode(state)
        # No clipping: the model must accept its own out-of-range predictions.
        z = 2.0 * (s - self.low) / self._span() - 1.0
        x = np.zeros(self.state_dim + self.n_actions)
        x[:self.state_dim] = z
        x[self.state_dim + action] = 1.0
        return x, z

    def _targets(self, z_in: np.ndarray, target_state, reward: float) -> np.ndarray:
        s = self.env.encode(target_state)
        z = 2.0 * (s - self.low) / self._span() - 1.0
        if self.residual:
            z = z - z_in
        r = 2.0 * (reward - self.r_low) / (self.r_high - self.r_low) - 1.0
        return np.append(z, r)

    def training_pair(self, transition: Transition) -> tuple[np.ndarray, np.ndarray]:
        """Network input and target for one real transition, per direction."""
        if self.direction == SUCCESSOR:
            src, dst = transition.state, transition.next_state
        else:
            src, dst = transition.next_state, transition.state
        x, z_in = self._inputs(src, transition.action)
        return x, self._targets(z_in, dst, transition.reward)

    def predict(self, state, action: int) -> ModelPrediction:
        x, z_in = self._inputs(state, action)
        out = self.net.forward(x)
        z = out[:self.state_dim] + (z_in if self.residual else 0.0)
        pred = self.low + (z + 1.0) * 0.5 * self._span()
        reward = float(self.r_low + (out[-1] + 1.0) * 0.5 * (self.r_high - self.r_low))
        terminal = self.direction == SUCCESSOR and bool(self.env.is_terminal(pred))
        return ModelPrediction(pred, reward, terminal, not self.env.in_bounds(pred))

    def predict_actions(self, state, n_actions: int) -> list[ModelPrediction]:
        """Predictions for actions 0..n_actions-1 from one batched forward pass."""
        x, z_in = self._inputs(state, 0)
        xs = np.repeat(x[None, :], n_actions, axis=0)
        xs[:, self.state_dim] = 0.0
        xs[np.arange(n_actions), self.state_dim + np.arange(n_actions)] = 1.0
        out = self.net.forward(xs)
        z = out[:, :self.state_dim] + (z_in if self.residual else 0.0)
        preds = self.low + (z + 1.0) * 0.5 * self._span()
        rewards = self.r_low + (out[:, -1] + 1.0) * 0.5 * (self.r_high - self.r_low)
        result = []
        for pred, reward in zip(preds, rewards):
            terminal = self.direction == SUCCESSOR and bool(self.env.is_terminal(pred))
            result.append(ModelPrediction(pred, float(reward), terminal,
                                          not self.env.in_bounds(pred)))
        return result

    def update_model(self, transition: Transition) -> float:
        x, y = self.training_pair(transition)
        self.train_steps += 1
        return self.net.train_step_mse(x, y)


def make_model(kind: str, env, direction: str, rng=None, lr: float = 1e-3, hidden: int = 64):
    if kind == "exact":
        return ExactBorderModel(env, direction, inject=False)
    if kind == "exact-hallucinating":
        return ExactBorderModel(env, direction, inject=True)
    if kind == "learned":
        return LearnedModel(env, direction, hidden=hidden, lr=lr, rng=rng)
    raise ConfigError(f"unknown model kind {kind!r}")


def predict(model, state, action):
    return model.predict(state, action)


def update_model(model, transition):
    return model.update_model(transition)
