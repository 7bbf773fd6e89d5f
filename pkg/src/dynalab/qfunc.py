"""State-action value functions and the epsilon-greedy behaviour policy."""

from __future__ import annotations

import math

import numpy as np

from dynalab.errors import ContractError, NonFiniteError


def _check_delta(delta: float) -> None:
    if not math.isfinite(delta):
        raise NonFiniteError(f"non-finite TD error {delta}")


class TabularQ:
    """Dense table over an explicit state list (border cells included).

    Rows are plain Python lists: planning does millions of scalar reads and
    writes, which are much cheaper on lists than on numpy arrays.
    """

    def __init__(self, states, n_actions: int, q0: float = 0.0):
        self.states = list(states)
        self.n_actions = n_actions
        self.q0 = q0
        self._index = {s: i for i, s in enumerate(self.states)}
        self._rows = [[float(q0)] * n_actions for _ in self.states]

    def values(self, state) -> list[float]:
        return self._rows[self._index[state]]

    def q(self, state, action: int) -> float:
        return self._rows[self._index[state]][action]

    def max_q(self, state) -> tuple[float, int]:
        row = self._rows[self._index[state]]
        best = max(row)
        return best, row.index(best)

    def max_value(self, state) -> float:
        return max(self._rows[self._index[state]])

    def apply_td(self, state, action: int, delta: float, alpha: float) -> None:
        _check_delta(delta)
        self._rows[self._index[state]][action] += alpha * delta

    def as_array(self) -> np.ndarray:
        """Table as an ``(n_states, n_actions)`` array in state-list order."""
        return np.array(self._rows)


_EMPTY = object()


class LinearQ:
    """Q(s, a) = w_a . phi(s), one weight vector per action.

    ``features`` is a callable returning either active indices of a binary
    vector (``features.sparse`` true, e.g. a TileCoder) or a dense vector.
    """

    def __init__(self, features, n_features: int, n_actions: int, weights: np.ndarray | None = None):
        self.features = features
        self.sparse = bool(getattr(features, "sparse", False))
        self.n_features = n_features
        self.n_actions = n_actions
        if weights is None:
            weights = np.zeros((n_actions, n_features))
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (n_actions, n_features):
            raise ContractError(f"weights shape {weights.shape} != {(n_actions, n_features)}")
        self.w = weights
        self._cache_key = _EMPTY
        self._cache_phi = None

    @classmethod
    def normal_init(cls, features, n_features, n_actions, rng: np.random.Generator) -> "LinearQ":
        return cls(features, n_features, n_actions, rng.standard_normal((n_actions, n_features)))

    def phi(self, state):
        # Planning queries the same state several times in a row.
        key = state.tobytes() if isinstance(state, np.ndarray) else state
        if key != self._cache_key:
            self._cache_key = key
            self._cache_phi = self.features(state)
        return self._cache_phi

    def values(self, state) -> np.ndarray:
        phi = self.phi(state)
        if self.sparse:
            return self.w[:, phi].sum(axis=1)
        return self.w @ phi

    def q(self, state, action: int) -> float:
        phi = self.phi(state)
        if self.sparse:
            return float(self.w[action, phi].sum())
        return float(self.w[action] @ phi)

    def max_q(self, state) -> tuple[float, int]:
        vals = self.values(state)
        a = int(np.argmax(vals))  # first maximum
        return float(vals[a]), a

    def max_value(self, state) -> float:
        return float(self.values(state).max())

    def apply_td(self, state, action: int, delta: float, alpha: float) -> None:
        _check_delta(delta)
        phi = self.phi(state)
        if self.sparse:
            # Active indices of one state are distinct, so fancy-index += is exact.
            self.w[action, phi] += alpha * delta
        else:
            self.w[action] += (alpha * delta) * phi


class EpsGreedyPolicy:
    """Uniform random action with probability epsilon, else greedy.

    ``tie_break="first"`` takes the lowest-index maximiser (as ``max_q``);
    ``"random"`` picks uniformly among maximisers.
    """

    def __init__(self, epsilon: float = 0.1, tie_break: str = "first"):
        if not 0.0 <= epsilon <= 1.0:
            raise ContractError(f"epsilon must be in [0, 1], got {epsilon}")
        if tie_break not in ("first", "random"):
            raise ContractError(f"unknown tie-break rule {tie_break!r}")
        self.epsilon = epsilon
        self.tie_break = tie_break

    def greedy(self, qf, state, rng: np.random.Generator | None = None) -> int:
        if self.tie_break == "first":
            return qf.max_q(state)[1]
        vals = list(qf.values(state))
        best = max(vals)
        ties = [a for a, v in enumerate(vals) if v == best]
        return ties[0] if len(ties) == 1 else ties[int(rng.integers(len(ties)))]

    def select_action(self, qf, state, rng: np.random.Generator) -> int:
        if self.epsilon > 0.0 and rng.random() < self.epsilon:
            return int(rng.integers(qf.n_actions))
        return self.greedy(qf, state, rng)


def q(qf, state, action):
    return qf.q(state, action)


def max_q(qf, state):
    return qf.max_q(state)


def apply_td(qf, state, action, delta, alpha):
    if not 0.0 < alpha <= 1.0:
        raise ContractError(f"alpha must be in (0, 1], got {alpha}")
    qf.apply_td(state, action, delta, alpha)


def select_action(policy: EpsGreedyPolicy, qf, state, rng):
    return policy.select_action(qf, state, rng)
