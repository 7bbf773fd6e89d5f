"""Value iteration on the real Borderworld dynamics."""

from __future__ import annotations

import numpy as np

from dynalab.errors import UnsupportedOperation


def value_iteration_oracle(env, gamma: float, tol: float = 1e-8, max_iter: int = 100_000):
    """V* as a (height, width) array; NaN outside the reachable set, 0 at the goal."""
    if not getattr(env, "tabular", False):
        raise UnsupportedOperation("value iteration needs a tabular environment")
    states = sorted(env.reachable_set, key=lambda p: (p[1], p[0]))
    values = {s: 0.0 for s in states}
    for _ in range(max_iter):
        change = 0.0
        for s in states:
            if env.is_terminal(s):
                continue
            best = -np.inf
            for a in range(env.n_actions):
                nxt, reward, terminal = env.true_step(s, a)
                best = max(best, reward + (0.0 if terminal else gamma * values[nxt]))
            change = max(change, abs(best - values[s]))
            values[s] = best
        if change < tol:
            break
    grid = np.full((env.height, env.width), np.nan)
    for (x, y), v in values.items():
        grid[y, x] = v
    return grid
