"""Ground-truth environments, selected by name."""

from __future__ import annotations

import numpy as np

from dynalab.envs.base import ContinuousEnv, StepResult
from dynalab.envs.borderworld import ACTION_NAMES, Borderworld, GridPos
from dynalab.envs.cartpole import CartPole
from dynalab.envs.catcher import Catcher
from dynalab.envs.puddleworld import PuddleWorld
from dynalab.errors import ConfigError

ENVIRONMENTS = {
    "borderworld": Borderworld,
    "puddleworld": PuddleWorld,
    "cartpole": CartPole,
    "catcher": Catcher,
}


def make_env(name: str, rng: np.random.Generator | None = None, **kwargs):
    try:
        cls = ENVIRONMENTS[name]
    except KeyError:
        raise ConfigError(f"unknown environment {name!r}; choose from {sorted(ENVIRONMENTS)}") from None
    return cls(rng=rng, **kwargs)


def reset(env):
    return env.reset()


def step(env, action: int) -> StepResult:
    return env.step(action)


def enumerate_states(env):
    return env.enumerate_states()


__all__ = [
    "ACTION_NAMES", "Borderworld", "CartPole", "Catcher", "ContinuousEnv", "ENVIRONMENTS",
    "GridPos", "PuddleWorld", "StepResult", "enumerate_states", "make_env", "reset", "step",
]
