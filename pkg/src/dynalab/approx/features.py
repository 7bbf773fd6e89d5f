"""Frozen hidden-layer features from a from-scratch DQN value network."""

from __future__ import annotations

import logging
import struct
from collections import deque
from dataclasses import dataclass

import numpy as np

from dynalab.approx.network import FeedForwardNet
from dynalab.errors import ContractError, FrozenError, UnsupportedOperation

log = logging.getLogger(__name__)


def normalise(state, low, high) -> np.ndarray:
    """Map each dimension from [low, high] to [-1, 1], clipping outside values."""
    s = np.clip(np.asarray(state, dtype=float), low, high)
    return 2.0 * (s - low) / (high - low) - 1.0


class FeatureExtractor:
    """phi(s): final-hidden-layer activation of a frozen network on the normalised state."""

    sparse = False

    def __init__(self, net: FeedForwardNet, low, high):
        if not net.frozen:
            net.freeze()
        self.net = net
        self.low = np.asarray(low, dtype=float)
        self.high = np.asarray(high, dtype=float)
        self.n_features = net.sizes[-2]

    def __call__(self, state) -> np.ndarray:
        return self.net.hidden_activation(normalise(state, self.low, self.high))

    def train_step_mse(self, *args, **kwargs):
        raise FrozenError("feature extractor weights are immutable")

    def save(self, path) -> None:
        """Little-endian int32 header (layer count, layer sizes), then float64 data.

        Data order: ``low``, ``high``, then for each layer its ``(fan_in, fan_out)``
        weight matrix in row-major order followed by its bias vector.
        """
        sizes = self.net.sizes
        with open(path, "wb") as fh:
            fh.write(struct.pack(f"<{len(sizes) + 1}i", len(sizes), *sizes))
            parts = [self.low, self.high]
            for w, b in zip(self.net.weights, self.net.biases):
                parts += [w, b]
            for p in parts:
                fh.write(np.ascontiguousarray(p, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path, hidden: str = "relu") -> "FeatureExtractor":
        with open(path, "rb") as fh:
            (count,) = struct.unpack("<i", fh.read(4))
            sizes = list(struct.unpack(f"<{count}i", fh.read(4 * count)))
            data = np.frombuffer(fh.read(), dtype="<f8")
        net = FeedForwardNet(sizes, hidden=hidden)
        d = sizes[0]
        low, high = data[:d], data[d:2 * d]
        pos = 2 * d
        for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            net.weights[i] = data[pos:pos + fan_in * fan_out].reshape(fan_in, fan_out).copy()
            pos += fan_in * fan_out
            net.biases[i] = data[pos:pos + fan_out].copy()
            pos += fan_out
        if pos != data.size:
            raise ContractError(f"{path}: trailing or missing data in extractor file")
        return cls(net, low, high)


@dataclass
class PretrainConfig:
    hidden: tuple[int, ...] = (200,)
    lr: float = 1e-3
    gamma: float = 0.99
    frames: int = 50_000
    replay_size: int = 10_000
    batch_size: int = 32
    target_sync: int = 200
    learning_starts: int = 1_000
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_frames: int = 10_000
    episode_cap: int = 1_000
    seed: int = 0


def pretrain_features(env, config: PretrainConfig | None = None) -> FeatureExtractor:
    """Train a DQN value network on ``env`` and freeze its final hidden layer as features.

    The network maps the normalised state to one value per action; it learns
    from uniformly sampled replay minibatches against a target copy synced
    every ``target_sync`` frames. Not reaching ``env.solved_return`` within
    the frame budget only logs a warning.
    """
    if getattr(env, "tabular", False):
        raise UnsupportedOperation("feature pretraining is for the continuous benchmarks")
    cfg = config or PretrainConfig()
    rng = np.random.default_rng(cfg.seed)
    low, high = env.scale_low, env.scale_high
    sizes = [env.state_dim, *cfg.hidden, env.n_actions]
    net = FeedForwardNet(sizes, hidden="relu", lr=cfg.lr, rng=rng)
    target = FeedForwardNet(sizes, hidden="relu")
    _sync(target, net)

    replay = deque(maxlen=cfg.replay_size)
    returns: list[float] = []
    state = normalise(env.reset(), low, high)
    ep_return, ep_len = 0.0, 0
    for frame in range(cfg.frames):
        frac = min(1.0, frame / max(1, cfg.eps_decay_frames))
        eps = cfg.eps_start + frac * (cfg.eps_end - cfg.eps_start)
        if rng.random() < eps:
            action = int(rng.integers(env.n_actions))
        else:
            action = int(np.argmax(net.forward(state)))
        result = env.step(action)
        nxt = normalise(result.next_state, low, high)
        replay.append((state, action, result.reward, nxt, result.terminal))
        ep_return += result.reward
        ep_len += 1
        state = nxt
        if result.terminal or ep_len >= cfg.episode_cap:
            returns.append(ep_return)
            state = normalise(env.reset(), low, high)
            ep_return, ep_len = 0.0, 0

        if frame >= cfg.learning_starts and len(replay) >= cfg.batch_size:
            idx = rng.integers(len(replay), size=cfg.batch_size)
            batch = [replay[i] for i in idx]
            s = np.array([b[0] for b in batch])
            a = np.array([b[1] for b in batch])
            r = np.array([b[2] for b in batch])
            s2 = np.array([b[3] for b in batch])
            done = np.array([b[4] for b in batch], dtype=float)
            y = net.forward(s).copy()
            boot = target.forward(s2).max(axis=1)
            y[np.arange(len(batch)), a] = r + cfg.gamma * (1.0 - done) * boot
            net.train_step_mse(s, y)
        if frame % cfg.target_sync == 0:
            _sync(target, net)

    recent = float(np.mean(returns[-20:])) if returns else float("nan")
    solved = getattr(env, "solved_return", None)
    if solved is not None and not recent >= solved:
        log.warning("%s: DQN pretraining did not converge (recent mean return %.1f < %.1f)",
                    env.name, recent, solved)
    else:
        log.info("%s: DQN pretraining finished, recent mean return %.1f", env.name, recent)
    extractor = FeatureExtractor(net, low, high)
    extractor.pretrain_return = recent
    return extractor


def _sync(dst: FeedForwardNet, src: FeedForwardNet) -> None:
    dst.weights = [w.copy() for w in src.weights]
    dst.biases = [b.copy() for b in src.biases]
