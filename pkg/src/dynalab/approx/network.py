"""A small fully-connected network with hand-written backprop."""

from __future__ import annotations

import math

import numpy as np

from dynalab.errors import ContractError, FrozenError, NonFiniteError

ACTIVATIONS = {
    "tanh": (np.tanh, lambda z, a: 1.0 - a * a),
    "relu": (lambda z: np.maximum(z, 0.0), lambda z, a: (z > 0.0).astype(float)),
    "linear": (lambda z: z, lambda z, a: np.ones_like(z)),
}


class FeedForwardNet:
    """Affine layers with a shared hidden nonlinearity and a linear output layer.

    Weights are stored as ``(fan_in, fan_out)`` matrices so a row-vector input
    ``x`` maps to ``x @ W + b``. Inputs may be a single vector or a batch
    (one row per example).
    """

    def __init__(self, sizes, hidden: str = "tanh", lr: float = 1e-3,
                 rng: np.random.Generator | None = None, bias: bool = True):
        sizes = [int(s) for s in sizes]
        if len(sizes) < 2 or min(sizes) < 1:
            raise ContractError(f"need at least input and output sizes, got {sizes}")
        if hidden not in ACTIVATIONS:
            raise ContractError(f"unknown nonlinearity {hidden!r}")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.sizes = sizes
        self.hidden = hidden
        self.lr = lr
        self.bias = bias
        self.frozen = False
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = 1.0 / math.sqrt(fan_in)
            self.weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    @property
    def n_params(self) -> int:
        n = sum(w.size for w in self.weights)
        return n + (sum(b.size for b in self.biases) if self.bias else 0)

    def parameters(self) -> list[np.ndarray]:
        params = []
        for w, b in zip(self.weights, self.biases):
            params.append(w)
            if self.bias:
                params.append(b)
        return params

    def freeze(self) -> None:
        self.frozen = True
        for p in self.weights + self.biases:
            p.setflags(write=False)

    # forward / backward -------------------------------------------------

    def _check_input(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.sizes[0] or x.ndim > 2:
            raise ContractError(f"input shape {x.shape} does not match first layer {self.sizes[0]}")
        return x

    def _activations(self, x: np.ndarray):
        act, _ = ACTIVATIONS[self.hidden]
        pre, post = [], [x]
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            h = z if i == last else act(z)
            pre.append(z)
            post.append(h)
        return pre, post

    def forward(self, x) -> np.ndarray:
        _, post = self._activations(self._check_input(x))
        return post[-1]

    def hidden_activation(self, x) -> np.ndarray:
        """Activation of the final hidden layer."""
        if len(self.weights) < 2:
            raise ContractError("network has no hidden layer")
        _, post = self._activations(self._check_input(x))
        return post[-2]

    def loss(self, x, target) -> float:
        y = self.forward(x)
        return float(np.mean((y - np.asarray(target, dtype=float)) ** 2))

    def gradients(self, x, target):
        """MSE loss and its gradients, averaged over outputs and batch rows."""
        x = self._check_input(x)
        target = np.asarray(target, dtype=float)
        pre, post = self._activations(x)
        y = post[-1]
        if target.shape != y.shape:
            raise ContractError(f"target shape {target.shape} != output shape {y.shape}")
        loss = float(np.mean((y - target) ** 2))
        _, dact = ACTIVATIONS[self.hidden]
        grad = 2.0 * (y - target) / y.size
        if grad.ndim == 1:
            grad = grad[None, :]
            post = [p[None, :] for p in post]
            pre = [p[None, :] for p in pre]
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.weights)
        for i in range(len(self.weights) - 1, -1, -1):
            if i != len(self.weights) - 1:
                grad = grad * dact(pre[i], post[i + 1])
            grads_w[i] = post[i].T @ grad
            grads_b[i] = grad.sum(axis=0)
            if i:
                grad = grad @ self.weights[i].T
        return loss, grads_w, grads_b

    def train_step_mse(self, x, target) -> float:
        """One gradient-descent step on the MSE loss; returns the pre-step loss."""
        if self.frozen:
            raise FrozenError("network weights are frozen")
        with np.errstate(invalid="ignore", over="ignore"):
            loss, grads_w, grads_b = self.gradients(x, target)
        if not math.isfinite(loss):
            raise NonFiniteError(f"non-finite MSE loss {loss}")
        for w, gw in zip(self.weights, grads_w):
            w -= self.lr * gw
        if self.bias:
            for b, gb in zip(self.biases, grads_b):
                b -= self.lr * gb
        return loss


def gradient_check(net: FeedForwardNet, x, target, h: float = 1e-5) -> float:
    """Max error between backprop gradients and central finite differences.

    Relative error is used per parameter, except where both gradients are
    below 1e-7 in magnitude, where the absolute difference is used.
    """
    if net.n_params >= 10_000:
        raise ContractError("gradient_check is limited to nets below 10^4 parameters")
    _, grads_w, grads_b = net.gradients(x, target)
    analytic = []
    for gw, gb in zip(grads_w, grads_b):
        analytic.append(gw)
        if net.bias:
            analytic.append(gb)
    worst = 0.0
    for param, grad in zip(net.parameters(), analytic):
        flat = param.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + h
            up = net.loss(x, target)
            flat[i] = old - h
            down = net.loss(x, target)
            flat[i] = old
            numeric = (up - down) / (2 * h)
            a = grad.reshape(-1)[i]
            scale = max(abs(a), abs(numeric))
            err = abs(a - numeric) if scale < 1e-7 else abs(a - numeric) / scale
            worst = max(worst, err)
    return worst
