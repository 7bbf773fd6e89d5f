"""Grid tile coding over a bounded box."""

from __future__ import annotations

import numpy as np

from dynalab.errors import ContractError


class TileCoder:
    """``tilings`` offset grids of ``tiles`` per dimension.

    Tiling ``i`` is displaced by ``i * (2j + 1) / tilings`` of a tile width
    along dimension ``j`` (asymmetric offsets). States are clipped to the box,
    so every input activates exactly one tile per tiling.
    """

    sparse = True

    def __init__(self, low, high, tilings: int = 8, tiles: int = 8):
        self.low = np.asarray(low, dtype=float)
        self.high = np.asarray(high, dtype=float)
        if self.low.shape != self.high.shape or np.any(self.high <= self.low):
            raise ContractError("tile coder bounds must satisfy low < high")
        if tilings < 1 or tiles < 1:
            raise ContractError("need at least one tiling and one tile")
        self.tilings = tilings
        self.tiles = tiles
        d = self.low.size
        self.per_dim = tiles + 1
        self.tiling_size = self.per_dim ** d
        self.n_features = tilings * self.tiling_size
        self._offsets = np.array([[(i * (2 * j + 1)) % tilings / tilings for j in range(d)]
                                  for i in range(tilings)])
        self._strides = self.per_dim ** np.arange(d)
        self._base = np.arange(tilings) * self.tiling_size
        self._scale = tiles / (self.high - self.low)

    def active(self, state) -> np.ndarray:
        s = np.minimum(np.maximum(np.asarray(state, dtype=float), self.low), self.high)
        u = (s - self.low) * self._scale
        # Both terms are non-negative, so truncation is floor.
        coords = (u + self._offsets).astype(np.int64)
        return self._base + coords @ self._strides

    def dense(self, state) -> np.ndarray:
        phi = np.zeros(self.n_features)
        phi[self.active(state)] = 1.0
        return phi

    __call__ = active
