"""Function approximation: from-scratch MLP, tile coding, frozen DQN features."""

from dynalab.approx.features import (FeatureExtractor, PretrainConfig, normalise,
                                     pretrain_features)
from dynalab.approx.network import FeedForwardNet, gradient_check
from dynalab.approx.tiles import TileCoder

__all__ = ["FeatureExtractor", "FeedForwardNet", "PretrainConfig", "TileCoder",
           "gradient_check", "normalise", "pretrain_features"]
