"""Pre-norm residual mixing MLPs and the node/region mixers built from them

All tensors here are laid out [B, S, T, d]: batch, spatial units (nodes or
regions), time windows, features.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np

from tensor import Module, Linear, Tensor, ShapeError, ops, parameter
from .pool import ParameterPool, generate_weights, adaptive_mix

logger = logging.getLogger(__name__)

SPATIAL_AXIS = 1
TEMPORAL_AXIS = 2
FEATURE_AXIS = 3


class MixingMLP(Module):
    """x + FC2(GELU(FC1(LN(x)))) with the FC pair acting on one axis

    LayerNorm always normalizes the feature axis. The spatiotemporal variant
    flattens (T, d) into one axis of length T*d and mixes that.
    """

    MODES = ("spatial", "temporal", "spatiotemporal", "feature")

    def __init__(self, mode: str, length: int, dim: int, hidden: int, rng: np.random.Generator):
        if mode not in self.MODES:
            raise ValueError(f"unknown mixing mode {mode!r}")
        self.mode = mode
        self.gamma = parameter(np.ones(dim))
        self.beta = parameter(np.zeros(dim))
        axis = {"spatial": SPATIAL_AXIS, "temporal": TEMPORAL_AXIS}.get(mode, -1)
        self.fc1 = Linear(length, hidden, rng, axis=axis)
        self.fc2 = Linear(hidden, length, rng, axis=axis)

    def __call__(self, x: Tensor) -> Tensor:
        h = ops.layernorm(x, -1, self.gamma, self.beta)
        if self.mode == "spatiotemporal":
            batch, units, steps, dim = x.shape
            h = ops.reshape(h, (batch, units, steps * dim))
            h = self.fc2(ops.gelu(self.fc1(h)))
            h = ops.reshape(h, (batch, units, steps, dim))
        else:
            h = self.fc2(ops.gelu(self.fc1(h)))
        return x + h


class AdaptiveMixingMLP(Module):
    """Temporal mixing whose two transforms are generated per region from parameter pools

    Both generated matrices come from LN(x); no activation sits between them.
    """

    def __init__(self, steps: int, dim: int, hidden: int, pool_size: int, rng: np.random.Generator):
        self.gamma = parameter(np.ones(dim))
        self.beta = parameter(np.zeros(dim))
        self.pool_in = ParameterPool(pool_size, steps, hidden, rng)
        self.pool_out = ParameterPool(pool_size, steps, hidden, rng)

    def __call__(self, x: Tensor) -> Tuple[Tensor, Tensor, Tensor]:
        h = ops.layernorm(x, -1, self.gamma, self.beta)
        w1 = generate_weights(h, self.pool_in)
        w2 = generate_weights(h, self.pool_out)
        return x + adaptive_mix(h, w1, w2), w1, w2


class RegionMixer(Module):
    """Spatial, temporal, spatiotemporal and feature mixing, in that order

    With adaptive=False the temporal step is a standard mixing MLP shared by
    every spatial unit; this is the node mixer and the w/o AM region mixer.
    """

    def __init__(self, units: int, steps: int, dim: int, hidden: int, rng: np.random.Generator,
                 adaptive: bool = False, pool_size: Optional[int] = None):
        self.units = units
        self.adaptive = adaptive
        self.spatial = MixingMLP("spatial", units, dim, hidden, rng)
        if adaptive:
            if not pool_size or pool_size < 1:
                raise ShapeError(f"adaptive region mixer needs a pool size >= 1, got {pool_size}")
            self.temporal = AdaptiveMixingMLP(steps, dim, hidden, pool_size, rng)
        else:
            self.temporal = MixingMLP("temporal", steps, dim, hidden, rng)
        self.spatiotemporal = MixingMLP("spatiotemporal", steps * dim, dim, hidden, rng)
        self.feature = MixingMLP("feature", dim, dim, hidden, rng)

    def __call__(self, x: Tensor) -> Tuple[Tensor, Optional[Tuple[Tensor, Tensor]]]:
        if x.shape[SPATIAL_AXIS] != self.units:
            raise ShapeError(f"mixer built for {self.units} spatial units got {x.shape}")
        h = self.spatial(x)
        weights = None
        if self.adaptive:
            h, w1, w2 = self.temporal(h)
            weights = (w1, w2)
        else:
            h = self.temporal(h)
        h = self.spatiotemporal(h)
        return self.feature(h), weights
