"""Temporal aggregation mixer: gated window MLPs that shrink the time axis by p"""
import logging
import math

import numpy as np

from tensor import Module, Linear, Tensor, ShapeError, ops, parameter, gaussian
from utils.config import Config

logger = logging.getLogger(__name__)


def aggregated_length(steps: int, window: int) -> int:
    if steps < 1:
        raise ShapeError("temporal aggregation needs at least one time step")
    return math.ceil(steps / window)


class WindowMixer(Module):
    """FC2(GELU(FC1(window) + pos[w])) over flattened p*d windows"""

    def __init__(self, window: int, windows: int, dim: int, hidden: int, rng: np.random.Generator):
        self.fc1 = Linear(window * dim, hidden, rng)
        self.position = parameter(gaussian(rng, Config.POSITION_INIT_STD, (windows, hidden)))
        self.fc2 = Linear(hidden, dim, rng)

    def __call__(self, windows: Tensor) -> Tensor:
        return self.fc2(ops.gelu(self.fc1(windows) + self.position))


class TemporalAggregationMixer(Module):
    """[B, N, T_in, d] -> [B, N, ceil(T_in / p), d]

    A trailing partial window is filled by repeating the last time step.
    """

    def __init__(self, input_len: int, window: int, dim: int, hidden: int, rng: np.random.Generator):
        if window < 1:
            raise ShapeError(f"window length must be >= 1, got {window}")
        self.input_len = input_len
        self.window = window
        self.output_len = aggregated_length(input_len, window)
        self.branch_tanh = WindowMixer(window, self.output_len, dim, hidden, rng)
        self.branch_gate = WindowMixer(window, self.output_len, dim, hidden, rng)

    def __call__(self, x: Tensor) -> Tensor:
        batch, nodes, steps, dim = x.shape
        if steps != self.input_len:
            raise ShapeError(f"temporal mixer built for {self.input_len} steps got {x.shape}")
        padding = self.output_len * self.window - steps
        if padding:
            x = ops.take(x, list(range(steps)) + [steps - 1] * padding, axis=2)
        windows = ops.reshape(x, (batch, nodes, self.output_len, self.window * dim))
        return ops.gated_fuse(self.branch_tanh(windows), self.branch_gate(windows))
