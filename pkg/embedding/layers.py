"""Data embedding layer: value lift plus spatial and temporal identity embeddings"""
import logging
from typing import Optional

import numpy as np

from tensor import Module, Tensor, ShapeError, ops, parameter, gaussian, xavier_uniform
from utils.config import Config

logger = logging.getLogger(__name__)

MINUTES_PER_DAY = 1440
DAYS_PER_WEEK = 7


class TimestampError(ShapeError):
    """Raised when a minute-of-day slot or weekday index is out of range."""
    pass


class SpatialEmbedding(Module):
    """E_sp = static + dynamic, both [N, d]; static is frozen"""

    def __init__(self, num_nodes: int, dim: int, rng: np.random.Generator, static: Optional[Tensor] = None):
        if static is None:
            static = Tensor(np.zeros((num_nodes, dim)), name="static")
        if static.shape != (num_nodes, dim):
            raise ShapeError(f"static embedding shape {static.shape} does not match ({num_nodes}, {dim})")
        static.requires_grad = False
        self.static = static
        self.dynamic = parameter(gaussian(rng, Config.EMBEDDING_INIT_STD, (num_nodes, dim)), name="dynamic")

    def __call__(self) -> Tensor:
        return self.static + self.dynamic


class TemporalEmbedding(Module):
    """Lookup tables over minute-of-day slots and weekdays"""

    def __init__(self, dim: int, interval_minutes: int, rng: np.random.Generator):
        if interval_minutes <= 0 or MINUTES_PER_DAY % interval_minutes:
            raise ShapeError(f"interval of {interval_minutes} minutes does not divide a day")
        self.slots_per_day = MINUTES_PER_DAY // interval_minutes
        self.day_table = parameter(gaussian(rng, Config.EMBEDDING_INIT_STD, (self.slots_per_day, dim)))
        self.week_table = parameter(gaussian(rng, Config.EMBEDDING_INIT_STD, (DAYS_PER_WEEK, dim)))

    def __call__(self, minute_slot: np.ndarray, weekday: np.ndarray) -> Tensor:
        """
        E_te for every step

        Args:
            minute_slot: int array [B, T] in [0, slots_per_day)
            weekday: int array [B, T] in [0, 7), Monday = 0

        Returns:
            Tensor [B, T, d]
        """
        minute_slot = np.asarray(minute_slot, dtype=np.int64)
        weekday = np.asarray(weekday, dtype=np.int64)
        if minute_slot.size and (minute_slot.min() < 0 or minute_slot.max() >= self.slots_per_day):
            raise TimestampError(f"minute-of-day slot outside [0, {self.slots_per_day})")
        if weekday.size and (weekday.min() < 0 or weekday.max() >= DAYS_PER_WEEK):
            raise TimestampError(f"weekday outside [0, {DAYS_PER_WEEK})")
        return ops.take(self.day_table, minute_slot, axis=0) + ops.take(self.week_table, weekday, axis=0)


class DataEmbedding(Module):
    """E_1 = E_tr + E_sp + E_te

    E_tr lifts every scalar to d channels with an affine map (weight [1, d],
    bias [d]); no activation.
    """

    def __init__(self, num_nodes: int, dim: int, interval_minutes: int, rng: np.random.Generator,
                 static: Optional[Tensor] = None):
        self.num_nodes = num_nodes
        self.dim = dim
        self.proj_weight = parameter(xavier_uniform(rng, 1, dim, (1, dim)))
        self.proj_bias = parameter(np.zeros(dim))
        self.spatial = SpatialEmbedding(num_nodes, dim, rng, static=static)
        self.temporal = TemporalEmbedding(dim, interval_minutes, rng)

    def __call__(self, x: Tensor, minute_slot: np.ndarray, weekday: np.ndarray) -> Tensor:
        """
        Embed a normalized input window

        Args:
            x: Tensor [B, N, T]
            minute_slot: int array [B, T]
            weekday: int array [B, T]

        Returns:
            Tensor [B, N, T, d]
        """
        if x.ndim != 3 or x.shape[1] != self.num_nodes:
            raise ShapeError(f"embedding expects [B, {self.num_nodes}, T], got {x.shape}")
        batch, nodes, steps = x.shape
        if np.shape(minute_slot) != (batch, steps) or np.shape(weekday) != (batch, steps):
            raise TimestampError(f"timestamps must be [{batch}, {steps}], got {np.shape(minute_slot)} "
                                 f"and {np.shape(weekday)}")
        full = (batch, nodes, steps, self.dim)

        value = ops.matmul(ops.reshape(x, (batch, nodes, steps, 1)), self.proj_weight) + self.proj_bias
        spatial = ops.broadcast_to(ops.reshape(self.spatial(), (nodes, 1, self.dim)), full)
        temporal = ops.reshape(self.temporal(minute_slot, weekday), (batch, 1, steps, self.dim))
        return value + spatial + ops.broadcast_to(temporal, full)
