"""Parameter pools, per-region weight generation and the orthogonal loss"""
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from tensor import Module, Tensor, ShapeError, ops, parameter, gaussian
from utils.config import Config

logger = logging.getLogger(__name__)


class ParameterPool(Module):
    """Keys [M, T] and base weights [M, T, h] for one adaptive layer"""

    def __init__(self, size: int, steps: int, hidden: int, rng: np.random.Generator):
        if size < 1:
            raise ShapeError(f"parameter pool needs at least one entry, got {size}")
        self.size = size
        self.steps = steps
        self.hidden = hidden
        self.keys = parameter(gaussian(rng, Config.POOL_INIT_STD, (size, steps)))
        self.base_weights = parameter(gaussian(rng, Config.POOL_INIT_STD, (size, steps, hidden)))


def weight_scores(h: Tensor, pool: ParameterPool) -> Tensor:
    """
    Softmax scores of every (region, feature row) over the pool entries

    Args:
        h: Tensor [B, S, T, d]
        pool: ParameterPool with matching T

    Returns:
        Tensor [B, S, d, M]; sums to 1 along the last axis
    """
    if h.ndim != 4 or h.shape[2] != pool.steps:
        raise ShapeError(f"pool over {pool.steps} steps cannot score input {h.shape}")
    rows = ops.permute(h, (0, 1, 3, 2))
    return ops.softmax(ops.matmul(rows, ops.transpose(pool.keys)), axis=-1)


def generate_weights(h: Tensor, pool: ParameterPool) -> Tensor:
    """
    W^(j) = sum over feature rows i of Sim^(j)[i, :] . V

    Returns:
        Tensor [B, S, T, h], one [T, h] matrix per region
    """
    batch, units = h.shape[0], h.shape[1]
    mixture = ops.sum(weight_scores(h, pool), axis=2)
    bases = ops.reshape(pool.base_weights, (pool.size, pool.steps * pool.hidden))
    return ops.reshape(ops.matmul(mixture, bases), (batch, units, pool.steps, pool.hidden))


def adaptive_mix(h: Tensor, w1: Tensor, w2: Tensor) -> Tensor:
    """
    Per region: R = H^T W1 in [d, h], output = W2 R^T in [T, d]

    Args:
        h: Tensor [B, S, T, d]
        w1, w2: Tensor [B, S, T, h]
    """
    expected = h.shape[:3]
    if w1.shape[:3] != expected or w2.shape != w1.shape:
        raise ShapeError(f"adaptive_mix: weights {w1.shape} / {w2.shape} do not fit input {h.shape}")
    hidden_state = ops.matmul(ops.permute(h, (0, 1, 3, 2)), w1)
    return ops.matmul(w2, ops.transpose(hidden_state))


@dataclass
class AdaptiveWeights:
    """Generated matrices of one adaptive region mixer in one forward pass"""
    block: int
    scale: int
    w1: Tensor
    w2: Tensor


def orthogonal_loss(weights: Sequence[AdaptiveWeights]) -> Tensor:
    """
    Sum over blocks and scales of the mean pairwise cosine between region weights

    Each region's vector is concat(W1, W2) flattened. Each (block, scale)
    term is (1/S^2) sum_i sum_j cos(w_i, w_j) including i = j, averaged over
    the batch. With no adaptive mixers the loss is 0.
    """
    total = None
    for entry in weights:
        batch, units = entry.w1.shape[:2]
        flat = ops.concat([ops.reshape(entry.w1, (batch, units, -1)),
                           ops.reshape(entry.w2, (batch, units, -1))], axis=-1)
        term = ops.mean(ops.pairwise_cosine(flat))
        total = term if total is None else total + term
    if total is None:
        return Tensor(0.0)
    return total
