"""One spatiotemporal mixing block"""
import logging
from typing import List, Sequence, Tuple

import numpy as np

from tensor import Module, Tensor
from .temporal import TemporalAggregationMixer
from .cascade import SpatialCascadeMixer
from .pool import AdaptiveWeights

logger = logging.getLogger(__name__)


class STMixingBlock(Module):
    """Temporal aggregation, then the spatial cascade mixer with propagation

    E_l [B, N, T_{l-1}, d] -> E_{l+1} [B, N, T_l, d]
    """

    def __init__(self, index: int, input_len: int, window: int, num_nodes: int, dim: int, hidden: int,
                 regions: Sequence[int], pool_sizes: Sequence[int], rng: np.random.Generator,
                 adaptive: bool = True, propagate: bool = True):
        self.index = index
        self.temporal = TemporalAggregationMixer(input_len, window, dim, hidden, rng)
        self.output_len = self.temporal.output_len
        self.cascade = SpatialCascadeMixer(num_nodes, self.output_len, dim, hidden, regions, pool_sizes, rng,
                                           adaptive=adaptive, propagate=propagate)

    def __call__(self, e: Tensor) -> Tuple[Tensor, List[AdaptiveWeights]]:
        h = self.temporal(e)
        out, generated = self.cascade(h)
        weights = [AdaptiveWeights(self.index, scale, pair[0], pair[1])
                   for scale, pair in enumerate(generated) if pair is not None]
        return out, weights
