"""Spatial cascade mixer: soft region aggregation, node/region mixers, top-down propagation"""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from tensor import Module, Linear, Tensor, ShapeError, ops, parameter, xavier_uniform
from .mixing import RegionMixer, SPATIAL_AXIS

logger = logging.getLogger(__name__)


class SpatialCascadeMixer(Module):
    """Node mixer plus K region mixers over progressively coarser region sets

    Aggregation map A_k is [S_k, S_{k-1}] with S_0 = N and has no bias.
    Propagation map F_k lifts S_k back to S_{k-1}; the final map F_0 acts on
    the feature axis so the block stays linear in N.
    """

    def __init__(self, num_nodes: int, steps: int, dim: int, hidden: int, regions: Sequence[int],
                 pool_sizes: Sequence[int], rng: np.random.Generator, adaptive: bool = True,
                 propagate: bool = True):
        if len(regions) != len(pool_sizes):
            raise ShapeError(f"{len(regions)} region scales but {len(pool_sizes)} pool sizes")
        self.num_nodes = num_nodes
        self.propagate = propagate
        sizes = [num_nodes] + list(regions)
        self.aggregation = [
            parameter(xavier_uniform(rng, sizes[k], sizes[k + 1], (sizes[k + 1], sizes[k])))
            for k in range(len(regions))
        ]
        self.node_mixer = RegionMixer(num_nodes, steps, dim, hidden, rng, adaptive=False)
        self.region_mixers = [
            RegionMixer(units, steps, dim, hidden, rng, adaptive=adaptive, pool_size=pool)
            for units, pool in zip(regions, pool_sizes)
        ]
        self.lifts = [Linear(sizes[k + 1], sizes[k], rng, axis=SPATIAL_AXIS)
                      for k in range(len(regions))] if propagate else []
        self.fuse = Linear(dim, dim, rng)

    @property
    def scales(self) -> int:
        return len(self.region_mixers)

    def spatial_aggregate(self, h: Tensor) -> List[Tensor]:
        """H_{l,k} = A_k . H_{l,k-1} along the spatial axis; each [B, S_k, T, d]"""
        batch, _, steps, dim = h.shape
        levels = []
        current = h
        for matrix in self.aggregation:
            if matrix.shape[1] != current.shape[SPATIAL_AXIS]:
                raise ShapeError(f"aggregation map {matrix.shape} cannot contract {current.shape}")
            flat = ops.reshape(current, (batch, current.shape[SPATIAL_AXIS], steps * dim))
            current = ops.reshape(ops.matmul(matrix, flat), (batch, matrix.shape[0], steps, dim))
            levels.append(current)
        return levels

    def run_mixers(self, h: Tensor, levels: Sequence[Tensor]
                   ) -> Tuple[Tensor, List[Tensor], List[Optional[Tuple[Tensor, Tensor]]]]:
        """Node mixer on H_l and region mixer k on H_{l,k}; returns O_g, [O_k], generated weights"""
        node_out, _ = self.node_mixer(h)
        region_outs, weights = [], []
        for mixer, level in zip(self.region_mixers, levels):
            out, generated = mixer(level)
            region_outs.append(out)
            weights.append(generated)
        return node_out, region_outs, weights

    def spatial_propagate(self, node_out: Tensor, region_outs: Sequence[Tensor], h: Tensor) -> Tensor:
        """
        Top-down fusion: O^_K = F_K(O_K), O^_k = F_k(O_k + O^_{k+1}), E = F_0(O_g + O^_1) + H

        Without propagation the region outputs are left out: E = F_0(O_g) + H.
        """
        carry = None
        if self.propagate:
            for k in reversed(range(len(region_outs))):
                merged = region_outs[k] if carry is None else region_outs[k] + carry
                carry = self.lifts[k](merged)
        fused = node_out if carry is None else node_out + carry
        return self.fuse(fused) + h

    def __call__(self, h: Tensor) -> Tuple[Tensor, List[Optional[Tuple[Tensor, Tensor]]]]:
        levels = self.spatial_aggregate(h)
        node_out, region_outs, weights = self.run_mixers(h, levels)
        return self.spatial_propagate(node_out, region_outs, h), weights
