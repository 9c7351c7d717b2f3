"""HSTMixer: embedding, stacked ST mixing blocks, temporal propagation and the prediction head"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Union

import numpy as np

from embedding import DataEmbedding
from stblock import STMixingBlock, AdaptiveWeights, orthogonal_loss
from tensor import Module, Linear, Tensor, ShapeError, ops
from .config import ModelConfig

logger = logging.getLogger(__name__)

TEMPORAL_AXIS = 2


@dataclass
class ForwardState:
    """Everything one forward pass produces

    pyramid holds [E_1, ..., E_{L+1}]; E_{l+1} has T_l time steps.
    prediction is in data units.
    """
    pyramid: List[Tensor]
    weights: List[AdaptiveWeights]
    prediction: Tensor
    loss_terms: Dict[str, float] = field(default_factory=dict)


class HSTMixer(Module):
    """Hierarchical all-MLP traffic forecaster"""

    def __init__(self, config: ModelConfig, static: Optional[Tensor] = None, seed: int = 0):
        """
        Build every parameter from one seed

        Args:
            config: Validated hyperparameters
            static: Frozen static node embedding [N, d]; zeros when None
            seed: Seed for all parameter initialization
        """
        self.config = config.validate()
        rng = np.random.default_rng(seed)
        n, d, h = config.num_nodes, config.dim, config.hidden
        ablation = config.ablation
        lengths = config.pyramid_lengths()

        self.embedding = DataEmbedding(n, d, config.interval_minutes, rng, static=static)
        self.blocks = [
            STMixingBlock(l, lengths[l], config.effective_window, n, d, h, config.effective_regions,
                          config.effective_pool_sizes, rng, adaptive=ablation.adaptive_mixing,
                          propagate=ablation.spatial_propagation)
            for l in range(config.num_blocks)
        ]
        # temporal_maps[i] is G_{i+1}: G_1 keeps T_0, G_l maps T_{l-1} -> T_{l-2}
        self.temporal_maps = []
        if ablation.temporal_propagation:
            self.temporal_maps.append(Linear(lengths[0], lengths[0], rng, axis=TEMPORAL_AXIS))
            for l in range(2, config.num_blocks + 2):
                self.temporal_maps.append(Linear(lengths[l - 1], lengths[l - 2], rng, axis=TEMPORAL_AXIS))
        self.head_temporal = Linear(lengths[-1], config.input_len, rng, axis=TEMPORAL_AXIS)
        self.head_hidden = Linear(config.input_len * d, h, rng)
        self.head_out = Linear(h, config.output_len, rng)

        self.norm_mean = Tensor(np.zeros((n, 1)), name="norm_mean")
        self.norm_std = Tensor(np.ones((n, 1)), name="norm_std")
        logger.debug(f"HSTMixer built: {self.num_parameters()} parameters, pyramid {lengths}")

    def set_normalization(self, mean: Union[float, np.ndarray], std: Union[float, np.ndarray]) -> None:
        """Store the statistics used to map normalized outputs back to data units (global or per node)"""
        n = self.config.num_nodes
        self.norm_mean.data = np.ascontiguousarray(
            np.broadcast_to(np.asarray(mean, dtype=np.float64).reshape(-1, 1), (n, 1)), dtype=self.norm_mean.dtype)
        self.norm_std.data = np.ascontiguousarray(
            np.broadcast_to(np.asarray(std, dtype=np.float64).reshape(-1, 1), (n, 1)), dtype=self.norm_std.dtype)

    def forward(self, x: Union[Tensor, np.ndarray], minute_slot: np.ndarray, weekday: np.ndarray) -> ForwardState:
        """
        Run the full pipeline on normalized input windows

        Args:
            x: [B, N, T] normalized values
            minute_slot: int array [B, T]
            weekday: int array [B, T]

        Returns:
            ForwardState with the pyramid, generated region weights and the
            de-normalized prediction [B, N, T_pred]
        """
        if not isinstance(x, Tensor):
            x = Tensor(x)
        cfg = self.config
        if x.ndim != 3 or x.shape[1:] != (cfg.num_nodes, cfg.input_len):
            raise ShapeError(f"expected input [B, {cfg.num_nodes}, {cfg.input_len}], got {x.shape}")

        e = self.embedding(x, minute_slot, weekday)
        pyramid = [e]
        weights: List[AdaptiveWeights] = []
        for block in self.blocks:
            e, generated = block(e)
            pyramid.append(e)
            weights.extend(generated)

        merged = self.temporal_propagate(pyramid)
        z = merged + self.head_temporal(pyramid[-1])
        batch = x.shape[0]
        flat = ops.reshape(z, (batch, cfg.num_nodes, cfg.input_len * cfg.dim))
        normalized = self.head_out(ops.gelu(self.head_hidden(flat)))

        shape = normalized.shape
        prediction = (normalized * ops.broadcast_to(self.norm_std, shape)
                      + ops.broadcast_to(self.norm_mean, shape))
        return ForwardState(pyramid=pyramid, weights=weights, prediction=prediction)

    __call__ = forward

    def temporal_propagate(self, pyramid: List[Tensor]) -> Tensor:
        """P_{L+1} = G_{L+1}(E_{L+1}); P_l = G_l(E_l + P_{l+1}); P = G_1(E_1 + P_2); E_1 when switched off"""
        if not self.temporal_maps:
            return pyramid[0]
        depth = len(self.blocks)
        carry = self.temporal_maps[depth](pyramid[depth])
        for l in range(depth, 1, -1):
            carry = self.temporal_maps[l - 1](pyramid[l - 1] + carry)
        return self.temporal_maps[0](pyramid[0] + carry)

    def loss(self, state: ForwardState, target: Union[Tensor, np.ndarray], alpha: Optional[float] = None,
             beta: Optional[float] = None) -> Tensor:
        """
        alpha * MAE(prediction, target) + beta * orthogonal loss

        Args:
            state: Output of forward
            target: [B, N, T_pred] in data units
            alpha, beta: Override the configured weights

        Returns:
            Scalar Tensor; the individual terms are stored in state.loss_terms
        """
        alpha = self.config.alpha if alpha is None else alpha
        beta = self.config.beta if beta is None else beta
        regression = ops.mae(state.prediction, target)
        orthogonal = orthogonal_loss(state.weights)
        total = regression * alpha + orthogonal * beta
        state.loss_terms = {
            "regression": regression.item(),
            "orthogonal": orthogonal.item(),
            "total": total.item(),
        }
        return total

    def predict(self, x: np.ndarray, minute_slot: np.ndarray, weekday: np.ndarray) -> np.ndarray:
        """De-normalized forecast as a plain array; records nothing"""
        return self.forward(x, minute_slot, weekday).prediction.data
