"""Adam with global gradient-norm clipping"""
import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from tensor import Tensor
from utils.config import Config
from utils.errors import NumericalError

logger = logging.getLogger(__name__)


@dataclass
class OptimizerState:
    """First/second moment buffers (one per parameter, same shape) and the step counter"""
    first: List[np.ndarray]
    second: List[np.ndarray]
    step: int = 0
    history: List[float] = field(default_factory=list)  # gradient norms before clipping


class Adam:
    """Bias-corrected Adam

    Parameters whose grad is None after backward are left untouched for
    that step.
    """

    def __init__(self, named_parameters: Sequence[Tuple[str, Tensor]], lr: float = Config.LEARNING_RATE,
                 beta1: float = Config.ADAM_BETA1, beta2: float = Config.ADAM_BETA2, eps: float = Config.ADAM_EPS,
                 clip_norm: float = Config.CLIP_NORM):
        self.named_parameters = list(named_parameters)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.clip_norm = clip_norm
        self.state = OptimizerState(
            first=[np.zeros(p.shape) for _, p in self.named_parameters],
            second=[np.zeros(p.shape) for _, p in self.named_parameters],
        )

    def zero_grad(self) -> None:
        for _, p in self.named_parameters:
            p.grad = None

    def gradient_norm(self) -> float:
        return float(np.sqrt(sum(np.sum(np.square(p.grad, dtype=np.float64))
                                 for _, p in self.named_parameters if p.grad is not None)))

    def step(self) -> None:
        """
        Apply one update from the populated gradients

        Raises:
            NumericalError: naming the first parameter with a NaN or inf gradient
        """
        for name, p in self.named_parameters:
            if p.grad is not None and not np.all(np.isfinite(p.grad)):
                raise NumericalError(f"non-finite gradient in parameter {name!r}")

        norm = self.gradient_norm()
        self.state.history.append(norm)
        scale = 1.0
        if self.clip_norm and norm > self.clip_norm:
            scale = self.clip_norm / norm
            logger.debug(f"clipping gradient norm {norm:.4g} to {self.clip_norm}")

        self.state.step += 1
        t = self.state.step
        correction1 = 1.0 - self.beta1 ** t
        correction2 = 1.0 - self.beta2 ** t
        for i, (_, p) in enumerate(self.named_parameters):
            if p.grad is None:
                continue
            g = p.grad.astype(np.float64) * scale
            m = self.state.first[i] = self.beta1 * self.state.first[i] + (1.0 - self.beta1) * g
            v = self.state.second[i] = self.beta2 * self.state.second[i] + (1.0 - self.beta2) * g * g
            update = self.lr * (m / correction1) / (np.sqrt(v / correction2) + self.eps)
            p.data = (p.data - update).astype(p.dtype)
