"""Parameter containers, initializers and the linear layer"""
import logging
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from . import ops
from .tensor import Tensor, ShapeError

logger = logging.getLogger(__name__)


def parameter(data: np.ndarray, name: Optional[str] = None) -> Tensor:
    return Tensor(data, requires_grad=True, name=name)


def xavier_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, shape: Tuple[int, ...]) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def gaussian(rng: np.random.Generator, std: float, shape: Tuple[int, ...]) -> np.ndarray:
    return rng.normal(0.0, std, size=shape)


class Module:
    """Base class for anything that owns parameters

    Parameters are Tensors with requires_grad set, buffers are Tensors
    without it. Both are discovered from instance attributes (including
    lists of Modules) in assignment order, so names are stable between runs.
    """

    def _children(self) -> Iterator[Tuple[str, object]]:
        for name, value in vars(self).items():
            if name.startswith("_"):
                continue
            if isinstance(value, (Tensor, Module)):
                yield name, value
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, (Tensor, Module)):
                        yield f"{name}.{i}", item

    def named_tensors(self, prefix: str = "") -> Iterator[Tuple[str, Tensor]]:
        for name, child in self._children():
            full = f"{prefix}{name}"
            if isinstance(child, Tensor):
                yield full, child
            else:
                yield from child.named_tensors(prefix=f"{full}.")

    def named_parameters(self) -> List[Tuple[str, Tensor]]:
        return [(name, t) for name, t in self.named_tensors() if t.requires_grad]

    def parameters(self) -> List[Tensor]:
        return [t for _, t in self.named_parameters()]

    def num_parameters(self) -> int:
        return int(sum(t.size for t in self.parameters()))

    def zero_grad(self) -> None:
        for t in self.parameters():
            t.grad = None

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self.named_tensors()}

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        """
        Copy arrays into this module's tensors, matching by name

        Args:
            state: name -> array, as produced by state_dict or read from a checkpoint

        Raises:
            ShapeError: on missing/unexpected names or mismatched shapes
        """
        own = dict(self.named_tensors())
        missing = sorted(set(own) - set(state))
        unexpected = sorted(set(state) - set(own))
        if missing or unexpected:
            raise ShapeError(f"state mismatch: missing={missing} unexpected={unexpected}")
        for name, t in own.items():
            value = np.asarray(state[name])
            if value.shape != t.shape:
                raise ShapeError(f"state entry {name!r}: shape {value.shape} does not match {t.shape}")
            t.data = np.array(value, dtype=t.dtype, order="C")
            t.grad = None
        logger.debug(f"loaded {len(own)} tensors")


class Linear(Module):
    """Affine map acting on one axis of its input

    Weight is stored [in, out], Xavier-uniform; bias starts at zero. The
    mapped axis is moved to the end, multiplied, and moved back.
    """

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator,
                 bias: bool = True, axis: int = -1):
        self.in_features = in_features
        self.out_features = out_features
        self.axis = axis
        self.weight = parameter(xavier_uniform(rng, in_features, out_features, (in_features, out_features)))
        self.bias = parameter(np.zeros(out_features)) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        if x.shape[self.axis] != self.in_features:
            raise ShapeError(f"Linear({self.in_features}->{self.out_features}) got axis {self.axis} of {x.shape}")
        last = self.axis in (-1, x.ndim - 1)
        h = x if last else ops.moveaxis(x, self.axis, -1)
        h = ops.matmul(h, self.weight)
        if self.bias is not None:
            h = h + self.bias
        return h if last else ops.moveaxis(h, -1, self.axis)

    def __repr__(self) -> str:
        return f"Linear({self.in_features}->{self.out_features}, axis={self.axis})"
