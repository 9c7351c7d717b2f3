"""Dense tensors and the reverse-mode gradient tape"""
import contextlib
import logging
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from utils.errors import HSTMixerError

logger = logging.getLogger(__name__)


class ShapeError(HSTMixerError, ValueError):
    """Raised when operand shapes do not line up."""
    pass


class PrecisionError(HSTMixerError):
    """Raised when an operation needs 64-bit buffers and gets something else."""
    pass


_DEFAULT_DTYPE = [np.dtype(np.float32)]


def get_default_dtype() -> np.dtype:
    return _DEFAULT_DTYPE[-1]


@contextlib.contextmanager
def default_dtype(dtype) -> Iterator[np.dtype]:
    """Temporarily switch the precision of newly created tensors.

    32-bit is the training default; gradient checks run under float64.
    """
    _DEFAULT_DTYPE.append(np.dtype(dtype))
    try:
        yield _DEFAULT_DTYPE[-1]
    finally:
        _DEFAULT_DTYPE.pop()


class Tensor:
    """Dense multi-axis array that can take part in a gradient tape"""

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None, dtype=None):
        """
        Create a tensor

        Args:
            data: Anything numpy can turn into an array
            requires_grad: Whether backward should populate .grad for this tensor
            name: Optional label, used in error messages and checkpoints
            dtype: Buffer precision, defaults to the active default dtype
        """
        self.data = np.asarray(data, dtype=dtype or get_default_dtype(), order="C")
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self.is_leaf = True

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy(), dtype=self.data.dtype)

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"<Tensor{label} shape={self.shape} dtype={self.dtype} requires_grad={self.requires_grad}>"

    # Operators delegate to tensor.ops so every path records the same way.
    def __add__(self, other):
        from . import ops
        return ops.add(self, other)

    def __radd__(self, other):
        from . import ops
        return ops.add(other, self)

    def __sub__(self, other):
        from . import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from . import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from . import ops
        return ops.mul(self, other)

    def __rmul__(self, other):
        from . import ops
        return ops.mul(other, self)

    def __truediv__(self, other):
        from . import ops
        return ops.div(self, other)

    def __neg__(self):
        from . import ops
        return ops.mul(self, -1.0)

    def __matmul__(self, other):
        from . import ops
        return ops.matmul(self, other)

    def __getitem__(self, key):
        from . import ops
        return ops.index(self, key)

    def reshape(self, *shape):
        from . import ops
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def permute(self, *axes):
        from . import ops
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return ops.permute(self, axes)

    def sum(self, axis=None, keepdims: bool = False):
        from . import ops
        return ops.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False):
        from . import ops
        return ops.mean(self, axis=axis, keepdims=keepdims)


BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class _Record:
    __slots__ = ("output", "parents", "backward", "op")

    def __init__(self, output: Tensor, parents: Tuple[Tensor, ...], backward: BackwardFn, op: str):
        self.output = output
        self.parents = parents
        self.backward = backward
        self.op = op


_ACTIVE_TAPES: List["Tape"] = []


def active_tape() -> Optional["Tape"]:
    return _ACTIVE_TAPES[-1] if _ACTIVE_TAPES else None


class Tape:
    """Ordered record of differentiable operations

    Operations record onto the innermost active tape. Without an active tape
    nothing is recorded and results carry no gradient, which is how
    evaluation runs.

        with Tape() as tape:
            loss = model.loss(model.forward(x, stamps), y)
        tape.backward(loss)
    """

    def __init__(self):
        self._records: List[_Record] = []
        self._leaves: Dict[int, Tensor] = {}

    def __enter__(self) -> "Tape":
        _ACTIVE_TAPES.append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        _ACTIVE_TAPES.remove(self)

    def __len__(self) -> int:
        return len(self._records)

    @property
    def ops(self) -> List[str]:
        return [record.op for record in self._records]

    def record(self, output: Tensor, parents: Tuple[Tensor, ...], backward: BackwardFn, op: str) -> None:
        for parent in parents:
            if parent.is_leaf and parent.requires_grad:
                self._leaves.setdefault(id(parent), parent)
        output.is_leaf = False
        self._records.append(_Record(output, parents, backward, op))

    def backward(self, loss: Tensor) -> None:
        """
        Propagate d(loss)/d(leaf) into every reachable requires_grad leaf

        Records are visited in exact reverse recording order. Gradients are
        accumulated into leaf.grad; intermediate tensors keep no gradient.
        The tape is emptied afterwards.

        Args:
            loss: Single-element tensor produced on this tape
        """
        if loss.size != 1:
            raise ShapeError(f"backward needs a single-element loss, got shape {loss.shape}")

        grads: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        if loss.is_leaf and loss.requires_grad:
            self._leaves.setdefault(id(loss), loss)

        for record in reversed(self._records):
            upstream = grads.pop(id(record.output), None)
            if upstream is None:
                continue
            for parent, grad in zip(record.parents, record.backward(upstream)):
                if grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                grads[key] = grad if key not in grads else grads[key] + grad

        for key, leaf in self._leaves.items():
            grad = grads.get(key)
            if grad is None:
                continue
            grad = np.asarray(grad, dtype=leaf.data.dtype).reshape(leaf.shape)
            leaf.grad = grad if leaf.grad is None else leaf.grad + grad

        logger.debug(f"backward over {len(self._records)} records, {len(self._leaves)} leaves")
        self._records.clear()
        self._leaves.clear()
