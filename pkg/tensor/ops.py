"""Differentiable operations on Tensor

Every op computes its value with numpy and, when a tape is active and an
input requires a gradient, records a closure returning one gradient per
input. Broadcasting is limited to leading batch axes (the shorter shape must
be a suffix of the longer one); anything else goes through an explicit
broadcast_to.
"""
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import erf, expit

from utils.config import Config
from .tensor import Tensor, ShapeError, active_tape

Operand = Union[Tensor, float, int, np.ndarray]


def _lift(value: Operand, like: Optional[Tensor] = None) -> Tensor:
    if isinstance(value, Tensor):
        return value
    dtype = like.dtype if like is not None else None
    return Tensor(value, dtype=dtype)


def _result(data, parents: Sequence[Tensor], backward, op: str) -> Tensor:
    data = np.asarray(data)
    out = Tensor(data, dtype=data.dtype)
    tape = active_tape()
    if tape is not None and any(p.requires_grad for p in parents):
        out.requires_grad = True
        tape.record(out, tuple(parents), backward, op)
    return out


def _axes(axis, ndim: int) -> Tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, (int, np.integer)):
        axis = (int(axis),)
    normalized = []
    for ax in axis:
        if not -ndim <= ax < ndim:
            raise ShapeError(f"axis {ax} is out of range for a {ndim}-d tensor")
        normalized.append(ax % ndim)
    return tuple(sorted(set(normalized)))


def _axis(axis: int, ndim: int) -> int:
    return _axes(axis, ndim)[0]


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a gradient back down to the shape of the operand it belongs to."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, length in enumerate(shape):
        if length == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _check_aligned(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape == b.shape:
        return
    short, long = sorted((a.shape, b.shape), key=len)
    if len(short) < len(long) and long[len(long) - len(short):] == short:
        return
    raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} are not aligned (only leading axes broadcast)")


def _check_same(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} differ")


# ---------------------------------------------------------------------------
# Elementwise arithmetic
# ---------------------------------------------------------------------------

def add(a: Operand, b: Operand) -> Tensor:
    a, b = _lift(a, b if isinstance(b, Tensor) else None), _lift(b, a if isinstance(a, Tensor) else None)
    _check_aligned(a, b, "add")

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _result(a.data + b.data, (a, b), backward, "add")


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = _lift(a, b if isinstance(b, Tensor) else None), _lift(b, a if isinstance(a, Tensor) else None)
    _check_aligned(a, b, "sub")

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return _result(a.data - b.data, (a, b), backward, "sub")


def mul(a: Operand, b: Operand) -> Tensor:
    a, b = _lift(a, b if isinstance(b, Tensor) else None), _lift(b, a if isinstance(a, Tensor) else None)
    _check_aligned(a, b, "mul")

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _result(a.data * b.data, (a, b), backward, "mul")


def div(a: Operand, b: Operand) -> Tensor:
    a, b = _lift(a, b if isinstance(b, Tensor) else None), _lift(b, a if isinstance(a, Tensor) else None)
    _check_aligned(a, b, "div")

    def backward(g):
        return (_unbroadcast(g / b.data, a.shape),
                _unbroadcast(-g * a.data / (b.data * b.data), b.shape))

    return _result(a.data / b.data, (a, b), backward, "div")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Batched matrix product over the last two axes; leading axes broadcast."""
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul: cannot contract {a.shape} with {b.shape}")
    try:
        out = np.matmul(a.data, b.data)
    except ValueError:
        raise ShapeError(f"matmul: batch axes of {a.shape} and {b.shape} do not broadcast")

    def backward(g):
        ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
        gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return _result(out, (a, b), backward, "matmul")


# ---------------------------------------------------------------------------
# Shape manipulation
# ---------------------------------------------------------------------------

def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    try:
        out = x.data.reshape(tuple(shape))
    except ValueError:
        raise ShapeError(f"reshape: cannot view {x.shape} as {tuple(shape)}")

    def backward(g):
        return (g.reshape(x.shape),)

    return _result(out, (x,), backward, "reshape")


def permute(x: Tensor, axes: Sequence[int]) -> Tensor:
    if len(axes) != x.ndim:
        raise ShapeError(f"permute: {tuple(axes)} is not a permutation of the axes of {x.shape}")
    axes = tuple(_axis(a, x.ndim) for a in axes)
    if sorted(axes) != list(range(x.ndim)):
        raise ShapeError(f"permute: {axes} is not a permutation of the axes of {x.shape}")
    inverse = tuple(np.argsort(axes))

    def backward(g):
        return (np.transpose(g, inverse),)

    return _result(np.transpose(x.data, axes), (x,), backward, "permute")


def transpose(x: Tensor, axis1: int = -2, axis2: int = -1) -> Tensor:
    order = list(range(x.ndim))
    a, b = _axis(axis1, x.ndim), _axis(axis2, x.ndim)
    order[a], order[b] = order[b], order[a]
    return permute(x, order)


def moveaxis(x: Tensor, source: int, destination: int) -> Tensor:
    src, dst = _axis(source, x.ndim), _axis(destination, x.ndim)
    order = [n for n in range(x.ndim) if n != src]
    order.insert(dst, src)
    return permute(x, order)


def broadcast_to(x: Tensor, shape: Sequence[int]) -> Tensor:
    """Explicit numpy-style broadcast, including size-1 axes."""
    try:
        out = np.broadcast_to(x.data, tuple(shape))
    except ValueError:
        raise ShapeError(f"broadcast_to: cannot broadcast {x.shape} to {tuple(shape)}")

    def backward(g):
        return (_unbroadcast(g, x.shape),)

    return _result(out, (x,), backward, "broadcast_to")


def _is_basic_index(key) -> bool:
    items = key if isinstance(key, tuple) else (key,)
    return all(isinstance(k, (int, np.integer, slice, type(Ellipsis), type(None))) for k in items)


def index(x: Tensor, key) -> Tensor:
    out = x.data[key]
    basic = _is_basic_index(key)

    def backward(g):
        gx = np.zeros_like(x.data)
        if basic:
            gx[key] += g
        else:
            np.add.at(gx, key, g)
        return (gx,)

    return _result(np.array(out), (x,), backward, "index")


def take(x: Tensor, indices, axis: int = 0) -> Tensor:
    """Gather entries of x along one axis; repeated indices accumulate gradient."""
    ax = _axis(axis, x.ndim)
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= x.shape[ax]):
        raise ShapeError(f"take: indices out of range [0, {x.shape[ax]}) along axis {ax} of {x.shape}")

    def backward(g):
        gx = np.zeros_like(x.data)
        target = np.moveaxis(gx, ax, 0)
        k = idx.ndim
        # gathered axes sit at [ax, ax + k) of g
        source = np.moveaxis(g, list(range(ax, ax + k)), list(range(k)))
        np.add.at(target, idx, source)
        return (gx,)

    return _result(np.take(x.data, idx, axis=ax), (x,), backward, "take")


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = list(tensors)
    if not tensors:
        raise ShapeError("concat: nothing to concatenate")
    ax = _axis(axis, tensors[0].ndim)
    reference = tensors[0].shape[:ax] + tensors[0].shape[ax + 1:]
    for t in tensors[1:]:
        if t.ndim != tensors[0].ndim or t.shape[:ax] + t.shape[ax + 1:] != reference:
            raise ShapeError(f"concat: {t.shape} does not match {tensors[0].shape} outside axis {ax}")
    sizes = [t.shape[ax] for t in tensors]
    cuts = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.split(g, cuts, axis=ax))

    return _result(np.concatenate([t.data for t in tensors], axis=ax), tensors, backward, "concat")


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = list(tensors)
    if not tensors:
        raise ShapeError("stack: nothing to stack")
    for t in tensors[1:]:
        if t.shape != tensors[0].shape:
            raise ShapeError(f"stack: {t.shape} does not match {tensors[0].shape}")
    ax = axis % (tensors[0].ndim + 1)

    def backward(g):
        return tuple(np.take(g, i, axis=ax) for i in range(len(tensors)))

    return _result(np.stack([t.data for t in tensors], axis=ax), tensors, backward, "stack")


# ---------------------------------------------------------------------------
# Reductions
# ---------------------------------------------------------------------------

def sum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axes = _axes(axis, x.ndim)

    def backward(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return (np.array(np.broadcast_to(g, x.shape)),)

    return _result(x.data.sum(axis=axes, keepdims=keepdims), (x,), backward, "sum")


def mean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    axes = _axes(axis, x.ndim)
    count = int(np.prod([x.shape[a] for a in axes])) if axes else 1
    return mul(sum(x, axis=axes, keepdims=keepdims), 1.0 / count)


# ---------------------------------------------------------------------------
# Nonlinearities
# ---------------------------------------------------------------------------

def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)

    def backward(g):
        return (g * (1.0 - y * y),)

    return _result(y, (x,), backward, "tanh")


def sigmoid(x: Tensor) -> Tensor:
    y = expit(x.data)

    def backward(g):
        return (g * y * (1.0 - y),)

    return _result(y, (x,), backward, "sigmoid")


def gelu(x: Tensor) -> Tensor:
    """Exact GELU, x * Phi(x)."""
    cdf = 0.5 * (1.0 + erf(x.data / np.sqrt(2.0)))
    pdf = np.exp(-0.5 * x.data * x.data) / np.sqrt(2.0 * np.pi)

    def backward(g):
        return (g * (cdf + x.data * pdf),)

    return _result(x.data * cdf, (x,), backward, "gelu")


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    ax = _axis(axis, x.ndim)
    shifted = x.data - x.data.max(axis=ax, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=ax, keepdims=True)

    def backward(g):
        return (y * (g - (g * y).sum(axis=ax, keepdims=True)),)

    return _result(y, (x,), backward, "softmax")


def gated_fuse(a: Tensor, b: Tensor) -> Tensor:
    """tanh(a) * sigmoid(b), elementwise."""
    _check_same(a, b, "gated_fuse")
    ta = np.tanh(a.data)
    sb = expit(b.data)

    def backward(g):
        return g * sb * (1.0 - ta * ta), g * ta * sb * (1.0 - sb)

    return _result(ta * sb, (a, b), backward, "gated_fuse")


def layernorm(x: Tensor, axis: int = -1, gamma: Optional[Tensor] = None, beta: Optional[Tensor] = None,
              eps: float = Config.LAYERNORM_EPS) -> Tensor:
    """Normalize along one axis to zero mean and unit (population) variance, then scale and shift."""
    ax = _axis(axis, x.ndim)
    length = x.shape[ax]
    for affine in (gamma, beta):
        if affine is not None and affine.shape != (length,):
            raise ShapeError(f"layernorm: affine shape {affine.shape} does not match axis length {length} of {x.shape}")

    xm = np.moveaxis(x.data, ax, -1)
    centered = xm - xm.mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt((centered * centered).mean(axis=-1, keepdims=True) + eps)
    xhat = centered * inv_std
    scale = gamma.data if gamma is not None else 1.0
    shift = beta.data if beta is not None else 0.0
    out = np.moveaxis(xhat * scale + shift, -1, ax)
    parents = [x] + [t for t in (gamma, beta) if t is not None]

    def backward(g):
        gm = np.moveaxis(g, ax, -1)
        dxhat = gm * scale
        dx = inv_std * (dxhat - dxhat.mean(axis=-1, keepdims=True)
                        - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True))
        lead = tuple(range(gm.ndim - 1))
        grads = [np.moveaxis(dx, -1, ax)]
        if gamma is not None:
            grads.append((gm * xhat).sum(axis=lead))
        if beta is not None:
            grads.append(gm.sum(axis=lead))
        return grads

    return _result(out, parents, backward, "layernorm")


# ---------------------------------------------------------------------------
# Losses and similarities
# ---------------------------------------------------------------------------

def mae(prediction: Tensor, target: Operand) -> Tensor:
    """Mean absolute error over every entry."""
    target = _lift(target, prediction)
    _check_same(prediction, target, "mae")
    diff = prediction.data - target.data
    count = diff.size

    def backward(g):
        step = np.sign(diff) * (g / count)
        return step, -step

    return _result(np.abs(diff).mean(), (prediction, target), backward, "mae")


def l2_normalize(x: Tensor, axis: int = -1, eps: float = Config.COSINE_EPS) -> Tensor:
    """x / max(||x||, eps) along one axis; zero vectors map to zero."""
    ax = _axis(axis, x.ndim)
    norm = np.sqrt((x.data * x.data).sum(axis=ax, keepdims=True))
    denom = np.maximum(norm, eps)
    y = x.data / denom

    def backward(g):
        proj = (g * y).sum(axis=ax, keepdims=True)
        return (np.where(norm > eps, (g - y * proj) / denom, g / denom),)

    return _result(y, (x,), backward, "l2_normalize")


def cosine_similarity(a: Tensor, b: Tensor, axis: int = -1, eps: float = Config.COSINE_EPS) -> Tensor:
    """Cosine of the angle between matching vectors of a and b; 0 when either has zero norm."""
    _check_same(a, b, "cosine_similarity")
    return sum(mul(l2_normalize(a, axis, eps), l2_normalize(b, axis, eps)), axis=axis)


def pairwise_cosine(x: Tensor, eps: float = Config.COSINE_EPS) -> Tensor:
    """Cosine similarity between every pair of rows: [..., S, F] -> [..., S, S]."""
    unit = l2_normalize(x, -1, eps)
    return matmul(unit, transpose(unit, -1, -2))
