"""Central finite-difference gradient checking"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from utils.config import Config
from .tensor import Tensor, Tape, ShapeError, PrecisionError

logger = logging.getLogger(__name__)


@dataclass
class GradcheckReport:
    """Per-leaf max relative error |analytic - numeric| / max(1, |numeric|)"""
    errors: Dict[str, float] = field(default_factory=dict)
    checked: Dict[str, int] = field(default_factory=dict)

    @property
    def max_error(self) -> float:
        return max(self.errors.values()) if self.errors else 0.0

    def passed(self, tolerance: float = Config.GRADCHECK_TOLERANCE) -> bool:
        return self.max_error < tolerance

    def worst(self) -> Optional[str]:
        return max(self.errors, key=self.errors.get) if self.errors else None


def _evaluate(f: Callable[[], Tensor]) -> float:
    out = f()
    if out.size != 1:
        raise ShapeError(f"gradcheck needs a scalar-valued function, got shape {out.shape}")
    return float(out.data.reshape(-1)[0])


def gradcheck(f: Callable[[], Tensor], leaves: Sequence[Tensor], eps: float = Config.GRADCHECK_EPS,
              samples: Optional[int] = None, seed: int = 0, names: Optional[Sequence[str]] = None) -> GradcheckReport:
    """
    Compare tape gradients with central differences

    Args:
        f: Zero-argument callable returning a scalar Tensor computed from the leaves
        leaves: Leaf tensors (float64, requires_grad) to differentiate against
        eps: Finite-difference step
        samples: Coordinates checked per leaf, drawn deterministically from seed; None checks all
        seed: Seed for coordinate sampling
        names: Optional labels for the report, defaults to leaf.name or the leaf index

    Returns:
        GradcheckReport with per-leaf max relative error

    Raises:
        PrecisionError: if any leaf is not 64-bit
        ShapeError: if f does not return a single element
    """
    for leaf in leaves:
        if leaf.dtype != np.float64:
            raise PrecisionError(f"gradcheck needs float64 leaves, {leaf!r} is {leaf.dtype}")

    labels = list(names) if names is not None else [leaf.name or f"leaf{i}" for i, leaf in enumerate(leaves)]
    for leaf in leaves:
        leaf.grad = None

    with Tape() as tape:
        out = f()
        if out.size != 1:
            raise ShapeError(f"gradcheck needs a scalar-valued function, got shape {out.shape}")
    tape.backward(out)

    rng = np.random.default_rng(seed)
    report = GradcheckReport()
    for label, leaf in zip(labels, leaves):
        analytic = leaf.grad.reshape(-1) if leaf.grad is not None else np.zeros(leaf.size)
        flat = leaf.data.reshape(-1)
        coords = np.arange(flat.size)
        if samples is not None and samples < flat.size:
            coords = np.sort(rng.choice(flat.size, size=samples, replace=False))

        worst = 0.0
        for i in coords:
            original = flat[i]
            flat[i] = original + eps
            plus = _evaluate(f)
            flat[i] = original - eps
            minus = _evaluate(f)
            flat[i] = original
            numeric = (plus - minus) / (2.0 * eps)
            worst = max(worst, abs(analytic[i] - numeric) / max(1.0, abs(numeric)))
        report.errors[label] = float(worst)
        report.checked[label] = int(len(coords))

    logger.info(f"gradcheck over {len(leaves)} leaves: max relative error {report.max_error:.3e} "
                f"(worst: {report.worst()})")
    return report
