"""Sliding (input, target) windows over a split"""
import logging
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from utils.errors import DataError
from .splits import Split

logger = logging.getLogger(__name__)


@dataclass
class SampleBatch:
    """x is normalized [B, N, T]; y is in data units [B, N, T_pred]; calendar features belong to x"""
    x: np.ndarray
    y: np.ndarray
    minute_slot: np.ndarray
    weekday: np.ndarray

    @property
    def size(self) -> int:
        return self.x.shape[0]


class WindowSet:
    """All windows of one split: x = steps [i, i+T), y = steps [i+T, i+T+T_pred)

    Offsets are generated per segment, so a window never spans two segments.
    Indexing returns a single-sample SampleBatch.
    """

    def __init__(self, split: Split, input_len: int, output_len: int, stride: int = 1):
        if input_len < 1 or output_len < 1 or stride < 1:
            raise DataError(f"window lengths and stride must be positive (T={input_len}, "
                            f"T_pred={output_len}, stride={stride})")
        self.split = split
        self.input_len = input_len
        self.output_len = output_len
        span = input_len + output_len
        offsets = []
        for start, end in split.segments:
            if end - start < span:
                logger.warning(f"{split.role} segment [{start}, {end}) is shorter than one window ({span} steps)")
                continue
            offsets.extend(range(start, end - span + 1, stride))
        if not offsets:
            raise DataError(f"{split.role} split too short: {len(split)} steps, a window needs {span}")
        self.offsets = np.asarray(offsets, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.offsets)

    def __getitem__(self, index: int) -> SampleBatch:
        return self.batch([index])

    def batch(self, indices: Sequence[int]) -> SampleBatch:
        starts = self.offsets[np.asarray(indices, dtype=np.int64)]
        x_steps = starts[:, None] + np.arange(self.input_len)
        y_steps = starts[:, None] + self.input_len + np.arange(self.output_len)
        return SampleBatch(
            x=np.moveaxis(self.split.values[:, x_steps], 0, 1),
            y=np.moveaxis(self.split.raw[:, y_steps], 0, 1),
            minute_slot=self.split.minute_slot[x_steps],
            weekday=self.split.weekday[x_steps],
        )

    def batches(self, batch_size: int, rng: Optional[np.random.Generator] = None) -> Iterator[SampleBatch]:
        """Consecutive batches in offset order, or in a shuffled order when rng is given"""
        order = np.arange(len(self)) if rng is None else rng.permutation(len(self))
        for start in range(0, len(order), batch_size):
            yield self.batch(order[start:start + batch_size])


def windows(split: Split, input_len: int, output_len: int, stride: int = 1) -> WindowSet:
    return WindowSet(split, input_len, output_len, stride=stride)
