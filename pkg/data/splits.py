"""Chronological (optionally seasonal) splitting and z-score normalization with train-only statistics"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from utils.config import Config
from utils.errors import DataError, ConfigError
from .dataset import TrafficDataset

logger = logging.getLogger(__name__)

ROLES = ("train", "val", "test")
SEASONS = 4


@dataclass
class Normalizer:
    """x' = (x - mean) / std with mean/std shaped [N, 1] (per node) or [1, 1] (global)"""
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, values: np.ndarray, per_node: bool = False) -> "Normalizer":
        values = np.asarray(values, dtype=np.float64)
        if per_node:
            mean = values.mean(axis=1, keepdims=True)
            std = values.std(axis=1, keepdims=True)
        else:
            mean = np.full((1, 1), values.mean())
            std = np.full((1, 1), values.std())
        return cls(mean=mean, std=np.maximum(std, Config.STD_FLOOR))

    def normalize(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=np.float64) - self.mean) / self.std

    def denormalize(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=np.float64) * self.std + self.mean


@dataclass
class Split:
    """One role of a dataset: raw and normalized values plus calendar features

    segments lists [start, end) ranges of contiguous time inside this split;
    windows never cross from one segment into the next.
    """
    role: str
    raw: np.ndarray
    values: np.ndarray
    minute_slot: np.ndarray
    weekday: np.ndarray
    segments: List[Tuple[int, int]] = field(default_factory=list)
    slots_per_day: int = 96

    @property
    def num_nodes(self) -> int:
        return self.raw.shape[0]

    def __len__(self) -> int:
        return self.raw.shape[1]


@dataclass
class SplitData:
    train: Split
    val: Split
    test: Split
    normalizer: Normalizer

    def __getitem__(self, role: str) -> Split:
        if role not in ROLES:
            raise KeyError(role)
        return getattr(self, role)


def split_sizes(length: int, ratios: Sequence[float]) -> Tuple[int, int, int]:
    """train = floor(r0 * n), val = floor(r1 * n), test = the rest"""
    train = math.floor(ratios[0] * length + 1e-9)
    val = math.floor(ratios[1] * length + 1e-9)
    return train, val, length - train - val


def _check_ratios(ratios: Sequence[float]) -> None:
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-6:
        raise ConfigError(f"split ratios must be three non-negative numbers summing to 1, got {list(ratios)}")


def split_and_normalize(dataset: TrafficDataset, ratios: Sequence[float] = (0.6, 0.2, 0.2),
                        per_node: bool = False, seasonal: bool = False) -> SplitData:
    """
    Chronological train/val/test split; every split is normalized with the train statistics

    Args:
        dataset: Source dataset
        ratios: Fractions of (train, val, test)
        per_node: Per-node statistics instead of one global mean/std
        seasonal: Cut the series into four contiguous quarters, split each by
            `ratios`, and concatenate each role across quarters

    Raises:
        ConfigError: malformed ratios
        DataError: any role would be empty
    """
    _check_ratios(ratios)
    total = dataset.num_steps
    pieces = {role: [] for role in ROLES}
    blocks = ([(math.floor(q * total / SEASONS), math.floor((q + 1) * total / SEASONS)) for q in range(SEASONS)]
              if seasonal else [(0, total)])
    for start, end in blocks:
        sizes = split_sizes(end - start, ratios)
        cursor = start
        for role, size in zip(ROLES, sizes):
            if size == 0:
                raise DataError(f"empty {role} split: {end - start} steps at ratios {list(ratios)}")
            pieces[role].append((cursor, cursor + size))
            cursor += size

    minute_slot, weekday = dataset.time_features()
    train_raw = np.concatenate([dataset.series[:, s:e] for s, e in pieces["train"]], axis=1)
    normalizer = Normalizer.fit(train_raw, per_node=per_node)

    splits = {}
    for role in ROLES:
        ranges = pieces[role]
        raw = np.concatenate([dataset.series[:, s:e] for s, e in ranges], axis=1).astype(np.float64)
        offsets = np.cumsum([0] + [e - s for s, e in ranges])
        splits[role] = Split(
            role=role,
            raw=raw,
            values=normalizer.normalize(raw),
            minute_slot=np.concatenate([minute_slot[s:e] for s, e in ranges]),
            weekday=np.concatenate([weekday[s:e] for s, e in ranges]),
            segments=[(int(offsets[i]), int(offsets[i + 1])) for i in range(len(ranges))],
            slots_per_day=dataset.steps_per_day,
        )
        logger.debug(f"{role} split: {raw.shape[1]} steps in {len(ranges)} segment(s)")
    logger.info(f"Split {total} steps into train/val/test = {len(splits['train'])}/{len(splits['val'])}/"
                f"{len(splits['test'])} ({'per-node' if per_node else 'global'} statistics)")
    return SplitData(normalizer=normalizer, **splits)
