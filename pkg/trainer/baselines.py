"""Reference forecasters: historical average per time-of-day slot and last value"""
import logging

import numpy as np

from data.splits import Normalizer, Split

logger = logging.getLogger(__name__)


class HistoricalAverage:
    """Mean of the training split at the same node and minute-of-day slot

    Slots never seen in training fall back to the node's overall mean.
    """

    def __init__(self, train: Split, output_len: int):
        self.output_len = output_len
        self.slots_per_day = train.slots_per_day
        sums = np.zeros((train.num_nodes, self.slots_per_day))
        counts = np.zeros(self.slots_per_day)
        np.add.at(sums.T, train.minute_slot, train.raw.T)
        np.add.at(counts, train.minute_slot, 1.0)
        node_mean = train.raw.mean(axis=1, keepdims=True)
        seen = counts > 0
        self.table = np.where(seen[None, :], sums / np.maximum(counts, 1.0)[None, :], node_mean)
        if not seen.all():
            logger.warning(f"{int((~seen).sum())} time-of-day slots never appear in training; using node means")

    def predict(self, x: np.ndarray, minute_slot: np.ndarray, weekday: np.ndarray) -> np.ndarray:
        last = np.asarray(minute_slot)[:, -1]
        slots = (last[:, None] + 1 + np.arange(self.output_len)) % self.slots_per_day
        return np.moveaxis(self.table[:, slots], 0, 1)


class LastValue:
    """Repeat the last observed input step across the horizon"""

    def __init__(self, normalizer: Normalizer, output_len: int):
        self.normalizer = normalizer
        self.output_len = output_len

    def predict(self, x: np.ndarray, minute_slot: np.ndarray, weekday: np.ndarray) -> np.ndarray:
        last = self.normalizer.denormalize(np.asarray(x)[..., -1:])
        return np.repeat(last, self.output_len, axis=-1)
