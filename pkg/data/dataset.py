"""Traffic datasets: HSTD1 binary and CSV ingest, writing, temporal re-aggregation

HSTD1 layout, little-endian:

    5 bytes  magic "HSTD1"
    int64    N, T_total, start_epoch (unix seconds), interval_minutes
    float32  N * T_total values, time-major (all nodes of step 0, then step 1, ...)
"""
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from utils.errors import DataError, DataFormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MAGIC = b"HSTD1"
HEADER_FIELDS = 4
HEADER_SIZE = len(MAGIC) + 8 * HEADER_FIELDS
MINUTES_PER_DAY = 1440


@dataclass
class TrafficDataset:
    """A multivariate sensor series on a fixed time grid

    series is [N, T_total] float32. adjacency is an optional [E, 3] edge
    array (u, v, weight); regions holds ground-truth region labels for
    synthetic data.
    """
    series: np.ndarray
    start_epoch: int
    interval_minutes: int
    adjacency: Optional[np.ndarray] = None
    regions: Optional[np.ndarray] = None

    def __post_init__(self):
        self.series = np.ascontiguousarray(self.series, dtype=np.float32)
        if self.series.ndim != 2:
            raise DataError(f"series must be [N, T_total], got shape {self.series.shape}")
        if self.interval_minutes < 1 or MINUTES_PER_DAY % self.interval_minutes:
            raise DataError(f"interval of {self.interval_minutes} minutes does not divide a day")

    @property
    def num_nodes(self) -> int:
        return self.series.shape[0]

    @property
    def num_steps(self) -> int:
        return self.series.shape[1]

    @property
    def steps_per_day(self) -> int:
        return MINUTES_PER_DAY // self.interval_minutes

    def timestamps(self) -> pd.DatetimeIndex:
        seconds = self.start_epoch + np.arange(self.num_steps, dtype=np.int64) * self.interval_minutes * 60
        return pd.to_datetime(seconds, unit="s", utc=True)

    def time_features(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Calendar features of every step, in UTC

        Returns:
            (minute_slot, weekday): int64 arrays [T_total]; slot in
            [0, 1440 / interval), weekday with Monday = 0
        """
        stamps = self.timestamps()
        minutes = np.asarray(stamps.hour * 60 + stamps.minute, dtype=np.int64)
        return minutes // self.interval_minutes, np.asarray(stamps.dayofweek, dtype=np.int64)


def ingest(path: PathLike, aggregate_factor: int = 1) -> TrafficDataset:
    """
    Load a dataset from an HSTD1 file or a "timestamp,node_0,..." CSV

    Args:
        path: Source file; CSV is recognized by its .csv suffix
        aggregate_factor: Average this many consecutive steps on load (1 keeps the grid)

    Raises:
        DataFormatError: magic mismatch, truncated payload, bad CSV layout
            or non-monotone timestamps
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"Dataset not found: {path}")
    if path.suffix.lower() == ".csv":
        dataset = _read_csv(path)
    else:
        dataset = _read_hstd1(path)
    logger.info(f"Dataset loaded: {path} ({dataset.num_nodes} nodes, {dataset.num_steps} steps, "
                f"{dataset.interval_minutes} min)")
    if aggregate_factor != 1:
        dataset = aggregate(dataset, aggregate_factor)
    return dataset


def _read_hstd1(path: Path) -> TrafficDataset:
    raw = path.read_bytes()
    if raw[:len(MAGIC)] != MAGIC:
        raise DataFormatError(f"{path}: magic {raw[:len(MAGIC)]!r} does not match {MAGIC!r}")
    if len(raw) < HEADER_SIZE:
        raise DataFormatError(f"{path}: truncated header: expected {HEADER_SIZE} bytes, got {len(raw)}")
    num_nodes, num_steps, start_epoch, interval = (
        int(v) for v in np.frombuffer(raw, dtype="<i8", count=HEADER_FIELDS, offset=len(MAGIC)))
    if num_nodes < 1 or num_steps < 1:
        raise DataFormatError(f"{path}: header declares {num_nodes} nodes x {num_steps} steps")
    expected = HEADER_SIZE + 4 * num_nodes * num_steps
    if len(raw) < expected:
        raise DataFormatError(f"{path}: truncated payload: expected {expected} bytes, got {len(raw)}")
    if len(raw) > expected:
        raise DataFormatError(f"{path}: {len(raw) - expected} trailing bytes after the declared "
                              f"payload (expected {expected} bytes, got {len(raw)})")
    values = np.frombuffer(raw, dtype="<f4", offset=HEADER_SIZE).reshape(num_steps, num_nodes)
    try:
        return TrafficDataset(values.T.astype(np.float32), start_epoch, interval)
    except DataError as e:
        raise DataFormatError(f"{path}: {e}") from e


def _read_csv(path: Path) -> TrafficDataset:
    frame = pd.read_csv(path)
    if frame.columns[0] != "timestamp" or frame.shape[1] < 2:
        raise DataFormatError(f"{path}: expected a header 'timestamp,node_0,...'")
    if len(frame) < 2:
        raise DataFormatError(f"{path}: need at least two rows to infer the interval")
    column = frame["timestamp"]
    if pd.api.types.is_numeric_dtype(column):
        stamps = pd.to_datetime(column.astype(np.int64), unit="s", utc=True)
    else:
        stamps = pd.to_datetime(column, utc=True)
    if not (stamps.is_monotonic_increasing and stamps.is_unique):
        raise DataFormatError(f"{path}: non-monotone timestamps")
    seconds = ((stamps - pd.Timestamp("1970-01-01", tz="UTC")) // pd.Timedelta(seconds=1)).to_numpy(dtype=np.int64)
    gaps = np.unique(np.diff(seconds))
    if len(gaps) != 1 or gaps[0] % 60:
        raise DataFormatError(f"{path}: timestamps are not on a fixed whole-minute grid (gaps {gaps[:5]} s)")
    values = frame.drop(columns="timestamp").to_numpy(dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise DataFormatError(f"{path}: non-finite values in the series")
    try:
        return TrafficDataset(values.T, int(seconds[0]), int(gaps[0] // 60))
    except DataError as e:
        raise DataFormatError(f"{path}: {e}") from e


def write_hstd1(dataset: TrafficDataset, path: PathLike) -> Path:
    """
    Write a dataset in the HSTD1 layout

    Raises:
        DataError: if the destination cannot be written
    """
    path = Path(path)
    header = np.array([dataset.num_nodes, dataset.num_steps, dataset.start_epoch, dataset.interval_minutes],
                      dtype="<i8")
    payload = np.ascontiguousarray(dataset.series.T, dtype="<f4")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(MAGIC + header.tobytes() + payload.tobytes())
    except OSError as e:
        raise DataError(f"Cannot write dataset to {path}: {e}") from e
    logger.info(f"Dataset written: {path}")
    return path


def write_csv(dataset: TrafficDataset, path: PathLike) -> Path:
    """Write a dataset as "timestamp,node_0,..." with unix-second timestamps"""
    path = Path(path)
    seconds = dataset.start_epoch + np.arange(dataset.num_steps, dtype=np.int64) * dataset.interval_minutes * 60
    frame = pd.DataFrame(dataset.series.T, columns=[f"node_{i}" for i in range(dataset.num_nodes)])
    frame.insert(0, "timestamp", seconds)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False)
    except OSError as e:
        raise DataError(f"Cannot write dataset to {path}: {e}") from e
    return path


def aggregate(dataset: TrafficDataset, factor: int) -> TrafficDataset:
    """
    Average consecutive groups of `factor` steps, e.g. 5-minute to 15-minute data with factor 3

    A trailing partial group is dropped.
    """
    if factor < 1:
        raise DataError(f"aggregation factor must be >= 1, got {factor}")
    if factor == 1:
        return dataset
    interval = dataset.interval_minutes * factor
    if MINUTES_PER_DAY % interval:
        raise DataError(f"aggregating {dataset.interval_minutes} min by {factor} gives {interval} min, "
                        f"which does not divide a day")
    usable = (dataset.num_steps // factor) * factor
    if usable == 0:
        raise DataError(f"{dataset.num_steps} steps cannot be aggregated by {factor}")
    if usable < dataset.num_steps:
        logger.warning(f"Dropping {dataset.num_steps - usable} trailing steps that do not fill a group of {factor}")
    grouped = dataset.series[:, :usable].astype(np.float64).reshape(dataset.num_nodes, usable // factor, factor)
    return replace(dataset, series=grouped.mean(axis=2), interval_minutes=interval)


def write_region_labels(labels: np.ndarray, path: PathLike) -> Path:
    path = Path(path)
    frame = pd.DataFrame({"node_id": np.arange(len(labels)), "region_id": np.asarray(labels, dtype=np.int64)})
    try:
        frame.to_csv(path, index=False)
    except OSError as e:
        raise DataError(f"Cannot write region labels to {path}: {e}") from e
    return path


def read_region_labels(path: PathLike) -> np.ndarray:
    frame = pd.read_csv(path)
    if list(frame.columns) != ["node_id", "region_id"]:
        raise DataFormatError(f"{path}: expected header 'node_id,region_id'")
    return frame.sort_values("node_id")["region_id"].to_numpy(dtype=np.int64)


def write_adjacency(edges: np.ndarray, path: PathLike) -> Path:
    """Edge list as headerless "u,v,w" lines, the layout read_adjacency expects"""
    path = Path(path)
    frame = pd.DataFrame({"u": edges[:, 0].astype(np.int64), "v": edges[:, 1].astype(np.int64), "w": edges[:, 2]})
    try:
        frame.to_csv(path, index=False, header=False)
    except OSError as e:
        raise DataError(f"Cannot write adjacency to {path}: {e}") from e
    return path
