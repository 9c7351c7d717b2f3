"""MAE, RMSE and masked MAPE, overall and per forecast horizon"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from utils.config import Config
from utils.errors import DataError

logger = logging.getLogger(__name__)


@dataclass
class Metrics:
    """Errors in data units; mape is a percentage. horizon_* hold one value per step ahead."""
    mae: float
    rmse: float
    mape: float
    horizon_mae: List[float] = field(default_factory=list)
    horizon_rmse: List[float] = field(default_factory=list)
    horizon_mape: List[float] = field(default_factory=list)

    def fields(self, prefix: str = "", horizons: bool = False) -> Dict[str, float]:
        """Flat name -> value mapping for key=value output"""
        values = {f"{prefix}mae": self.mae, f"{prefix}rmse": self.rmse, f"{prefix}mape": self.mape}
        if horizons:
            for i, value in enumerate(self.horizon_mae, start=1):
                values[f"{prefix}h{i}_mae"] = value
        return values


def _masked_mape(error: np.ndarray, target: np.ndarray, floor: float) -> float:
    mask = np.abs(target) >= floor
    if not mask.any():
        return float("nan")
    return float(np.mean(np.abs(error[mask]) / np.abs(target[mask])) * 100.0)


def compute_metrics(prediction: np.ndarray, target: np.ndarray, mape_floor: float = Config.MAPE_FLOOR) -> Metrics:
    """
    Compare predictions with targets of the same shape; the last axis is the horizon

    MAPE averages only entries with |target| >= mape_floor; with no such
    entry it is reported as 0.0.

    Raises:
        DataError: empty input or mismatched shapes
    """
    prediction = np.asarray(prediction, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if prediction.shape != target.shape:
        raise DataError(f"prediction {prediction.shape} and target {target.shape} differ in shape")
    if target.size == 0:
        raise DataError("cannot compute metrics on an empty split")
    error = prediction - target

    mape = _masked_mape(error, target, mape_floor)
    if np.isnan(mape):
        logger.warning(f"No target reaches the MAPE floor {mape_floor}; reporting MAPE as 0")
        mape = 0.0

    horizon_error = error.reshape(-1, error.shape[-1])
    horizon_target = target.reshape(-1, target.shape[-1])
    horizon_mape = [_masked_mape(horizon_error[:, i], horizon_target[:, i], mape_floor)
                    for i in range(error.shape[-1])]
    return Metrics(
        mae=float(np.mean(np.abs(error))),
        rmse=float(np.sqrt(np.mean(error * error))),
        mape=mape,
        horizon_mae=[float(v) for v in np.mean(np.abs(horizon_error), axis=0)],
        horizon_rmse=[float(v) for v in np.sqrt(np.mean(horizon_error * horizon_error, axis=0))],
        horizon_mape=[0.0 if np.isnan(v) else v for v in horizon_mape],
    )


def evaluate(model, window_set, batch_size: int = Config.BATCH_SIZE) -> Metrics:
    """
    Run the model over every window of a split without recording gradients

    Args:
        model: Anything with predict(x, minute_slot, weekday) -> [B, N, T_pred]
        window_set: data.WindowSet of the split
        batch_size: Windows per forward pass

    Returns:
        Metrics over all windows, reduced in window order
    """
    if len(window_set) == 0:
        raise DataError("cannot evaluate on an empty split")
    predictions, targets = [], []
    for batch in window_set.batches(batch_size):
        predictions.append(model.predict(batch.x, batch.minute_slot, batch.weekday))
        targets.append(batch.y)
    return compute_metrics(np.concatenate(predictions), np.concatenate(targets))
