"""Training loop with validation, early stopping and best-checkpoint retention"""
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from data import SplitData, windows
from model import HSTMixer
from tensor import Tape, save_checkpoint
from utils.config import Config
from utils.errors import NumericalError
from .metrics import Metrics, evaluate
from .optimizer import Adam

logger = logging.getLogger(__name__)

LOG_COLUMNS = ("epoch", "train_loss", "val_mae", "val_rmse", "val_mape", "seconds")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val: Metrics
    seconds: float

    def log_line(self) -> str:
        values = [str(self.epoch), f"{self.train_loss:.10g}", f"{self.val.mae:.10g}", f"{self.val.rmse:.10g}",
                  f"{self.val.mape:.10g}", f"{self.seconds:.3f}"]
        return "\t".join(values)


@dataclass
class TrainReport:
    """Outcome of Trainer.train

    best_epoch is 0 when no epoch ran. last_good_epoch is the last epoch that
    completed without a numerical failure.
    """
    initial_val: Metrics
    history: List[EpochRecord] = field(default_factory=list)
    step_losses: List[float] = field(default_factory=list)
    best_epoch: int = 0
    best_val: Optional[Metrics] = None
    checkpoint: Optional[Path] = None
    stopped_early: bool = False
    diverged: bool = False
    last_good_epoch: int = 0

    @property
    def epochs_run(self) -> int:
        return len(self.history)


class Trainer:
    """Fits an HSTMixer on the train split and tracks validation MAE"""

    def __init__(self, model: HSTMixer, data: SplitData, output_dir: Optional[Union[str, Path]] = None,
                 lr: float = Config.LEARNING_RATE, batch_size: int = Config.BATCH_SIZE,
                 clip_norm: float = Config.CLIP_NORM, seed: int = 0):
        """
        Args:
            model: Model to train in place
            data: Splits and the train normalization statistics
            output_dir: Where the training log and best checkpoint go; nothing is written when None
            lr: Constant Adam learning rate
            batch_size: Windows per optimizer step
            clip_norm: Global gradient-norm clip
            seed: Seeds the batch order
        """
        self.model = model
        self.data = data
        self.output_dir = Path(output_dir) if output_dir is not None else None
        self.batch_size = batch_size
        cfg = model.config
        self.train_windows = windows(data.train, cfg.input_len, cfg.output_len)
        self.val_windows = windows(data.val, cfg.input_len, cfg.output_len)
        model.set_normalization(data.normalizer.mean, data.normalizer.std)
        self.optimizer = Adam(model.named_parameters(), lr=lr, clip_norm=clip_norm)
        self.rng = np.random.default_rng(seed)

    @property
    def checkpoint_path(self) -> Optional[Path]:
        return self.output_dir / Config.CHECKPOINT_FILE if self.output_dir else None

    @property
    def log_path(self) -> Optional[Path]:
        return self.output_dir / Config.TRAIN_LOG_FILE if self.output_dir else None

    def train_step(self, batch) -> float:
        """
        One forward/backward/update on a batch

        Raises:
            NumericalError: if the loss or a gradient is not finite
        """
        self.optimizer.zero_grad()
        with Tape() as tape:
            state = self.model.forward(batch.x, batch.minute_slot, batch.weekday)
            loss = self.model.loss(state, batch.y)
        value = loss.item()
        if not math.isfinite(value):
            raise NumericalError(f"training loss is {value} at step {self.optimizer.state.step + 1}")
        tape.backward(loss)
        self.optimizer.step()
        return value

    def evaluate(self) -> Metrics:
        return evaluate(self.model, self.val_windows, self.batch_size)

    def train(self, epochs: int, patience: int, max_steps: Optional[int] = None) -> TrainReport:
        """
        Run up to `epochs` passes over the train windows

        Args:
            epochs: Maximum number of epochs; 0 only evaluates the initial state
            patience: Stop after this many epochs without a new best val MAE
            max_steps: Optional cap on optimizer steps across all epochs

        Returns:
            TrainReport; a numerical failure ends training with diverged set and
            the model reset to its best epoch (or its initial state)
        """
        report = TrainReport(initial_val=self.evaluate())
        best_state = self.model.state_dict()
        logger.info(f"Initial val MAE {report.initial_val.mae:.4f}")
        if self.log_path:
            self.output_dir.mkdir(parents=True, exist_ok=True)
            with open(self.log_path, "w", encoding="utf-8") as f:
                f.write("\t".join(LOG_COLUMNS) + "\n")

        stale = 0
        for epoch in range(1, epochs + 1):
            started = time.perf_counter()
            losses = []
            try:
                for batch in self.train_windows.batches(self.batch_size, rng=self.rng):
                    if max_steps is not None and len(report.step_losses) >= max_steps:
                        break
                    loss = self.train_step(batch)
                    losses.append(loss)
                    report.step_losses.append(loss)
                val = self.evaluate()
                if not math.isfinite(val.mae):
                    raise NumericalError(f"validation MAE is {val.mae} after epoch {epoch}")
            except NumericalError as e:
                logger.error(f"Training diverged in epoch {epoch}: {e}; last good epoch {report.last_good_epoch}")
                report.diverged = True
                self.model.load_state_dict(best_state)
                logger.info(f"Restored parameters of epoch {report.best_epoch}")
                break

            record = EpochRecord(epoch, float(np.mean(losses)) if losses else float("nan"), val,
                                 time.perf_counter() - started)
            report.history.append(record)
            report.last_good_epoch = epoch
            if self.log_path:
                with open(self.log_path, "a", encoding="utf-8") as f:
                    f.write(record.log_line() + "\n")
            logger.info(f"Epoch {epoch}: train loss {record.train_loss:.4f}, val MAE {val.mae:.4f}, "
                        f"RMSE {val.rmse:.4f}, MAPE {val.mape:.2f}% ({record.seconds:.1f}s)")

            if report.best_val is None or val.mae < report.best_val.mae:
                report.best_val = val
                report.best_epoch = epoch
                best_state = self.model.state_dict()
                stale = 0
                if self.checkpoint_path:
                    report.checkpoint = save_checkpoint(self.checkpoint_path, self.model.state_dict())
            else:
                stale += 1
                if stale >= patience:
                    logger.info(f"No improvement for {stale} epoch(s); stopping after epoch {epoch}")
                    report.stopped_early = True
                    break
            if max_steps is not None and len(report.step_losses) >= max_steps:
                logger.info(f"Reached {max_steps} optimizer steps")
                break
        return report
