"""Optimization, metrics, baselines and the training loop"""
from .optimizer import Adam, OptimizerState
from .metrics import Metrics, compute_metrics, evaluate
from .baselines import HistoricalAverage, LastValue
from .trainer import Trainer, TrainReport, EpochRecord, LOG_COLUMNS

__all__ = [
    'Adam', 'OptimizerState', 'Metrics', 'compute_metrics', 'evaluate',
    'HistoricalAverage', 'LastValue', 'Trainer', 'TrainReport', 'EpochRecord', 'LOG_COLUMNS',
]
