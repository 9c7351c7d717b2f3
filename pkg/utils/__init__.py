"""Utilities package"""
from .config import Config
from .errors import HSTMixerError, ConfigError, DataError, DataFormatError, NumericalError

__all__ = ['Config', 'HSTMixerError', 'ConfigError', 'DataError', 'DataFormatError', 'NumericalError']
