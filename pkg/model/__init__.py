"""HSTMixer model package"""
from .config import ModelConfig, Ablation, DATASET_PRESETS, SEARCH_GRID
from .hstmixer import HSTMixer, ForwardState
from .complexity import parameter_count, flop_estimate, mixing_mlp_parameters, linear_parameters

__all__ = [
    'ModelConfig', 'Ablation', 'DATASET_PRESETS', 'SEARCH_GRID',
    'HSTMixer', 'ForwardState',
    'parameter_count', 'flop_estimate', 'mixing_mlp_parameters', 'linear_parameters',
]
