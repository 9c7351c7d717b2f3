"""Spatiotemporal mixing block package"""
from .pool import ParameterPool, AdaptiveWeights, weight_scores, generate_weights, adaptive_mix, orthogonal_loss
from .mixing import MixingMLP, AdaptiveMixingMLP, RegionMixer
from .temporal import WindowMixer, TemporalAggregationMixer, aggregated_length
from .cascade import SpatialCascadeMixer
from .block import STMixingBlock

__all__ = [
    'ParameterPool', 'AdaptiveWeights', 'weight_scores', 'generate_weights', 'adaptive_mix', 'orthogonal_loss',
    'MixingMLP', 'AdaptiveMixingMLP', 'RegionMixer',
    'WindowMixer', 'TemporalAggregationMixer', 'aggregated_length',
    'SpatialCascadeMixer', 'STMixingBlock',
]
