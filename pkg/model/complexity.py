"""Analytic parameter counts and multiply-add estimates

Both functions read only the config, so they can size a model before it is
built. The counts mirror the layer layout in hstmixer/stblock exactly.
"""
from typing import List

from embedding.layers import MINUTES_PER_DAY, DAYS_PER_WEEK
from .config import ModelConfig


def linear_parameters(in_features: int, out_features: int, bias: bool = True) -> int:
    return in_features * out_features + (out_features if bias else 0)


def mixing_mlp_parameters(length: int, dim: int, hidden: int) -> int:
    """LayerNorm gain/shift over d plus the FC pair on an axis of the given length"""
    return 2 * dim + linear_parameters(length, hidden) + linear_parameters(hidden, length)


def adaptive_mixer_parameters(steps: int, dim: int, hidden: int, pool_size: int) -> int:
    return 2 * dim + 2 * (pool_size * steps + pool_size * steps * hidden)


def region_mixer_parameters(units: int, steps: int, dim: int, hidden: int, adaptive: bool, pool_size: int = 0) -> int:
    if adaptive:
        temporal = adaptive_mixer_parameters(steps, dim, hidden, pool_size)
    else:
        temporal = mixing_mlp_parameters(steps, dim, hidden)
    return (mixing_mlp_parameters(units, dim, hidden) + temporal
            + mixing_mlp_parameters(steps * dim, dim, hidden) + mixing_mlp_parameters(dim, dim, hidden))


def _window_mixer_parameters(window: int, windows: int, dim: int, hidden: int) -> int:
    return linear_parameters(window * dim, hidden) + windows * hidden + linear_parameters(hidden, dim)


def parameter_count(config: ModelConfig) -> int:
    """
    Exact number of learnable scalars of HSTMixer(config)

    The frozen static embedding and the normalization buffers are excluded.
    """
    n, d, h = config.num_nodes, config.dim, config.hidden
    ablation = config.ablation
    lengths = config.pyramid_lengths()
    sizes = [n] + config.effective_regions

    total = 2 * d + n * d + (MINUTES_PER_DAY // config.interval_minutes) * d + DAYS_PER_WEEK * d
    for l in range(config.num_blocks):
        steps = lengths[l + 1]
        total += 2 * _window_mixer_parameters(config.effective_window, steps, d, h)
        total += region_mixer_parameters(n, steps, d, h, adaptive=False)
        for k, pool in enumerate(config.effective_pool_sizes):
            total += sizes[k + 1] * sizes[k]
            total += region_mixer_parameters(sizes[k + 1], steps, d, h, ablation.adaptive_mixing, pool)
            if ablation.spatial_propagation:
                total += linear_parameters(sizes[k + 1], sizes[k])
        total += linear_parameters(d, d)
    if ablation.temporal_propagation:
        total += linear_parameters(lengths[0], lengths[0])
        total += sum(linear_parameters(lengths[l - 1], lengths[l - 2]) for l in range(2, config.num_blocks + 2))
    total += linear_parameters(lengths[-1], config.input_len)
    total += linear_parameters(config.input_len * d, h) + linear_parameters(h, config.output_len)
    return total


def _mixer_flops(units: int, steps: int, dim: int, hidden: int, adaptive: bool, pool_size: int) -> int:
    spatial = 2 * steps * dim * units * hidden
    if adaptive:
        # two pools: scores then mixture of bases, then the two generated products
        temporal = 2 * (units * dim * steps * pool_size + units * pool_size * steps * hidden)
        temporal += 2 * units * steps * dim * hidden
    else:
        temporal = 2 * units * dim * steps * hidden
    spatiotemporal = 2 * units * steps * dim * hidden
    feature = 2 * units * steps * dim * hidden
    return spatial + temporal + spatiotemporal + feature


def flop_estimate(config: ModelConfig, batch: int = 1) -> int:
    """
    Multiply-adds of one forward pass, counting every matrix product

    Every term is either proportional to N or independent of it, so the
    estimate is exactly affine in num_nodes for fixed other settings.
    """
    n, d, h = config.num_nodes, config.dim, config.hidden
    p = config.effective_window
    ablation = config.ablation
    lengths: List[int] = config.pyramid_lengths()
    sizes = [n] + config.effective_regions

    total = n * config.input_len * d
    for l in range(config.num_blocks):
        steps = lengths[l + 1]
        total += 2 * (n * steps * p * d * h + n * steps * h * d)
        total += _mixer_flops(n, steps, d, h, False, 0)
        for k, pool in enumerate(config.effective_pool_sizes):
            total += sizes[k + 1] * sizes[k] * steps * d
            total += _mixer_flops(sizes[k + 1], steps, d, h, ablation.adaptive_mixing, pool)
            if ablation.spatial_propagation:
                total += sizes[k + 1] * sizes[k] * steps * d
        total += n * steps * d * d
    if ablation.temporal_propagation:
        total += n * d * lengths[0] * lengths[0]
        total += sum(n * d * lengths[l - 1] * lengths[l - 2] for l in range(2, config.num_blocks + 2))
    total += n * d * lengths[-1] * config.input_len
    total += n * config.input_len * d * h + n * h * config.output_len
    return batch * total
