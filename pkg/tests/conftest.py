"""Shared fixtures: seeded generators, tiny configs and a small synthetic dataset"""
import numpy as np
import pytest

from data import split_and_normalize, synth
from model import ModelConfig
from tensor import default_dtype


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def float64():
    with default_dtype(np.float64):
        yield


@pytest.fixture
def tiny_config():
    return ModelConfig.tiny()


@pytest.fixture
def small_config():
    """Trainable in seconds on the small dataset"""
    return ModelConfig(num_nodes=8, dim=8, hidden=16, num_blocks=2, regions=[4, 2], pool_sizes=[2, 2])


@pytest.fixture
def small_dataset():
    # four days of 15-minute data
    return synth(num_nodes=8, num_steps=384, num_regions=2, seed=3, sigma=0.1)


@pytest.fixture
def small_splits(small_dataset):
    return split_and_normalize(small_dataset)


def random_inputs(config, batch=2, seed=1):
    """(x, minute_slot, weekday, y) drawn for a model config"""
    gen = np.random.default_rng(seed)
    slots = 1440 // config.interval_minutes
    x = gen.standard_normal((batch, config.num_nodes, config.input_len))
    minute_slot = (gen.integers(0, slots, size=(batch, 1)) + np.arange(config.input_len)) % slots
    weekday = np.repeat(gen.integers(0, 7, size=(batch, 1)), config.input_len, axis=1)
    y = gen.standard_normal((batch, config.num_nodes, config.output_len))
    return x, minute_slot, weekday, y
