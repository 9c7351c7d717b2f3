import numpy as np
import pytest

from model import Ablation, ModelConfig
from verification import ModelVerifier, loglog_slope, scaling_benchmark, time_forward_backward
from utils.errors import ConfigError


class TestModelVerifier:
    def test_tiny_model_passes(self, tiny_config):
        results = ModelVerifier.verify_model(tiny_config, samples=2)
        assert results['complete'], results['failures']
        assert [c['name'] for c in results['checks']] == [
            "Gradient Check", "Pyramid Lengths", "Weight Score Normalization", "Orthogonal Loss Identity",
            "Parameter Count",
        ]
        assert results['max_error'] < 1e-5

    def test_ablated_model_passes(self):
        config = ModelConfig.tiny(ablation=Ablation().without("am"))
        assert ModelVerifier.verify_model(config, samples=1)['complete']

    def test_impossible_tolerance_fails(self, tiny_config):
        results = ModelVerifier.verify_model(tiny_config, samples=1, tolerance=0.0)
        assert not results['complete']
        assert results['failures'][0].startswith("Gradient Check")


class TestBenchmark:
    def test_slope_of_power_law(self):
        xs = [10, 20, 40, 80]
        assert loglog_slope(xs, [3.0 * x ** 1.5 for x in xs]) == pytest.approx(1.5)

    def test_needs_three_node_counts(self, tiny_config):
        with pytest.raises(ConfigError):
            scaling_benchmark(tiny_config, [8, 16, 16])

    def test_timing_is_positive(self, tiny_config):
        assert time_forward_backward(tiny_config, repeats=2) > 0.0

    def test_small_sweep(self, tiny_config):
        result = scaling_benchmark(tiny_config, [16, 8, 12], repeats=1)
        assert result.nodes == [8, 12, 16]
        assert len(result.milliseconds) == 3
        assert result.flops == sorted(result.flops)
        assert np.isfinite(result.slope)


@pytest.mark.slow
def test_runtime_grows_about_linearly():
    config = ModelConfig(num_nodes=256, dim=32, hidden=64, regions=[32, 8], pool_sizes=[4, 2])
    result = scaling_benchmark(config, [256, 512, 1024, 2048], repeats=3)
    assert 0.7 <= result.slope <= 1.3
