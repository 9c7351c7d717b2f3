"""Model verification with binary success criteria.

Verification checklist:
  1. Full-model finite-difference gradient check at 64-bit precision
  2. Temporal pyramid lengths follow T_l = ceil(T_{l-1} / p)
  3. Pool weight scores sum to 1 along the pool axis
  4. Orthogonal loss of identical region weights is exactly 1 per scale
  5. Analytic parameter count matches the built model

Binary criteria: ALL passed = success, else = failure.
"""
import logging
from typing import Optional

import numpy as np

from model import HSTMixer, ModelConfig, parameter_count
from stblock import AdaptiveWeights, ParameterPool, orthogonal_loss, weight_scores
from tensor import Tensor, default_dtype, gradcheck
from utils.config import Config

logger = logging.getLogger(__name__)


class ModelVerifier:
    """Verifies an HSTMixer configuration end to end"""

    SOFTMAX_TRIALS = 100
    IDENTITY_TOLERANCE = 1e-6

    @classmethod
    def verify_model(cls, config: ModelConfig, seed: int = 0, batch: int = 2,
                     samples: Optional[int] = None, tolerance: float = Config.GRADCHECK_TOLERANCE) -> dict:
        """
        Run all verification checks

        Args:
            config: Model configuration, normally ModelConfig.tiny()
            seed: Seeds the model and the random inputs
            batch: Batch size of the gradient check input
            samples: Coordinates per parameter for the gradient check; None checks all
            tolerance: Max relative error accepted by the gradient check

        Returns:
            {'complete', 'checks', 'failures', 'max_error'}
        """
        results = {'complete': True, 'checks': [], 'failures': [], 'max_error': float('nan')}

        with default_dtype(np.float64):
            model = HSTMixer(config, seed=seed)
            inputs = cls._random_inputs(config, seed, batch)
            name, passed, message, max_error = cls._check_gradients(model, inputs, seed, samples, tolerance)
            results['max_error'] = max_error
            outcomes = [
                (name, passed, message),
                cls._check_pyramid(model, inputs),
                cls._check_weight_scores(config, seed),
                cls._check_orthogonal_identity(config),
                cls._check_parameter_count(model),
            ]

        for name, passed, message in outcomes:
            results['checks'].append({'name': name, 'passed': passed, 'message': message})
            if not passed:
                results['complete'] = False
                results['failures'].append(f"{name}: {message}")
                logger.warning(f"Verification failed - {name}: {message}")

        if results['complete']:
            logger.info("Model verification passed all checks")
        else:
            logger.error(f"Model verification failed: {len(results['failures'])} issues")
        return results

    @staticmethod
    def _random_inputs(config: ModelConfig, seed: int, batch: int):
        rng = np.random.default_rng(seed + 1)
        slots = 1440 // config.interval_minutes
        x = rng.standard_normal((batch, config.num_nodes, config.input_len))
        start = rng.integers(0, slots, size=(batch, 1))
        minute_slot = (start + np.arange(config.input_len)) % slots
        weekday = np.repeat(rng.integers(0, 7, size=(batch, 1)), config.input_len, axis=1)
        y = rng.standard_normal((batch, config.num_nodes, config.output_len))
        return x, minute_slot, weekday, y

    @classmethod
    def _check_gradients(cls, model: HSTMixer, inputs, seed: int, samples: Optional[int], tolerance: float):
        x, minute_slot, weekday, y = inputs
        named = model.named_parameters()

        def objective() -> Tensor:
            return model.loss(model.forward(x, minute_slot, weekday), y)

        report = gradcheck(objective, [p for _, p in named], samples=samples, seed=seed,
                           names=[n for n, _ in named])
        checked = sum(report.checked.values())
        if report.passed(tolerance):
            return ("Gradient Check", True,
                    f"max relative error {report.max_error:.3e} over {checked} coordinates", report.max_error)
        return ("Gradient Check", False,
                f"max relative error {report.max_error:.3e} >= {tolerance:g} (worst: {report.worst()})",
                report.max_error)

    @classmethod
    def _check_pyramid(cls, model: HSTMixer, inputs):
        x, minute_slot, weekday, _ = inputs
        expected = model.config.pyramid_lengths()
        state = model.forward(x, minute_slot, weekday)
        actual = [level.shape[2] for level in state.pyramid]
        if actual == expected:
            return "Pyramid Lengths", True, f"{' -> '.join(map(str, actual))}"
        return "Pyramid Lengths", False, f"expected {expected}, got {actual}"

    @classmethod
    def _check_weight_scores(cls, config: ModelConfig, seed: int):
        """Softmax scores of random inputs against a random pool"""
        rng = np.random.default_rng(seed + 2)
        pool_size = max(config.pool_sizes, default=2)
        pool = ParameterPool(pool_size, config.input_len, config.hidden, rng)
        worst = 0.0
        for _ in range(cls.SOFTMAX_TRIALS):
            h = Tensor(rng.standard_normal((2, 3, config.input_len, config.dim)) * 3.0)
            sums = weight_scores(h, pool).data.sum(axis=-1)
            worst = max(worst, float(np.max(np.abs(sums - 1.0))))
        if worst <= cls.IDENTITY_TOLERANCE:
            return "Weight Score Normalization", True, f"max deviation {worst:.2e} over {cls.SOFTMAX_TRIALS} inputs"
        return "Weight Score Normalization", False, f"scores deviate from 1 by {worst:.2e}"

    @classmethod
    def _check_orthogonal_identity(cls, config: ModelConfig):
        rng = np.random.default_rng(0)
        regions = max(config.regions, default=2)
        shared = rng.standard_normal((config.input_len, config.hidden))
        block = np.broadcast_to(shared, (1, regions, config.input_len, config.hidden))
        value = orthogonal_loss([AdaptiveWeights(0, 0, Tensor(block), Tensor(block))]).item()
        if abs(value - 1.0) <= cls.IDENTITY_TOLERANCE:
            return "Orthogonal Loss Identity", True, f"identical regions give {value:.8f}"
        return "Orthogonal Loss Identity", False, f"identical regions give {value:.8f}, expected 1"

    @classmethod
    def _check_parameter_count(cls, model: HSTMixer):
        built, analytic = model.num_parameters(), parameter_count(model.config)
        if built == analytic:
            return "Parameter Count", True, f"{built} learnable scalars"
        return "Parameter Count", False, f"model has {built} learnable scalars, analytic count is {analytic}"
