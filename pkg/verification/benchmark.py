"""Runtime scaling in the number of nodes"""
import logging
import time
from dataclasses import dataclass, replace
from typing import List, Sequence

import numpy as np

from model import HSTMixer, ModelConfig, flop_estimate
from tensor import Tape
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

MIN_NODE_COUNTS = 3


@dataclass
class BenchResult:
    nodes: List[int]
    milliseconds: List[float]
    flops: List[int]
    slope: float


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log(y) against log(x)"""
    return float(np.polyfit(np.log(np.asarray(xs, dtype=np.float64)), np.log(np.asarray(ys, dtype=np.float64)), 1)[0])


def time_forward_backward(config: ModelConfig, batch: int = 1, repeats: int = 5, seed: int = 0) -> float:
    """
    Median wall time in milliseconds of one forward + backward pass

    One warmup pass runs first and is discarded.
    """
    model = HSTMixer(config, seed=seed)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((batch, config.num_nodes, config.input_len))
    y = rng.standard_normal((batch, config.num_nodes, config.output_len))
    minute_slot = np.tile(np.arange(config.input_len), (batch, 1))
    weekday = np.zeros((batch, config.input_len), dtype=np.int64)

    timings = []
    for i in range(repeats + 1):
        model.zero_grad()
        started = time.perf_counter()
        with Tape() as tape:
            loss = model.loss(model.forward(x, minute_slot, weekday), y)
        tape.backward(loss)
        elapsed = (time.perf_counter() - started) * 1000.0
        if i > 0:
            timings.append(elapsed)
    return float(np.median(timings))


def scaling_benchmark(config: ModelConfig, node_counts: Sequence[int], batch: int = 1, repeats: int = 5,
                      seed: int = 0) -> BenchResult:
    """
    Time the model at several node counts with every other setting fixed

    Raises:
        ConfigError: fewer than three node counts, or a count the region sizes do not fit under
    """
    nodes = sorted(int(n) for n in node_counts)
    if len(set(nodes)) < MIN_NODE_COUNTS:
        raise ConfigError(f"the benchmark needs at least {MIN_NODE_COUNTS} distinct node counts, got {nodes}")
    milliseconds, flops = [], []
    for n in nodes:
        sized = replace(config, num_nodes=n).validate()
        ms = time_forward_backward(sized, batch=batch, repeats=repeats, seed=seed)
        milliseconds.append(ms)
        flops.append(flop_estimate(sized, batch=batch))
        logger.info(f"N={n}: {ms:.2f} ms forward+backward")
    slope = loglog_slope(nodes, milliseconds)
    logger.info(f"log-log runtime slope over N={nodes}: {slope:.3f}")
    return BenchResult(nodes=nodes, milliseconds=milliseconds, flops=flops, slope=slope)
