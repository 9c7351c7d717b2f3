"""Command implementations and argument parsing

Every command prints its results to stdout as single key=value lines and
returns a process exit code:

    0 success, 1 usage or configuration error, 2 data error,
    3 numerical failure (NaN, divergence, failed gradient check)
"""
import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from data import (SplitData, TrafficDataset, ingest, split_and_normalize, synth, windows, write_adjacency,
                  write_csv, write_hstd1, write_region_labels)
from embedding import load_static_embeddings
from model import HSTMixer, ModelConfig, Ablation
from tensor import ShapeError, Tensor, load_checkpoint
from trainer import HistoricalAverage, LastValue, Trainer, evaluate
from utils.config import Config
from utils.errors import ConfigError, DataError, NumericalError
from verification import ModelVerifier, scaling_benchmark
from version import __version__
from .run_config import RunConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class UsageParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def emit(**values) -> None:
    """Print one machine-readable key=value line"""
    parts = []
    for key, value in values.items():
        if isinstance(value, bool):
            value = str(value).lower()
        elif isinstance(value, float):
            value = f"{value:.10g}"
        parts.append(f"{key}={value}")
    print(" ".join(parts), flush=True)


def sidecar_paths(out: Path) -> Tuple[Path, Path]:
    """Region-label and adjacency files written next to a synthetic dataset"""
    return out.with_name(f"{out.stem}_regions.csv"), out.with_name(f"{out.stem}_adjacency.csv")


# ---------------------------------------------------------------- pipeline

def load_splits(run: RunConfig) -> Tuple[TrafficDataset, SplitData]:
    if not run.data.path:
        raise ConfigError("data.path is required for this command")
    dataset = ingest(run.data.path, aggregate_factor=run.data.aggregate)
    if dataset.num_nodes != run.model.num_nodes:
        raise DataError(f"{run.data.path} has {dataset.num_nodes} nodes but model.num_nodes is "
                        f"{run.model.num_nodes}")
    if dataset.interval_minutes != run.model.interval_minutes:
        raise DataError(f"{run.data.path} is sampled every {dataset.interval_minutes} min but "
                        f"model.interval_minutes is {run.model.interval_minutes}")
    splits = split_and_normalize(dataset, run.data.ratios, per_node=run.data.per_node, seasonal=run.data.seasonal)
    return dataset, splits


def load_static(run: RunConfig) -> Optional[Tensor]:
    """Static embedding from data.static_embedding, else the Laplacian of data.adjacency, else zeros"""
    static_path, adjacency = run.data.static_embedding, run.data.adjacency
    if adjacency is None and run.data.path:
        candidate = sidecar_paths(Path(run.data.path))[1]
        adjacency = str(candidate) if candidate.exists() else None
    if static_path is None and adjacency is None:
        logger.info("No static embedding or adjacency configured; static node embedding is zero")
        return None
    return load_static_embeddings(static_path, run.model.num_nodes, run.model.dim, adjacency_path=adjacency)


def build_model(run: RunConfig, config: Optional[ModelConfig] = None, seed: Optional[int] = None) -> HSTMixer:
    return HSTMixer(config or run.model, static=load_static(run), seed=run.seed if seed is None else seed)


def train_once(run: RunConfig, splits: SplitData, config: ModelConfig, seed: int,
               output_dir: Optional[Path] = None):
    t = run.trainer
    if t.epochs is None or t.patience is None:
        raise ConfigError("trainer.epochs and trainer.patience must be set (or passed as --epochs/--patience)")
    model = build_model(run, config, seed)
    trainer = Trainer(model, splits, output_dir=output_dir, lr=t.lr, batch_size=t.batch_size,
                      clip_norm=t.clip_norm, seed=seed)
    return model, trainer.train(t.epochs, t.patience, max_steps=t.max_steps)


# ---------------------------------------------------------------- commands

def cmd_synth(args, run: Optional[RunConfig]) -> int:
    dataset = synth(args.nodes, args.steps, args.regions, args.seed, sigma=args.sigma,
                    interval_minutes=args.interval)
    out = Path(args.out)
    if out.suffix.lower() == ".csv":
        write_csv(dataset, out)
    else:
        write_hstd1(dataset, out)
    regions_path, adjacency_path = sidecar_paths(out)
    write_region_labels(dataset.regions, regions_path)
    write_adjacency(dataset.adjacency, adjacency_path)
    emit(path=str(out), nodes=dataset.num_nodes, steps=dataset.num_steps, regions=args.regions,
         labels=str(regions_path), adjacency=str(adjacency_path))
    return EXIT_OK


def cmd_train(args, run: RunConfig) -> int:
    output_dir = Path(run.output_dir)
    run.dump(output_dir / Config.CONFIG_SNAPSHOT_FILE)
    _, splits = load_splits(run)
    _, report = train_once(run, splits, run.model, run.seed, output_dir=output_dir)
    best = report.best_val or report.initial_val
    emit(epochs_run=report.epochs_run, best_epoch=report.best_epoch, best_val_mae=best.mae,
         best_val_rmse=best.rmse, best_val_mape=best.mape, stopped_early=report.stopped_early,
         diverged=report.diverged, checkpoint=str(report.checkpoint) if report.checkpoint else "none")
    if report.diverged:
        logger.error(f"Training diverged; last good epoch {report.last_good_epoch}")
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_eval(args, run: RunConfig) -> int:
    checkpoint = Path(args.checkpoint or Path(run.output_dir) / Config.CHECKPOINT_FILE)
    if not checkpoint.exists():
        raise DataError(f"Checkpoint not found: {checkpoint}")
    _, splits = load_splits(run)
    model = build_model(run)
    try:
        model.load_state_dict(load_checkpoint(checkpoint))
    except ShapeError as e:
        raise DataError(f"{checkpoint} does not fit the configured model: {e}") from e
    split = splits[args.split]
    metrics = evaluate(model, windows(split, run.model.input_len, run.model.output_len), run.trainer.batch_size)
    emit(split=args.split, **metrics.fields(horizons=True))
    return EXIT_OK


def cmd_gradcheck(args, run: RunConfig) -> int:
    config = ModelConfig.tiny(ablation=run.model.ablation)
    samples = args.samples if args.samples is not None else run.gradcheck.samples
    results = ModelVerifier.verify_model(config, seed=run.seed, batch=run.gradcheck.batch, samples=samples,
                                         tolerance=run.gradcheck.tolerance)
    emit(max_rel_error=results['max_error'], passed=results['complete'], checks=len(results['checks']),
         failures=len(results['failures']))
    return EXIT_OK if results['complete'] else EXIT_NUMERIC


def cmd_bench(args, run: RunConfig) -> int:
    node_list = args.node_list or run.bench.node_list
    result = scaling_benchmark(run.model, node_list, batch=run.bench.batch, repeats=run.bench.repeats,
                               seed=run.seed)
    for n, ms, flops in zip(result.nodes, result.milliseconds, result.flops):
        emit(nodes=n, ms=ms, flops=flops)
    emit(slope=result.slope)
    if args.csv:
        pd.DataFrame({"nodes": result.nodes, "ms": result.milliseconds, "flops": result.flops}).to_csv(
            args.csv, index=False)
    return EXIT_OK


def cmd_baselines(args, run: RunConfig) -> int:
    _, splits = load_splits(run)
    cfg = run.model
    window_set = windows(splits[args.split], cfg.input_len, cfg.output_len)
    candidates = {
        "historical_average": HistoricalAverage(splits.train, cfg.output_len),
        "last_value": LastValue(splits.normalizer, cfg.output_len),
    }
    for name, baseline in candidates.items():
        metrics = evaluate(baseline, window_set, run.trainer.batch_size)
        emit(baseline=name, split=args.split, **metrics.fields())
    return EXIT_OK


def cmd_ablate(args, run: RunConfig) -> int:
    """Median best val MAE over `runs` seeds for the full model and each w/o variant"""
    _, splits = load_splits(run)
    variants: Dict[str, Ablation] = {"full": run.model.ablation}
    for short in Ablation.VARIANTS:
        variants[f"wo_{short}"] = run.model.ablation.without(short)
    status = EXIT_OK
    for name, ablation in variants.items():
        scores: List[float] = []
        for i in range(args.runs):
            _, report = train_once(run, splits, replace(run.model, ablation=ablation), run.seed + i)
            if report.diverged:
                status = EXIT_NUMERIC
            scores.append((report.best_val or report.initial_val).mae)
        emit(variant=name, median_val_mae=float(np.median(scores)), runs=args.runs)
    return status


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = UsageParser(prog="hstmixer", description="HSTMixer traffic forecasting")
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    parser.add_argument('--debug', action='store_true', help='Enable debug-level logging')
    sub = parser.add_subparsers(dest='command', required=True, parser_class=UsageParser)

    p = sub.add_parser('synth', help='Generate a synthetic hierarchical traffic dataset')
    p.add_argument('--nodes', type=int, required=True)
    p.add_argument('--steps', type=int, required=True)
    p.add_argument('--regions', type=int, required=True)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--sigma', type=float, default=0.1, help='AR(1) innovation scale')
    p.add_argument('--interval', type=int, default=15, help='Minutes between steps')
    p.add_argument('--out', required=True, help='Output file (.csv for CSV, anything else for HSTD1)')
    p.set_defaults(handler=cmd_synth, needs_config=False)

    p = sub.add_parser('train', help='Train and keep the best-validation checkpoint')
    p.add_argument('--config', required=True)
    p.add_argument('--epochs', type=int)
    p.add_argument('--patience', type=int)
    p.set_defaults(handler=cmd_train, needs_config=True)

    p = sub.add_parser('eval', help='Evaluate a checkpoint')
    p.add_argument('--config', required=True)
    p.add_argument('--checkpoint', help='Defaults to the best checkpoint in output_dir')
    p.add_argument('--split', choices=('train', 'val', 'test'), default='test')
    p.set_defaults(handler=cmd_eval, needs_config=True)

    p = sub.add_parser('gradcheck', help='Full-model finite-difference check at the tiny preset')
    p.add_argument('--config', required=True)
    p.add_argument('--samples', type=int, help='Coordinates per parameter (default from config)')
    p.set_defaults(handler=cmd_gradcheck, needs_config=True)

    p = sub.add_parser('bench', help='Forward+backward time against the number of nodes')
    p.add_argument('--config', required=True)
    p.add_argument('--node-list', type=_node_list, help='Comma-separated node counts, at least three')
    p.add_argument('--csv', help='Also write nodes,ms,flops to this CSV file')
    p.set_defaults(handler=cmd_bench, needs_config=True)

    p = sub.add_parser('baselines', help='Historical-average and last-value baselines')
    p.add_argument('--config', required=True)
    p.add_argument('--split', choices=('train', 'val', 'test'), default='test')
    p.set_defaults(handler=cmd_baselines, needs_config=True)

    p = sub.add_parser('ablate', help='Full model against the five w/o variants')
    p.add_argument('--config', required=True)
    p.add_argument('--runs', type=int, default=3)
    p.set_defaults(handler=cmd_ablate, needs_config=True)
    return parser


def _node_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if len(values) < 3:
        raise argparse.ArgumentTypeError(f"need at least three node counts, got {len(values)}")
    return values


def load_run_config(args) -> Optional[RunConfig]:
    """The run configuration named by --config, with command-line overrides applied"""
    if not getattr(args, 'needs_config', False):
        return None
    run = RunConfig.load(args.config)
    overrides = {key: getattr(args, key) for key in ('epochs', 'patience') if getattr(args, key, None) is not None}
    if overrides:
        run = replace(run, trainer=replace(run.trainer, **overrides)).validate()
    return run


def run_command(args, run: Optional[RunConfig]) -> int:
    """Dispatch to the command handler and map errors to exit codes"""
    try:
        return args.handler(args, run)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        logger.error(f"Data error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as e:
        logger.error(f"Numerical failure: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ShapeError as e:
        logger.error(f"Shape mismatch: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        logger.error(f"File error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
