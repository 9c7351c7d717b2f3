#!/usr/bin/env python3
"""
HSTMixer - Main Entry Point
Command-line tool for training and verifying the hierarchical traffic forecaster
"""
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Add project root to path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from cli import build_parser, load_run_config, run_command, EXIT_USAGE, EXIT_DATA
from utils.config import Config
from utils.errors import ConfigError

logger = logging.getLogger(__name__)


def configure_logging(log_dir: Path, debug: bool = False) -> Path:
    """Always write to a log file, optionally verbose; stderr mirrors it"""
    log_dir.mkdir(parents=True, exist_ok=True)
    log_file = log_dir / Config.LOG_FILE
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(log_file, encoding='utf-8'),
            logging.StreamHandler(),
        ],
        force=True,
    )
    return log_file


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, set up logging and run one command"""
    args = build_parser().parse_args(argv)
    try:
        run = load_run_config(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    log_dir = Path(run.output_dir) if run is not None else Path.cwd()
    try:
        log_file = configure_logging(log_dir, debug=args.debug)
    except OSError as e:
        print(f"error: cannot write logs to {log_dir}: {e}", file=sys.stderr)
        return EXIT_DATA
    logger.info(f"Log file: {log_file}")
    logger.info(f"Running command '{args.command}'")
    return run_command(args, run)


if __name__ == "__main__":
    sys.exit(main())
