"""Command-line surface"""
from .run_config import RunConfig, DataSettings, TrainerSettings, GradcheckSettings, BenchSettings
from .commands import (build_parser, load_run_config, run_command, emit, EXIT_OK, EXIT_USAGE, EXIT_DATA,
                       EXIT_NUMERIC)

__all__ = [
    'RunConfig', 'DataSettings', 'TrainerSettings', 'GradcheckSettings', 'BenchSettings',
    'build_parser', 'load_run_config', 'run_command', 'emit', 'EXIT_OK', 'EXIT_USAGE', 'EXIT_DATA',
    'EXIT_NUMERIC',
]
