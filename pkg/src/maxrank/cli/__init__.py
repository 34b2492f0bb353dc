"""CLI - Subcommands decompose, verify, bound, gen, example and selftest"""
from .commands import COMMANDS, EXIT_FAIL, EXIT_OK, EXIT_USAGE, RunConfig, example_det_error, example_tensor
from .main import build_parser, main

__all__ = [
    'COMMANDS',
    'EXIT_FAIL',
    'EXIT_OK',
    'EXIT_USAGE',
    'RunConfig',
    'build_parser',
    'example_det_error',
    'example_tensor',
    'main',
]
