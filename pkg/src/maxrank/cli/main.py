"""CLI - argparse front end over the command functions"""
import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence, Tuple

from .commands import BOTH, COMMANDS, EXIT_USAGE, RunConfig
from ..core.config import DEFAULT_SEED, load_config, tolerances_from
from ..core.errors import CertificateFormatError, ConfigError, FieldMismatch
from ..core.decomposer import AUTO
from ..utils import get_debugger, init_debugger

METHODS = (AUTO, 'trivial', 'square3', 'nonsquare3', 'generalp')
FIELDS = ('real', 'complex', BOTH)


def parse_dims(text: str) -> Tuple[int, int, int]:
    """'3,3,3' -> (3, 3, 3)"""
    try:
        dims = tuple(int(part) for part in text.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must be m,n,p integers, got {text!r}") from None
    if len(dims) != 3 or min(dims) < 1:
        raise argparse.ArgumentTypeError(f"dims must be three positive integers, got {text!r}")
    return dims


def parse_grid(text: str) -> Tuple[int, int]:
    """'1..6' -> (1, 6)"""
    lo, sep, hi = text.partition('..')
    try:
        grid = (int(lo), int(hi))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like a..b, got {text!r}") from None
    if not sep or grid[0] < 1 or grid[1] < grid[0]:
        raise argparse.ArgumentTypeError(f"grid must satisfy 1 <= a <= b, got {text!r}")
    return grid


def positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"tolerances must be positive, got {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=Path, help='config.yml to load instead of the default lookup')
    common.add_argument('--input', type=Path, help='tensor JSON file (stdin when omitted)')
    common.add_argument('--output', type=Path, help='destination file (stdout when omitted)')
    common.add_argument('--field', choices=FIELDS, help='ground field; both runs real then complex')
    common.add_argument('--seed', type=int, help='base seed (config options.seed when omitted)')
    common.add_argument('--tol-residual', type=positive_float, dest='residual_tol')
    common.add_argument('--tol-rank', type=positive_float, dest='rank_tol')
    common.add_argument('--tol-margin', type=positive_float, dest='margin_tol')
    common.add_argument('--method', choices=METHODS, default=AUTO)
    common.add_argument('--json', action='store_true', help='print JSON instead of the report templates')
    common.add_argument('--debug', action='store_true', help='echo structured logs to stderr')

    parser = argparse.ArgumentParser(
        prog='maxrank',
        description='Certified upper bounds on the rank of 3-tensors over R and C',
    )
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    sub.add_parser('decompose', parents=[common], help='decompose a tensor and write its certificate')
    verify = sub.add_parser('verify', parents=[common], help='check a certificate against its tensor')
    verify.add_argument('--certificate', type=Path, help='certificate JSON file')
    bound = sub.add_parser('bound', parents=[common], help='best known maximal-rank bounds')
    bound.add_argument('--dims', type=parse_dims, help='single shape m,n,p')
    bound.add_argument('--grid', type=parse_grid, help='every shape with entries in a..b')
    gen = sub.add_parser('gen', parents=[common], help='write a seeded random tensor')
    gen.add_argument('--dims', type=parse_dims, required=True, help='shape m,n,p')
    sub.add_parser('example', parents=[common], help='the 4x4x3 skew example over R and C')
    selftest = sub.add_parser('selftest', parents=[common], help='run the acceptance ensembles')
    selftest.add_argument('--trials', type=int, help='trials per criterion instead of config selftest sizes')
    return parser


def run_config_from(args: argparse.Namespace, settings: dict) -> RunConfig:
    """
    Raises:
        ConfigError: tolerances invalid after overrides
    """
    overrides = {
        key: getattr(args, key)
        for key in ('residual_tol', 'rank_tol', 'margin_tol')
        if getattr(args, key, None) is not None
    }
    seed = args.seed if args.seed is not None else int(settings.get('options', {}).get('seed', DEFAULT_SEED))
    return RunConfig(
        command=args.command,
        settings=settings,
        tolerances=tolerances_from(settings, **overrides),
        seed=seed,
        input=args.input,
        output=args.output,
        certificate=getattr(args, 'certificate', None),
        field=args.field,
        method=args.method,
        dims=getattr(args, 'dims', None),
        grid=getattr(args, 'grid', None),
        trials=getattr(args, 'trials', None),
        json=args.json,
        tolerance_overrides=overrides,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one command.

    Returns:
        0 certified/pass, 1 verdict failure, 2 usage, parse or config error
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        settings = load_config(args.config)
    except ConfigError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_USAGE

    options = settings.get('options', {})
    debugger = init_debugger(enabled=bool(args.debug or options.get('debug')))
    debugger.info("cli", "maxrank starting", command=args.command, config=str(args.config) if args.config else None)

    try:
        run = run_config_from(args, settings)
        return COMMANDS[run.command](run)
    except (CertificateFormatError, ConfigError, FieldMismatch) as e:
        debugger.error("cli", "Invalid input", error=str(e))
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        debugger.error("cli", "I/O failure", error=str(e))
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        log_file = options.get('log_file')
        if log_file:
            get_debugger().export_logs(Path(log_file))


if __name__ == "__main__":
    sys.exit(main())
