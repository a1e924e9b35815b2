"""
Command-line entry point for the Lévy exponential-functional toolkit.

Usage:
    python main.py exponent --config c.json --lambda 2
    python main.py scale --config c.json --x 0.5 --x 1
    python main.py simulate --config c.json --path-kind v_up
    python main.py estimate --config c.json --n 20000 --workers 4
    python main.py predict --config c.json --variant I_V_up
    python main.py verify affine --config c.json --seed 7
    python main.py verify all --config c.json --timing
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from config import Config
from commands import (
    EXIT_USAGE,
    PATH_KINDS,
    exit_code_for,
    handle_estimate,
    handle_exponent,
    handle_predict,
    handle_scale,
    handle_simulate,
    handle_verify,
    load_run_config,
)
from exceptions import LevyToolkitError
from models import VariantTag, VUpAlgorithm
from services import SUITE_NAMES

logger = logging.getLogger(__name__)


def _configure_logging() -> None:
    logging.basicConfig(
        level=getattr(logging, Config.get_log_level(), logging.INFO),
        format='%(asctime)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON run configuration')
    common.add_argument('--seed', type=int, help='Root seed (mandatory, here or in the config)')
    common.add_argument('--workers', type=int, help='Worker processes for sampling')
    common.add_argument('--out', dest='out_dir', help='Directory for CSV and report files')
    common.add_argument('--dt', type=float, help='Grid step of the path simulator')
    common.add_argument('--n', type=int, help='Number of samples')
    common.add_argument('--y', type=float, help='Truncation level')
    common.add_argument('--lambda', dest='lambda_grid', type=float, action='append',
                        help='Laplace argument (repeatable)')
    common.add_argument('--x', dest='x_grid', type=float, action='append',
                        help='Spatial argument (repeatable)')
    common.add_argument('--horizon', type=float, help='Fixed horizon instead of a level stop')
    common.add_argument('--variant', choices=[tag.value for tag in VariantTag],
                        help='Functional variant to sample')
    common.add_argument('--v-up-algo', dest='v_up_algo', choices=[algo.value for algo in VUpAlgorithm],
                        help='Sampler for the conditioned process')
    common.add_argument('--timing', action='store_true', help='Add wall time to verify reports')
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        description='Exponential functionals of spectrally one-sided Lévy processes conditioned to stay positive'
    )
    subparsers = parser.add_subparsers(dest='command', required=True)

    subparsers.add_parser('exponent', parents=[common], help='Laplace exponents and their inverses')
    subparsers.add_parser('scale', parents=[common], help='Scale function W and its conditioned version')
    simulate = subparsers.add_parser('simulate', parents=[common], help='Write one simulated path as CSV')
    simulate.add_argument('--path-kind', dest='path_kind', choices=PATH_KINDS, default='v')
    subparsers.add_parser('estimate', parents=[common], help='Monte Carlo estimate of a functional')
    subparsers.add_parser('predict', parents=[common], help='Left-tail prediction curve as CSV')
    verify = subparsers.add_parser('verify', parents=[common], help='Run a verification suite')
    verify.add_argument('suite', choices=list(SUITE_NAMES) + ['all'])
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Command-line values that replace configuration file entries"""
    return {
        'seed': args.seed,
        'workers': args.workers,
        'out_dir': args.out_dir,
        'dt': args.dt,
        'n': args.n,
        'y': args.y,
        'lambda_grid': args.lambda_grid,
        'x_grid': args.x_grid,
        'horizon': args.horizon,
        'variant': {'tag': args.variant} if args.variant else None,
        'v_up_algo': args.v_up_algo,
    }


def run_command(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, load the run configuration and dispatch to a handler.

    Args:
        argv: Arguments without the program name

    Returns:
        Exit code: 0 on success, 1 on check or runtime failure, 2 on usage or configuration errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    try:
        config = load_run_config(args.config, _overrides(args))
        logger.info(f"🔍 Running '{args.command}' with seed {config.seed}")
        if args.command == 'exponent':
            return handle_exponent(config)
        if args.command == 'scale':
            return handle_scale(config)
        if args.command == 'simulate':
            return handle_simulate(config, args.path_kind)
        if args.command == 'estimate':
            return handle_estimate(config)
        if args.command == 'predict':
            return handle_predict(config)
        return handle_verify(config, args.suite, timing=args.timing)
    except LevyToolkitError as exc:
        logger.error(f"❌ {args.command} failed: {exc}")
        return exit_code_for(exc)


if __name__ == "__main__":
    _configure_logging()
    sys.exit(run_command(sys.argv[1:]))
