#!/usr/bin/env python3
"""
polar.py - Main entry point for the mixed-kernel polar code toolkit

WHAT THIS FILE DOES:
1. Parses the subcommand and its flags
2. Sets up logging (to stderr, so CSV on stdout stays clean)
3. Hands a RunConfig to the matching handler
4. Writes the result and exits with a meaningful code

This is the file you run: python polar.py curve --scheme all --n 7

LEARNING MOMENT: Exit Codes
Scripts that call this tool (see run_experiments.sh) only see the exit
code. 0 means success, 2 means you asked for something invalid, and 3
means the request was valid but too large for the configured caps.
"""

import argparse
import logging
import sys
from typing import List, Optional

from config import DEFAULT_SEED, DEFAULT_THREADS, LOG_LEVEL
from errors import CapacityError, PolarError
from handlers.commands import HANDLERS, REPORTS, RunConfig, run
from reports.writer import FORMATS, emit

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CAPACITY = 3


def build_parser() -> argparse.ArgumentParser:
    """
    One subparser per subcommand, all sharing the same flag set.

    Flags a subcommand does not use are accepted and ignored, so scripts
    can pass one common set of options everywhere.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--scheme', default='mixed',
                        help="mixed, arikan, rs4_top, or all (kernels, curve, complexity)")
    common.add_argument('--n', type=int, default=2, help="recursion depth; N = 4^n bits")
    common.add_argument('--epsilon', type=float, default=0.5, help="BEC erasure probability")
    common.add_argument('--rate', type=float, action='append', dest='rates', default=[],
                        help="design rate; repeat for several points")
    common.add_argument('--K', type=int, default=None, help="number of information bits")
    common.add_argument('--delta', type=float, default=0.1, help="polarization window")
    common.add_argument('--beta', type=float, default=0.4, help="rate-of-polarization exponent")
    common.add_argument('--trials', type=int, default=1000, help="Monte-Carlo blocks")
    common.add_argument('--seed', type=int, default=DEFAULT_SEED)
    common.add_argument('--threads', type=int, default=DEFAULT_THREADS)
    common.add_argument('--out', default=None, help="output file (default: stdout)")
    common.add_argument('--format', choices=FORMATS, default=None)
    common.add_argument('--strategy', choices=('balanced', 'greedy'), default='balanced')
    common.add_argument('--metric', choices=('ambiguous', 'guess'), default='ambiguous')
    common.add_argument('--report', choices=REPORTS + ('all',), default='all')
    common.add_argument('--steps', type=int, default=200, help="SLLN path length")
    common.add_argument('--paths', type=int, default=10000, help="SLLN sample paths")
    common.add_argument('--per-group', action='store_true', help="finer Z-bound constants")
    common.add_argument('--force-pre-tail', action='store_true',
                        help="SLLN walk that never glues (control run)")
    common.add_argument('--timing', action='store_true', help="report elapsed_seconds")

    parser = argparse.ArgumentParser(
        prog='polar.py',
        description="Mixed-kernel polar codes over the binary erasure channel",
    )
    subparsers = parser.add_subparsers(dest='command', required=True)
    helps = {
        'kernels': "partial distances and exponents of the shipped kernels",
        'layout': "synthesized channel listing of a scheme",
        'de': "exact erasure density evolution per channel",
        'curve': "union-bound block error versus rate",
        'select': "information set for one K or rate",
        'simulate': "successive-cancellation Monte-Carlo block error rate",
        'process': "tree-process checks (martingale, polarization, rate, slln, zbound)",
        'complexity': "SC marginalization cost per scheme",
    }
    for name in HANDLERS:
        subparsers.add_parser(name, parents=[common], help=helps[name])
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        scheme=args.scheme,
        n=args.n,
        epsilon=args.epsilon,
        rates=list(args.rates),
        K=args.K,
        delta=args.delta,
        beta=args.beta,
        trials=args.trials,
        seed=args.seed,
        threads=args.threads,
        out=args.out,
        format=args.format,
        report=args.report,
        strategy=args.strategy,
        metric=args.metric,
        steps=args.steps,
        paths=args.paths,
        per_group=args.per_group,
        force_pre_tail=args.force_pre_tail,
        timing=args.timing,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main function - parse, run, write.

    Returns the process exit code instead of calling sys.exit, so tests
    can call main() directly.
    """
    # Step 1: Logging goes to stderr
    logging.basicConfig(
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        level=getattr(logging, LOG_LEVEL, logging.INFO),
        stream=sys.stderr,
    )

    # Step 2: Parse flags (argparse exits with code 2 on its own errors)
    args = build_parser().parse_args(argv)
    config = config_from_args(args)

    # Step 3: Run the subcommand
    try:
        text = run(config)
    except CapacityError as e:
        logger.error(f"Too large: {e}")
        return EXIT_CAPACITY
    except (PolarError, ValueError) as e:
        logger.error(f"Invalid request: {e}")
        return EXIT_USAGE

    # Step 4: Write the result
    emit(text, config.out)
    return EXIT_OK


# This block runs only when you execute: python polar.py
if __name__ == "__main__":
    sys.exit(main())
