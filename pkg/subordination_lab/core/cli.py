"""
Command-line interface.

    subordination-lab <command> [--seed N] [--alpha A] [--m M] [--schedule S]
                      [--replicates R] [--process P] [--normalization N]
                      [--out DIR] [--level L] [--threads T] [--config FILE]

Exit status: 0 when every check passed, 1 when a check failed, 2 on a usage or
runtime error.
"""

import argparse
import logging
import sys
from typing import List, Optional

from subordination_lab import __version__
from subordination_lab.core.experiment_runner import ExperimentRunner
from subordination_lab.exceptions import SubordinationLabError
from subordination_lab.project.config_manager import COMMANDS, load_config, merge_config
from subordination_lab.simulation.subordinators import Normalization
from subordination_lab.utils.logging_setup import setup_logging

logger = logging.getLogger(__name__)

EXIT_PASSED = 0
EXIT_FAILED = 1
EXIT_ERROR = 2

COMMAND_HELP = {
    'e0-check': 'H at an independent stable time against the subordinator at Argsinh(l)',
    'retrieve-demo': 'recover X0+ and X0- from jump counts of the time-changed integral',
    'gamma-null': 'the same pipeline under a gamma subordinator, plus density and contrast checks',
    'prop2-demo': 'recover |X0| from the stochastic integral and check the remainder counts',
    'markov-probe': 'test whether the Bessel clock read at a stable time is Markov',
    'poisson-gof': 'chi-square fit of jump counts to their Poisson law',
}


def _comma_floats(text: str) -> List[float]:
    try:
        return [float(p) for p in text.split(',') if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, help='master seed')
    common.add_argument('--alpha', type=float, help='stability index in (0, 1)')
    common.add_argument('--m', type=float, help='threshold exponent, > 2 / alpha')
    common.add_argument('--schedule', help='"dyadic:LO:HI" or a comma list of n = 1 / eps')
    common.add_argument('--replicates', type=int, help='independent replicates')
    common.add_argument('--process', help='X as "kind:params", e.g. constant:2 or hoelder-test:-3,1')
    common.add_argument('--normalization', choices=[n.value for n in Normalization],
                        help='Levy measure normalization of the stable subordinator')
    common.add_argument('--out', help='output directory')
    common.add_argument('--level', type=float, help='significance level of the statistical checks')
    common.add_argument('--threads', type=int, help='worker threads; results do not depend on it')
    common.add_argument('--config', help='JSON file with any of these options')
    common.add_argument('--ell', type=float, help='stable time l (e0-check, markov-probe)')
    common.add_argument('--ell-prime', type=float, help='second stable increment (markov-probe)')
    common.add_argument('--dt', type=float, help='Bessel clock step, in (0, 1)')
    common.add_argument('--em-step', type=float, help='Euler-Maruyama step (prop2-demo)')
    common.add_argument('--b-max', type=float, help='bound on |X| used to size the jump cutoff')
    common.add_argument('--tolerance', type=float, help='relative tolerance of the final estimate')
    common.add_argument('--x-values', type=_comma_floats, help='constant values for gamma-null')
    common.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])

    parser = argparse.ArgumentParser(
        prog='subordination-lab',
        description='Jump-counting retrieval of a process from its subordinated integral',
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    subparsers = parser.add_subparsers(dest='command', metavar='command')
    subparsers.required = True
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common], help=COMMAND_HELP[command])
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run the command and map its result to an exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # --help and --version exit 0, usage errors exit 2
        return EXIT_PASSED if e.code in (0, None) else EXIT_ERROR

    flags = vars(args).copy()
    config_file = flags.pop('config')
    try:
        file_values = load_config(config_file) if config_file else None
        config = merge_config(file_values, flags)
    except (OSError, ValueError, SubordinationLabError) as e:
        setup_logging('INFO')
        logger.error(f"Configuration error: {e}")
        return EXIT_ERROR

    setup_logging(config.log_level)
    result = ExperimentRunner(config).run()

    if not result['success']:
        logger.error(f"{result['error_type']}: {result['error']}")
        if result.get('details'):
            logger.error(result['details'])
        if result.get('traceback'):
            logger.debug(result['traceback'])
        return EXIT_ERROR

    if not result['passed']:
        logger.warning(f"Failed checks: {', '.join(result['failures'])}")
        return EXIT_FAILED
    return EXIT_PASSED


if __name__ == '__main__':
    sys.exit(main())
