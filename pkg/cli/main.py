"""
lawsonlab command-line entry point.

Exit codes: 0 when every check passed, 1 when a mathematical check failed,
2 for invalid input.
"""

import argparse
import logging
import sys
from collections.abc import Sequence
from typing import Any

import sentry_sdk
from marshmallow import ValidationError

from config.sentry import init_sentry
from config.settings import configure_logging
from foliation.models import LeafDomainError
from integrand.models import (
    InvalidParameterError,
    LabError,
    OutOfRangeError,
    ProfileDomainError,
)

from .base import CommandError
from .config import COMMANDS, SOLVER_KEYS, load_run_config, solver_settings
from .registry import get_command

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID_INPUT = 2

INPUT_ERRORS = (
    InvalidParameterError,
    ProfileDomainError,
    OutOfRangeError,
    LeafDomainError,
    CommandError,
)

# Flags consumed here rather than passed to RunConfig.
CONTROL_FLAGS = ("verbose", "solver_config", *SOLVER_KEYS)


def shared_arguments() -> argparse.ArgumentParser:
    """Flags common to every subcommand; values are validated by RunConfigSchema."""
    parser = argparse.ArgumentParser(add_help=False)
    cone = parser.add_argument_group("cone and integrand")
    cone.add_argument("--k", help="Dimension of the x sphere (a range such as 1..3 for sweep)")
    cone.add_argument("--l", help="Dimension of the y sphere (a range such as 1..3 for sweep)")
    cone.add_argument("--p", help="phi exponent (a list such as 6,8,10 for sweep)")
    cone.add_argument("--q", help="psi exponent (default: the compatible exponent)")
    cone.add_argument("--b", dest="b_phi", help="phi quadratic coefficient (default 0.01)")
    cone.add_argument("--b-psi", help="psi quadratic coefficient (default: matched to phi)")
    cone.add_argument("--delta", help="Glue phi to psi across the diagonal with this width")
    cone.add_argument("--fourier-N", dest="fourier_n", help="Replace the integrand by its order-N Fourier approximation")
    cone.add_argument("--area", action="store_true", default=None, help="Use the elliptic (area when k = l) integrand")

    run = parser.add_argument_group("run")
    run.add_argument("--both-sides", action="store_true", default=None, help="Also process the psi side")
    run.add_argument("--force", action="store_true", default=None, help="Solve without certifying first")
    run.add_argument("--grid", help="Calibration grid u_min,u_max,v_min,v_max,h")
    run.add_argument("--window", help="Fit window t_min,t_max (perturbation interval for foliate)")
    run.add_argument("--seed", help="Seed of every random sample")
    run.add_argument("--jobs", help="Parallel sweep cells")
    run.add_argument("--out", help="Output directory")
    run.add_argument("--format", help="Report format: json or csv")
    run.add_argument("--leaf", help="Leaf table to read instead of OUT/leaf_phi.csv")
    run.add_argument("--samples", help="Leaf export samples, log-spaced in u")

    solver = parser.add_argument_group("solver")
    solver.add_argument("--solver-config", help="key=value file of solver options")
    for key in SOLVER_KEYS:
        solver.add_argument(f"--{key.replace('_', '-')}", dest=key)

    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    return parser


def build_parser() -> argparse.ArgumentParser:
    parent = shared_arguments()
    parser = argparse.ArgumentParser(
        prog="lawsonlab",
        description="Numerical checks of foliations of Lawson cones by anisotropic minimizers",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in COMMANDS:
        command = get_command(name)
        assert command is not None
        subparser = subparsers.add_parser(name, parents=[parent], help=command.help)
        command.add_arguments(subparser)
    return parser


def config_data(namespace: argparse.Namespace) -> dict[str, Any]:
    """RunConfig input from parsed flags, without the flags left unset."""
    values = vars(namespace)
    data = {
        key: value
        for key, value in values.items()
        if key not in CONTROL_FLAGS and value is not None
    }
    solver = solver_settings(
        values.get("solver_config"), {key: values.get(key) for key in SOLVER_KEYS}
    )
    if solver:
        data["solver"] = solver
    return data


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        namespace = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging("DEBUG" if namespace.verbose else None)
    init_sentry()

    try:
        config = load_run_config(config_data(namespace))
    except ValidationError as e:
        logger.error(f"Invalid configuration: {e.messages}")
        return EXIT_INVALID_INPUT

    command = get_command(config.command)
    assert command is not None
    logger.info(f"Running {config.command} (seed {config.seed}, output {config.out})")
    try:
        return command.handle(config)
    except INPUT_ERRORS as e:
        logger.error(f"{config.command}: {e}")
        return EXIT_INVALID_INPUT
    except LabError as e:
        logger.error(f"{config.command} failed: {e}", exc_info=True)
        sentry_sdk.capture_exception(e)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
