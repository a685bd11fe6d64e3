import logging
from abc import ABC, abstractmethod
from argparse import ArgumentParser
from pathlib import Path

from integrand.fourier import fourier_approximate
from integrand.models import ConeParams, GluingParams, Integrand, LabError, Profile
from integrand.services import build_integrand, compat_q, elliptic_integrand
from ode.models import ProfileTable
from ode.solver import restore_leaf
from ode.tables import read_profile_table

from .config import RunConfig

logger = logging.getLogger(__name__)


class CommandError(LabError):
    """Exception raised when a command cannot run with the inputs it was given."""

    pass


class BaseCommand(ABC):
    """Abstract base class for lawsonlab subcommands."""

    name: str = ""
    help: str = ""

    def add_arguments(self, parser: ArgumentParser) -> None:
        """Add command-specific flags; the shared flags are already present."""
        pass

    @abstractmethod
    def handle(self, config: RunConfig) -> int:
        """
        Run the command and write its reports.

        Args:
            config: Validated run configuration

        Returns:
            0 when every check passed, 1 when a mathematical check failed
        """
        pass

    def build_integrand(self, config: RunConfig) -> Integrand:
        """Integrand described by the profile flags."""
        params = config.params
        if config.area:
            integrand = elliptic_integrand(params)
        else:
            if config.p is None:
                raise CommandError("--p is required unless --area is given")
            q = config.q if config.q is not None else compat_q(params, config.p)
            gluing = GluingParams(delta=config.delta) if config.delta is not None else None
            integrand = build_integrand(
                params, config.p, q, b_phi=config.b_phi, b_psi=config.b_psi, gluing=gluing
            )
        if config.fourier_n is not None:
            integrand = fourier_approximate(integrand, config.fourier_n)
        return integrand

    def sides(
        self, integrand: Integrand, both: bool
    ) -> list[tuple[str, Profile, ConeParams]]:
        """(name, profile, leaf params) for the phi side and optionally the psi side."""
        sides = [("phi", integrand.phi, integrand.params)]
        if both:
            sides.append(("psi", integrand.psi, integrand.params.swapped()))
        return sides

    def read_leaf(
        self, config: RunConfig, side: str, profile: Profile, params: ConeParams
    ) -> ProfileTable:
        """
        Leaf table from --leaf, or from the file written by solve in --out,
        completed with sigma'' and the configured solver options.

        Raises:
            CommandError: If the file does not exist
        """
        path = config.leaf if config.leaf and side == "phi" else config.out / f"leaf_{side}.csv"
        if not Path(path).exists():
            raise CommandError(f"leaf file {path} not found; run solve first or pass --leaf")
        logger.info(f"Reading {side} leaf from {path}")
        return restore_leaf(profile, params, read_profile_table(path), config.solver)
