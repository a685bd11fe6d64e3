from .base import BaseCommand
from .commands.asymptote import AsymptoteCommand
from .commands.calibrate import CalibrateCommand
from .commands.certify import CertifyCommand
from .commands.foliate import FoliateCommand
from .commands.solve import SolveCommand
from .commands.sweep import SweepCommand


class CommandRegistry:
    """Registry for subcommand instances."""

    _instances: dict[str, BaseCommand] = {}

    COMMAND_MAP: dict[str, type[BaseCommand]] = {
        "certify": CertifyCommand,
        "solve": SolveCommand,
        "foliate": FoliateCommand,
        "calibrate": CalibrateCommand,
        "asymptote": AsymptoteCommand,
        "sweep": SweepCommand,
    }

    @classmethod
    def get(cls, name: str) -> BaseCommand | None:
        """Get command instance by name. Returns None if not found."""
        if name not in cls.COMMAND_MAP:
            return None

        if name not in cls._instances:
            cls._instances[name] = cls.COMMAND_MAP[name]()

        return cls._instances[name]


def get_command(name: str) -> BaseCommand | None:
    """Convenience function to get a subcommand by name."""
    return CommandRegistry.get(name)
