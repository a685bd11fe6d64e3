from pathlib import Path
from typing import Any

from environs import env

BASE_DIR: Path = Path(__file__).resolve().parent.parent.parent

env.read_env(str(BASE_DIR / ".env"), recurse=False)

# Output and reproducibility
OUTPUT_DIR: str = env.str("LAWSONLAB_OUTPUT_DIR", "out")
SEED: int = env.int("LAWSONLAB_SEED", 0)
JOBS: int = env.int("LAWSONLAB_JOBS", 1)

LOG_LEVEL: str = env.str("LAWSONLAB_LOG_LEVEL", "INFO").upper()

# Certification grid (uniform samples on [0, 1])
KAPPA_SAMPLES: int = env.int("LAWSONLAB_KAPPA_SAMPLES", 10001)

# Gauss-Legendre nodes per panel for Fourier coefficients
FOURIER_NODES_PER_MODE: int = env.int("LAWSONLAB_FOURIER_NODES_PER_MODE", 16)

# Leaf solver defaults
T_SWITCH: float = env.float("LAWSONLAB_T_SWITCH", 1e-3)
RK_TOL: float = env.float("LAWSONLAB_RK_TOL", 1e-10)
CONVERGE_TOL: float = env.float("LAWSONLAB_CONVERGE_TOL", 1e-10)
REGION_TOL: float = env.float("LAWSONLAB_REGION_TOL", 1e-8)
TAU_MAX: float = env.float("LAWSONLAB_TAU_MAX", 40.0)

# Diagonal jet agreement required between the two profiles of an integrand
JET_TOL: float = 1e-8

SENTRY_DSN: str = env.str("SENTRY_DSN", default="")
SENTRY_ENVIRONMENT: str = env.str("SENTRY_ENVIRONMENT", default="local")

LOGGING: dict[str, Any] = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{asctime} {levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "level": "DEBUG",
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "formatter": "verbose",
        },
    },
    "loggers": {
        app: {
            "handlers": ["console"],
            "level": LOG_LEVEL,
            "propagate": False,
        }
        for app in ("integrand", "ode", "foliation", "asymptotics", "cli")
    },
}
