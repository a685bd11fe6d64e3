import logging

import sentry_sdk
from sentry_sdk.types import Event, Hint

from config import settings

logger = logging.getLogger(__name__)

LAB_MODULES = ("integrand", "ode", "foliation", "asymptotics", "cli")


def _get_exception_name(exc: BaseException | None) -> str:
    """Get fully qualified exception name for fingerprinting."""
    if exc is None:
        return ""
    exc_type = type(exc)
    module = getattr(exc_type, "__module__", "")
    name = getattr(exc_type, "__name__", "")
    if module:
        return f"{module}.{name}"
    return name


def sentry_before_send(event: Event, hint: Hint) -> Event | None:
    """
    Custom fingerprinting to group lab failures together.

    Solver and certification failures are grouped by exception class rather
    than by stack trace location, so one failing parameter family produces a
    single issue.
    """
    if "exc_info" not in hint:
        return event

    exc_info = hint.get("exc_info")
    if not exc_info or len(exc_info) < 2:
        return event

    exc_name = _get_exception_name(exc_info[1])

    if exc_name.split(".")[0] in LAB_MODULES:
        simple_name = exc_name.split(".")[-1]
        event["fingerprint"] = ["lawsonlab", simple_name]
        return event

    # Input validation from marshmallow
    if "marshmallow" in exc_name:
        event["fingerprint"] = ["lawsonlab", "invalid-config"]
        return event

    return event


def init_sentry() -> bool:
    """
    Initialize error reporting when a DSN is configured.

    Returns:
        True if sentry was initialized, False when SENTRY_DSN is empty
    """
    if not settings.SENTRY_DSN:
        return False

    sentry_sdk.init(
        dsn=settings.SENTRY_DSN,
        traces_sample_rate=0,
        before_send=sentry_before_send,
        include_local_variables=True,
        environment=settings.SENTRY_ENVIRONMENT,
    )
    logger.info("Sentry error reporting enabled")
    return True
