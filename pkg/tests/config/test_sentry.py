import logging

from marshmallow import ValidationError

from config.sentry import init_sentry, sentry_before_send
from config.settings import configure_logging
from ode.models import DiscriminantError


def event_for(exc):
    return sentry_before_send({}, {"exc_info": (type(exc), exc, None)})


class TestSentryBeforeSend:
    def test_lab_errors_grouped_by_class(self):
        event = event_for(DiscriminantError("negative discriminant"))
        assert event["fingerprint"] == ["lawsonlab", "DiscriminantError"]

    def test_validation_errors_grouped_together(self):
        event = event_for(ValidationError({"k": ["Must be at least 1."]}))
        assert event["fingerprint"] == ["lawsonlab", "invalid-config"]

    def test_other_errors_untouched(self):
        assert "fingerprint" not in event_for(ValueError("boom"))

    def test_event_without_exception(self):
        assert sentry_before_send({"message": "hi"}, {}) == {"message": "hi"}


def test_sentry_off_without_dsn(monkeypatch):
    monkeypatch.setattr("config.settings.SENTRY_DSN", "")
    assert init_sentry() is False


def test_configure_logging_overrides_level():
    configure_logging("debug")
    assert logging.getLogger("ode").level == logging.DEBUG
    configure_logging()
    assert logging.getLogger("ode").level != logging.NOTSET
