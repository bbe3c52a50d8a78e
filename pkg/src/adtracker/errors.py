"""Exception hierarchy shared across the service modules."""

from __future__ import annotations


class AdTrackerError(Exception):
    """Base class for every error raised by this package."""


class MalformedRange(AdTrackerError):
    """An insight-range string does not match the accepted grammar."""


class MalformedPayload(AdTrackerError):
    """A provider payload (or fixture line) cannot be turned into a valid record."""


class RateLimited(AdTrackerError):
    """The upstream archive asked us to slow down. Retryable."""

    def __init__(self, message: str = "rate limited", wait_s: float = 60.0):
        super().__init__(message)
        self.wait_s = wait_s


class AuthFailed(AdTrackerError):
    """Credentials were rejected. Terminal for the current operation."""


class TransportError(AdTrackerError):
    """Network-level failure talking to an upstream service. Retryable."""


class UnknownJob(AdTrackerError):
    """No job with the given id (or it has been deleted)."""


class UnknownAccount(AdTrackerError):
    """No account with the given id."""


class StorageFailure(AdTrackerError):
    """The storage engine failed; the enclosing batch was rolled back."""


class Unauthorized(AdTrackerError):
    """The acting account may not perform this operation."""


class InvalidSpec(AdTrackerError):
    """A job spec failed validation. Carries the individual violations."""

    def __init__(self, violations):
        super().__init__("invalid job spec: " + "; ".join(str(v) for v in violations))
        self.violations = list(violations)


class EmailTaken(AdTrackerError):
    """Signup attempted with an email that already has an account."""


class WeakPassword(AdTrackerError):
    """Signup password below the minimum length."""


class InvalidState(AdTrackerError):
    """State transition not allowed from the current state."""


class GraphLookupFailed(AdTrackerError):
    """The graph provider could not produce a picture URL for a page."""


class DownloadFailed(AdTrackerError):
    """Fetching binary content from a resolved URL failed."""


class NotAnImage(AdTrackerError):
    """Downloaded content is not an image/* MIME type."""


class InvalidWindow(AdTrackerError):
    """A time window has start > end."""
