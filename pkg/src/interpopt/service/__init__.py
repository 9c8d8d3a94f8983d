"""Human-in-the-loop quiz service: durable study state plus an HTTP front."""

from .state import (
    AdvanceNotReady,
    CrashInjected,
    DuplicateResponse,
    StudyConfig,
    StudyNotFound,
    StudyStore,
)

__all__ = [
    "AdvanceNotReady",
    "CrashInjected",
    "DuplicateResponse",
    "StudyConfig",
    "StudyNotFound",
    "StudyStore",
]
