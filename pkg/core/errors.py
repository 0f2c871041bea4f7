from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from core.wardrop import ValidationReport


class ModelError(Exception):
    """Base class for model errors"""


class AssumptionViolation(ModelError):
    """Market parameters break a model assumption"""

    def __init__(self, message: str, report: ValidationReport | None = None):
        super().__init__(message)
        self.report = report


class PreconditionViolation(ModelError):
    """An operation was called outside its domain"""


class NoConvergence(ModelError):
    """A numeric solver did not reach its tolerance"""


class UnstableQueue(ModelError):
    """A queue is loaded at or above its service rate"""


class ConfigError(ModelError):
    """Invalid scenario or simulation configuration"""
