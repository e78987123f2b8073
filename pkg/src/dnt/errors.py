"""Exception hierarchy for the dnt package.

Every error raised deliberately by this package derives from
:class:`DntError`, so callers can catch one type at an API boundary.
Subclasses separate caller mistakes (bad arguments, malformed files)
from state mismatches (model applied to incompatible data).
"""

from __future__ import annotations

__all__ = [
    "DntError",
    "InvalidArgumentError",
    "InsufficientDataError",
    "FormatError",
    "UnsupportedVersionError",
    "ModelMismatchError",
    "ConfigError",
    "TrainingError",
]


class DntError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(DntError, ValueError):
    """An argument value is outside the documented domain."""


class InsufficientDataError(InvalidArgumentError):
    """Too few observations for the requested computation."""


class FormatError(DntError, ValueError):
    """A file or payload does not match its documented layout."""


class UnsupportedVersionError(FormatError):
    """A payload is well formed but its version is not supported."""


class ModelMismatchError(DntError, ValueError):
    """A trained model is incompatible with the data it is applied to."""


class ConfigError(DntError, ValueError):
    """A run configuration contains unknown keys or invalid values."""


class TrainingError(DntError, RuntimeError):
    """Metric training produced a non-finite loss or cannot proceed."""
