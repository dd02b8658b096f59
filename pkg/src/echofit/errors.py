"""Exception types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the domain of a physical model."""


class ConfigError(ValueError):
    """One or more validation failures.

    ``errors`` holds every failure as a ``"path: message"`` string so callers
    can report them all at once instead of stopping at the first.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))

    def prefixed(self, prefix: str) -> "ConfigError":
        return ConfigError([f"{prefix}.{e}" for e in self.errors])


class RankError(ValueError):
    """Design matrix is rank deficient (e.g. all abscissae equal)."""


class InsufficientDataError(ValueError):
    """Too few usable samples for the requested fit."""
