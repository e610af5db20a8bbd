"""Physical unit conventions and the package's exception types."""

from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    """Reduced Planck constant and particle mass (natural units by default)."""

    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and self.mass > 0):
            raise ValueError("hbar and mass must be positive")


DEFAULT_CONSTANTS = PhysicalConstants()


class DomainError(ValueError):
    """Input lies outside the region where a quantity is defined."""


class PreconditionError(ValueError):
    """Input data is insufficient for the requested estimate."""
