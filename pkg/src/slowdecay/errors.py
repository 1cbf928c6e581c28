"""Exception types shared across the package.

Every error that a caller is expected to branch on has its own class; plain
ValueError is reserved for malformed arguments (wrong shapes, NaNs, negative
radii) that indicate a programming mistake rather than a model verdict.
"""

from __future__ import annotations


class SlowDecayError(Exception):
    """Base class for all package-specific errors."""


class DegenerateExponents(SlowDecayError):
    """The exponent triple leaves no room between the scaling rate and n-2.

    Raised when n - 2 - m <= 0 (with m = (l+2)/(p-1)), where the derived
    constants L, lambda2 and the singular scaling lose meaning.
    """


class NoNonnegativeRoot(SlowDecayError):
    """The limit equation k0*z^p - Lp1*z + b = 0 has no nonnegative root (b > b_max)."""


class NegativeBase(SlowDecayError):
    """u < 0 reached a non-integer power; u^p is not real."""


class SeriesInvalid(SlowDecayError):
    """The origin expansion does not apply (forcing too singular: d >= 2)."""


class InsufficientCoverage(SlowDecayError):
    """The trajectory does not span the radii / times the operation needs."""


class WindowTooShort(SlowDecayError):
    """The requested fit or tail window has too few usable samples."""


class PositivityLost(SlowDecayError):
    """A construction needed a positive trajectory but positivity failed."""


class NoUnstableDirection(SlowDecayError):
    """No escape branch exists at the seed equilibrium (no positive branch)."""


class ClassMismatch(SlowDecayError):
    """Uniqueness cross-check got inputs that are not both singular-classified."""


class NotApplicable(SlowDecayError):
    """Closed-form construction requested outside its validity (non-pure K or mu != 0)."""


class NonpositiveForcing(SlowDecayError):
    """Manufactured forcing is not positive near the origin."""


class ConfigError(SlowDecayError):
    """Configuration file failed validation (schema, unknown keys, bad values)."""
