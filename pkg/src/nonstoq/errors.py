"""Exception types shared across the package.

Plain argument mistakes (wrong lengths, out-of-range indices) raise
ValueError; these classes cover conditions a caller may want to catch
and handle as part of normal control flow.
"""


class NonStoqError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(NonStoqError, ValueError):
    """Malformed model file, grid string, or CLI configuration."""


class DegenerateFieldError(NonStoqError):
    """Effective transverse field is <= 0, where the slice coupling
    B = -log(tanh(beta*field/tau))/2 diverges.  Callers that can fall
    back to the classical (locked-slice) branch should do so."""


class InsufficientStatisticsError(NonStoqError):
    """Too few measurement samples to form an error estimate."""


class UnsupportedInverseError(NonStoqError):
    """The fluctuation variant has no usable inverse derivative."""


class SizeLimitError(NonStoqError):
    """System size exceeds what an exact solver can handle."""


class NoCrossingError(NonStoqError):
    """The measured curve and the inverse-derivative line never cross
    on the sweep grid."""


class ExtrapolationError(NonStoqError):
    """A crossing lies outside the interior of the sweep grid, so the
    free-energy integral cannot be evaluated without extrapolating."""


class MustSelectError(NonStoqError):
    """An operation requiring a selected crossing was given an
    unresolved multi-crossing result."""
