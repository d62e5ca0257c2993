"""Exception hierarchy.

Every failure mode named in a module contract gets its own class so callers
(and the CLI exit-code mapping) can branch on type rather than message text.
"""


class IsospecError(Exception):
    """Base class for all library errors."""


class UsageError(IsospecError):
    """Bad input values; the CLI maps these to exit code 2."""


# -- field / curve arithmetic -------------------------------------------------

class NonPrime(UsageError):
    pass


class PTooSmall(UsageError):
    pass


class ParseError(IsospecError):
    pass


class DegreeMismatch(IsospecError):
    pass


class Unavailable(IsospecError):
    pass


# -- graph construction -------------------------------------------------------

class SeedNotSupersingular(IsospecError):
    pass


class SymmetrizationFailed(IsospecError):
    pass


class IoError(IsospecError):
    pass


class CorruptCache(IsospecError):
    pass


# -- spectra ------------------------------------------------------------------

class NotCommuting(IsospecError):
    pass


class DegenerateJointSpectrum(IsospecError):
    pass


class EmptyWindow(UsageError):
    pass


class SingleEigenvector(IsospecError):
    pass


# -- walk simulation ----------------------------------------------------------

class NotNormalized(IsospecError):
    pass


class UnknownVertex(UsageError):
    pass


class DomainError(UsageError):
    pass


# -- group action -------------------------------------------------------------

class SpecMismatch(UsageError):
    pass
