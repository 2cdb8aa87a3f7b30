"""Exception types raised across the package."""


class SynthconfError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(SynthconfError, ValueError):
    """Inputs have incompatible or unsupported shapes."""


class NumericalError(SynthconfError, RuntimeError):
    """A numerical routine failed (factorization breakdown, overflow, ...)."""


class RankDeficiencyError(NumericalError):
    """A least-squares design is singular or too ill-conditioned to solve."""


class ParseError(SynthconfError, ValueError):
    """An input file could not be parsed; the message carries the line number."""
