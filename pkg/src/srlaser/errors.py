"""Exception types raised across the package."""


class SrlaserError(Exception):
    """Base class for all package errors."""


class DegenerateRates(SrlaserError, ValueError):
    """Pump and decay both vanish, so the population factor is undefined."""


class ComplexBranches(SrlaserError, ValueError):
    """The cooperativity self-consistency has no real solution."""


class StepFailure(SrlaserError, RuntimeError):
    """The adaptive integrator could not advance."""


class NotStationary(SrlaserError, ValueError):
    """A state handed to the stability analysis is not a fixed point."""


class BelowThreshold(SrlaserError, ValueError):
    """No lasing solution exists for the requested operation."""


class AboveThreshold(SrlaserError, ValueError):
    """The requested operation only applies below threshold."""


class TruncationFailure(SrlaserError, RuntimeError):
    """A Fourier series cannot be truncated within the configured cap."""


class NegativeQ(SrlaserError, RuntimeError):
    """A Husimi function evaluated to a significantly negative value."""


class DomainError(SrlaserError, ValueError):
    """Quantum numbers out of range or of the wrong parity."""


class DegenerateNullSpace(SrlaserError, RuntimeError):
    """The generator has more than one (near) stationary state."""


class CutoffExceeded(SrlaserError, RuntimeError):
    """No photon cutoff on the ladder met the convergence policy."""


class DimensionTooLarge(SrlaserError, ValueError):
    """The dense oracle was asked for a space it cannot hold."""


class ConfigError(SrlaserError):
    """Base class for configuration problems."""


class ParseError(ConfigError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column else "") + ")"
        super().__init__(message + where)


class UnknownKey(ConfigError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown key"


class RangeError(ConfigError, ValueError):
    pass


class MissingPayload(SrlaserError, FileNotFoundError):
    """A record refers to a sidecar file that is not on disk."""
