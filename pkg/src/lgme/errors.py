"""Exception hierarchy shared by all lgme modules."""


class LgmeError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(LgmeError, ValueError):
    """Input failed a structural check (bad index, non-symmetric matrix, ...)."""


class PreconditionError(ValidationError):
    """Input is well formed but violates an operation's precondition."""


class EmptyStateError(LgmeError, ValueError):
    """An operation annihilated the state or received a zero vector."""


class NumericalError(LgmeError, ArithmeticError):
    """A numerical routine could not produce a trustworthy result."""


class NumericalDegeneracyError(NumericalError):
    """Eigenvalue pairing of J @ cov broke down beyond tolerance."""


class DegenerateMeasurementError(NumericalError):
    """The measured block is (numerically) singular."""
