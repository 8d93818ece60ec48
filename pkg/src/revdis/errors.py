"""Exception hierarchy shared by all revdis modules."""


class RevdisError(Exception):
    """Base class for every error raised by revdis."""


class DimensionError(RevdisError, ValueError):
    """Invalid Hilbert-space size or mismatched operator shapes."""


class ConfigurationError(RevdisError, ValueError):
    """A configured limit (e.g. the joint dimension cap) was exceeded."""


class TruncationError(RevdisError, ValueError):
    """Fock truncation too small for the requested occupation.

    ``required`` holds the smallest truncation that satisfies the tail bound.
    """

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class ModelError(RevdisError, ValueError):
    """Physically invalid model input (non-Hermitian H, negative rate...)."""


class DomainError(RevdisError, ValueError):
    """Argument outside the domain of a closed-form expression."""


class InstabilityError(RevdisError):
    """Absorption dominates emission so no steady state exists."""


class NoSolutionError(RevdisError):
    """Root finding produced no admissible solution."""


class StiffnessError(RevdisError):
    """Time integration failed because the step size collapsed."""


class SteadyStateError(RevdisError):
    """Steady-state solve failed."""


class DegenerateSteadyStateError(SteadyStateError):
    """The generator kernel is not one-dimensional."""


class NoSteadyStateError(SteadyStateError):
    """The generator has modes with positive real part."""


class FitError(RevdisError):
    """Lorentzian fit failed; ``diagnostics`` carries solver details."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class PreconditionError(RevdisError, ValueError):
    """Input data does not satisfy an operation's preconditions."""


class InconsistentInputError(RevdisError, ValueError):
    """Measured value lies below a physical floor beyond tolerance."""
