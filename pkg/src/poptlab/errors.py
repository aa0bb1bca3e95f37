"""Exception types shared across the package."""


class PoptlabError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(PoptlabError):
    """Operand shapes or factor dimensions are incompatible."""


class NumericalError(PoptlabError):
    """A numerical routine failed to converge or produced invalid output."""


class PartitionError(PoptlabError):
    """An index partition or outcome merge is malformed."""


class UnsupportedQuery(PoptlabError):
    """A tabulated measure was asked about a projection it does not tabulate."""


class ReconstructionError(PoptlabError):
    """The tomographic linear system is too ill-conditioned to solve."""


class InconsistentOracle(PoptlabError):
    """Oracle values are incompatible with any linear functional."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class InvalidPOVM(PoptlabError):
    """A candidate POVM has a non-positive element or a bad total."""


class NotCompletelyPositive(PoptlabError):
    """A map required to be completely positive is not."""

    def __init__(self, message: str, min_eigenvalue: float | None = None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class InvalidInput(PoptlabError):
    """Structured input violates a documented precondition."""


class InvalidSetting(PoptlabError):
    """A measurement setting is not a valid dichotomic observable."""


class InvalidSpec(PoptlabError):
    """A generator request names an unsupported kind or dimension."""
