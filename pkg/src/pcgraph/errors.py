"""Exception hierarchy shared by all pcgraph modules."""


class PCGraphError(Exception):
    """Base class for all errors raised by pcgraph."""


class InvalidModelError(PCGraphError, ValueError):
    """Model parameters violate a structural requirement (shape, symmetry, PD)."""


class NotCausalError(InvalidModelError):
    """The companion matrix has an eigenvalue with real part >= -eps_stab."""


class SingularMatrixError(PCGraphError, ArithmeticError):
    """A matrix that must be inverted is singular or too badly conditioned."""


class NumericalError(PCGraphError, ArithmeticError):
    """An iterative numerical routine failed to converge."""


class EstimationError(PCGraphError):
    """Spectral estimate cannot be inverted; a larger bandwidth is needed."""
