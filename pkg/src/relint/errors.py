"""Exception types shared across the package."""


class RelintError(Exception):
    """Base class for all package errors."""


class MalformedProblem(RelintError):
    """LP problem violates its dimensional or bound invariants."""


class NumericalFailure(RelintError):
    """Solver did not converge within its iteration cap; not an infeasibility verdict."""


class ParseError(RelintError):
    """Malformed CSV input or a non-numeric feature cell."""


class LabelError(RelintError):
    """Label column does not contain exactly two distinct values."""


class SpecError(RelintError):
    """Invalid simulation specification."""


class FoldError(RelintError):
    """Requested stratified split cannot be built from the class sizes."""


class OptimizationFailure(RelintError):
    """An underlying LP solve failed while fitting or bounding."""


class InfeasibleConstraints(RelintError):
    """User constraint ranges admit no model in the equivalent-model class."""


class DimensionError(RelintError):
    """Sample width does not match the model's feature count."""


class DegenerateDistribution(RelintError):
    """Too few probe values to estimate a distribution."""


class BudgetExceeded(RelintError):
    """A server-side compute time budget ran out before the solve finished."""
