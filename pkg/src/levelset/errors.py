"""Exception types shared across the library."""


class LevelSetError(Exception):
    """Base class for all library errors."""


class InvalidInputError(LevelSetError):
    """An argument violates a documented precondition."""


class NumericalError(LevelSetError):
    """A linear-algebra routine failed even after jitter escalation."""


class RankDeficiencyError(NumericalError):
    """A target vector lies outside the range of a singular information matrix."""


class InsufficientSamplesError(InvalidInputError):
    """Too few samples for the robust mean estimator's confidence level."""


class DegenerateInstanceError(LevelSetError):
    """An instance has a zero gap, making an oracle quantity infinite."""


class BudgetExhaustedError(LevelSetError):
    """The sampling oracle has no budget left for the requested draws."""


class SchemaError(LevelSetError):
    """A configuration document or CSV file does not match the expected schema."""
