"""Exception hierarchy shared across the package."""


class FundmaintError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(FundmaintError):
    """A run configuration is missing a field or violates a constraint."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class DomainError(FundmaintError):
    """An argument lies outside the mathematical domain of an operation."""


class ConditionViolated(FundmaintError):
    """A closed-form result does not exist for the supplied parameters."""


class QuadratureFailure(FundmaintError):
    """Adaptive quadrature could not reach its tolerance within budget."""


class NoDecay(FundmaintError):
    """The transform solver found no stable solution while enlarging the
    truncated domain; the transform argument lies outside its domain."""


class RefinementExhausted(FundmaintError):
    """Grid refinement hit its budget before reaching the target accuracy."""


class NoRoot(FundmaintError):
    """The decay-rate equation has no positive root for these parameters."""


class GridTooCoarse(FundmaintError):
    """A discrete time grid is too coarse for the requested computation."""


class SeriesTruncationError(FundmaintError):
    """A truncated series cannot meet its certified tail bound."""
