"""Exception types shared across the package.

Everything raised on bad input derives from :class:`TokenPruneError`, so
callers (and the CLI) can catch one base type and map it to a diagnostic.
"""


class TokenPruneError(Exception):
    """Base class for all domain errors raised by this package."""


class ValidationError(TokenPruneError):
    """Input data violates a structural invariant (NaN/Inf, bad shape, ...)."""


class DegenerateVectorError(ValidationError):
    """A feature vector has zero Euclidean norm; cosine similarity is undefined."""


class PairingError(TokenPruneError):
    """Importance vector length does not match the feature matrix."""


class BudgetError(TokenPruneError):
    """Requested selection budget K is outside [1, n_tokens]."""


class DomainError(TokenPruneError):
    """An operation was called outside its mathematical domain."""


class UndefinedRatioError(DomainError):
    """Importance retention is undefined because total importance mass is zero."""


class DegenerateGeometryError(DomainError):
    """All subset and reference distances vanished; the statistic is 0/0."""


class KernelConditioningError(TokenPruneError):
    """DPP kernel is numerically non-PSD beyond the accepted jitter."""


class FormatError(TokenPruneError):
    """A serialized file is malformed; message carries position information."""
