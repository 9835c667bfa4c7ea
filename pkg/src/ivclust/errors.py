"""Exception hierarchy shared across the package."""


class IvclustError(Exception):
    """Base class for all ivclust errors."""


class EmptyInput(IvclustError):
    """Raised when a dataset is built from zero records."""


class NonPositiveWeight(IvclustError):
    """Raised when a point weight is zero or negative."""


class NonFiniteValue(IvclustError):
    """Raised when a point value is NaN or infinite."""


class DomainViolation(IvclustError):
    """Raised when a value lies outside a Bregman generator's domain."""


class IndexOutOfRange(IvclustError):
    """Raised on a range query with indices outside 1..n or start > end."""


class UnsupportedCombination(IvclustError):
    """Raised for model/data combinations the solver does not define."""


class NoConvergence(IvclustError):
    """Raised when an iterative prototype search exhausts its iteration cap."""


class InfeasibleConstraints(IvclustError):
    """Raised when cluster-size bounds admit no valid partition."""


class KTooLarge(IvclustError):
    """Raised when more clusters are requested than there are points."""


class SearchSpaceTooLarge(IvclustError):
    """Raised when exhaustive enumeration would exceed the partition cap."""


class SupportViolation(IvclustError):
    """Raised when an observation lies outside a density's support."""


class TooFewSamples(IvclustError):
    """Raised when the AIC small-sample correction denominator is <= 0."""


class ParseError(IvclustError):
    """Raised on malformed input files or method/family strings."""


class DegenerateClusterWarning(UserWarning):
    """Emitted when a parameter floor is applied to a degenerate cluster."""
