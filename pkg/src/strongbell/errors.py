"""Exception hierarchy. Public functions raise these instead of bare ValueError."""


class StrongbellError(Exception):
    """Base class for all package errors."""


class InvalidInputError(StrongbellError, ValueError):
    """An argument violates its documented domain."""


class ModelContractError(StrongbellError):
    """A hidden-variable model returned responses outside [0, 1]."""


class UnsupportedMethodError(StrongbellError):
    """Requested evaluation method is unavailable for this model or source."""


class DegenerateSourceError(StrongbellError):
    """A ratio denominator vanished (no coincidences at the reference setting)."""


class SymmetryError(StrongbellError):
    """Source failed the rotational-symmetry precondition of a folded-angle evaluator."""


class MissingTableEntryError(StrongbellError, KeyError):
    """A literal probability table lacks a required angle difference."""


class ComparisonUndefinedError(StrongbellError):
    """Violation-factor comparison requested between reports that are not both violated."""
