"""Exception types raised across the engine."""


class MissidError(Exception):
    """Base class for all engine errors."""


class UnknownNameError(MissidError, NameError):
    """A variable or node name is not part of the table or graph."""


class ArgumentError(MissidError, ValueError):
    """Arguments are individually valid but inconsistent with each other."""


class ConstructionError(MissidError, ValueError):
    """A table or graph violates its structural invariants."""


class PositivityError(MissidError):
    """A probability that must be positive is (numerically) zero."""


class AssumptionError(MissidError):
    """A model/variant combination is not part of the catalog."""


class CompletenessFailure(MissidError):
    """A shadow design matrix lacks full column rank."""


class CompletenessInfeasible(MissidError):
    """Scenario generation cannot satisfy a completeness requirement."""


class ModelMisfit(MissidError):
    """A shadow system has no exact solution within tolerance."""


class InfeasibleSolution(MissidError):
    """A shadow solution implies a response probability above one."""


class CoverageError(MissidError):
    """A recovered density is undefined on a cell that needs it."""


class ParseError(MissidError, ValueError):
    """Malformed input record or file."""
