"""Exception hierarchy shared by all ergopt modules."""


class ErgoptError(Exception):
    """Base class for every error raised by this package."""


class MalformedEdge(ErgoptError):
    """An edge refers to a node out of range, or an edge id is duplicated."""


class NoCycle(ErgoptError):
    """The graph is acyclic, so it carries no invariant measure at all."""


class NotAMeasure(ErgoptError):
    """A vector fails one of the flow-polytope conditions (the message names it)."""


class NotASimpleCycle(ErgoptError):
    """An edge sequence is not a closed simple directed cycle."""


class DimensionMismatch(ErgoptError):
    """Edge-indexed vectors of different lengths were combined."""


class InvalidBlockTable(ErgoptError):
    """A block table lists an inadmissible block or misses an admissible one."""


class CycleBudgetExceeded(ErgoptError):
    """Simple-cycle enumeration produced more cycles than the configured cap."""


class UniqueInput(ErgoptError):
    """A discontinuity witness was requested for a potential with a unique maximizer."""


class RetryBudgetExceeded(ErgoptError):
    """Random perturbation failed to reach uniqueness within the draw budget."""


class GapViolation(ErgoptError):
    """A perturbation radius is too large for the stability margin of the input."""


class GapUndefined(ErgoptError):
    """The stability margin does not exist because every simple cycle is optimal."""


class ParseError(ErgoptError):
    """Malformed JSON or a malformed rational literal in an input file."""


class ValidationError(ErgoptError):
    """Structurally valid input that violates an instance-level requirement."""


class InternalError(ErgoptError):
    """An internal consistency assertion failed; indicates a bug, not bad input."""
