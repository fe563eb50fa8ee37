"""Define the errors raised by shrinklab.

Every error carries a human readable message naming the offending object and,
for caps, the configuration field that controls the limit.
"""


class ShrinklabError(Exception):
    """Base class of every error raised by the library."""


class CapExceeded(ShrinklabError):
    """A computation would exceed one of the configured size caps."""


class ClosureExceedsCap(CapExceeded):
    """Generating a permutation group produced more elements than allowed."""


class OrderExceedsCap(CapExceeded):
    """A subgroup-lattice operation was called on a group that is too large."""


class RangeExceeded(CapExceeded):
    """A degree or shift index is outside the configured range."""


class NotBijective(ShrinklabError):
    """A permutation is not a bijection of its domain."""


class NotNormal(ShrinklabError):
    """A subgroup that must be normal is not."""


class ContainedInFrattini(ShrinklabError):
    """The normal subgroup lies in the Frattini subgroup, no proper supplement."""


class NotSolvable(ShrinklabError):
    """The group is not solvable."""


class NotPGroup(ShrinklabError):
    """The group order is not a power of the given prime."""


class DimensionMismatch(ShrinklabError):
    """Matrix or vector dimensions are inconsistent."""


class GroupMismatch(ShrinklabError):
    """Modules or maps are defined over different groups or primes."""


class NotEquivariant(ShrinklabError):
    """A linear map does not commute with the group action."""


class NotSurjective(ShrinklabError):
    """A map that must be onto is not."""


class ParentMismatch(ShrinklabError):
    """Words from different truncations were combined."""


class IndexOutOfRange(ShrinklabError):
    """A filtration index lies beyond the truncation."""


class NotFound(ShrinklabError):
    """The solver found no annihilating vector below the guaranteed bound."""


class SolverBudgetExhausted(ShrinklabError):
    """Every solver strategy ran out of budget."""


class StageOrderViolation(ShrinklabError):
    """A two-stage shrink was driven out of order."""


class ScenarioError(ShrinklabError):
    """A scenario or text record could not be parsed or resolved."""


class VerificationFailure(ShrinklabError):
    """A recomputation contradicts a result. Never caught by library code."""


class SurjectivityFailure(VerificationFailure):
    """The commutator map onto a filtration layer is not onto."""


class ModelInconsistency(VerificationFailure):
    """An internal consistency check of an algebraic model failed."""


class InternalVerifyFail(VerificationFailure):
    """A solver certificate does not re-verify."""


class VerifyFail(VerificationFailure):
    """A shrinking pipeline left a target class alive."""


class ConfigError(ShrinklabError):
    """A configuration file or override holds a value outside its range."""
