"""Exception types raised by sofickit operations."""


class SofickitError(Exception):
    """Base class for every sofickit error."""


class SizeMismatch(SofickitError, ValueError):
    pass


class JoinConflict(SofickitError, ValueError):
    """Two partial bijections disagree, so their join is not injective or not a function."""


class NotPermutation(SofickitError, ValueError):
    pass


class NotPartition(SofickitError, ValueError):
    pass


class NotInvariant(SofickitError, ValueError):
    """Weights are not constant on some class."""


class NotWeightPreserving(SofickitError, ValueError):
    pass


class RelationMismatch(SofickitError, ValueError):
    pass


class NotClassRespecting(SofickitError, ValueError):
    pass


class NullSet(SofickitError, ValueError):
    pass


class NestingViolated(SofickitError, ValueError):
    pass


class Inadmissible(SofickitError, ValueError):
    """Some class meets the requested support in exactly one atom."""


class MissingImage(SofickitError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class NullRestriction(SofickitError, ValueError):
    pass


class NotCovered(SofickitError, ValueError):
    pass


class UnequalSubclasses(SofickitError, ValueError):
    """No invertible choice functions: subclasses of an S-class differ in size."""


class NonConstantIndex(SofickitError, ValueError):
    pass


class NotRelated(SofickitError, ValueError):
    pass


class NotRectangular(SofickitError, ValueError):
    pass


class NoSupportWitness(SofickitError, ValueError):
    pass


class CarrierMismatch(SofickitError, ValueError):
    pass


class BudgetExceeded(SofickitError, RuntimeError):
    pass
