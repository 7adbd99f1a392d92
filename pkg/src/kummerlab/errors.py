"""Exception types raised across the package."""


class KummerLabError(Exception):
    """Base class for every error raised by this package."""


class CurveError(KummerLabError, ValueError):
    pass


class NotSquarefree(CurveError):
    pass


class BadDegree(CurveError):
    pass


class BadEtaIndex(CurveError):
    pass


class QuadratureNotConverged(KummerLabError, ArithmeticError):
    pass


class IllConditionedPeriods(KummerLabError, ArithmeticError):
    pass


class PathThroughBranchPoint(KummerLabError, ArithmeticError):
    pass


class RadiusOverflow(KummerLabError, ArithmeticError):
    pass


class MixedPeriodData(KummerLabError, ValueError):
    pass


class RootCountMismatch(KummerLabError, ArithmeticError):
    pass


class CoincidentDivisors(KummerLabError, ValueError):
    pass


class NullspaceNotOneDimensional(KummerLabError, ArithmeticError):
    pass


class IndeterminacyPoint(KummerLabError, ArithmeticError):
    pass


class WrongSpanDimension(KummerLabError, ArithmeticError):
    pass


class EigensplitFailed(KummerLabError, ArithmeticError):
    pass


class SumNotZero(KummerLabError, ValueError):
    pass


class ExpansionResidualTooLarge(KummerLabError, ArithmeticError):
    pass


class EmptyIntersection(KummerLabError, ArithmeticError):
    pass


class UnexpectedDimension(KummerLabError, ArithmeticError):
    pass


class OnContractedLocus(KummerLabError, ArithmeticError):
    pass


class PointNotOnSecant(KummerLabError, ValueError):
    pass


class PointNotOnTangent(KummerLabError, ValueError):
    pass


class ClassificationMismatch(KummerLabError, AssertionError):
    pass


class UnexpectedIncidence(KummerLabError, AssertionError):
    pass


class GenericityViolation(KummerLabError, ValueError):
    """Input sits on a locus excluded by a genericity guard."""
