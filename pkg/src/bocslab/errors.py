"""Exception hierarchy.

Every error that can be raised on bad input or a failed precondition derives
from ``BocsLabError``.  Errors that signal an internal inconsistency (a sign
bug, never expected on valid input) derive from ``InternalError``.
"""


class BocsLabError(Exception):
    """Base class for all library errors."""


class InternalError(BocsLabError):
    """An identity that must hold by construction failed."""


class DivisionByZero(BocsLabError, ZeroDivisionError):
    pass


class FieldMismatch(BocsLabError, TypeError):
    pass


class IdempotentMismatch(BocsLabError):
    pass


class EmptyPartition(BocsLabError, ValueError):
    pass


class TranslationDefectMismatch(InternalError):
    pass


class AlgebraMismatch(BocsLabError):
    pass


class StasheffViolation(BocsLabError):
    pass


class TriangularityViolation(BocsLabError):
    pass


class TruncationMismatch(BocsLabError):
    pass


class ModuleMismatch(BocsLabError):
    pass


class NotInvertible(BocsLabError):
    pass


class NotABocsMorphism(BocsLabError):
    pass


class NotAHomotopy(BocsLabError):
    pass


class NotAcyclic(BocsLabError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        # (degree, idempotent, homology dimension)
        self.witness = witness


class ChainMapDefect(InternalError):
    pass


class NotIdempotent(BocsLabError):
    pass


class NotComposableToZero(BocsLabError):
    pass


class NotExactOnComponents(BocsLabError):
    pass


class NotQuasiIso(BocsLabError):
    def __init__(self, msg, degree=None):
        super().__init__(msg)
        self.degree = degree


class TruncationTooSmall(BocsLabError):
    pass


class FormulationMismatch(InternalError):
    pass


class NotAnAlgMorphism(BocsLabError):
    pass


class NotAComplex(BocsLabError):
    pass


class NotATwistedMorphism(BocsLabError):
    pass


class ParseError(BocsLabError, ValueError):
    pass


class UnknownTarget(BocsLabError, KeyError):
    pass


class GenerationFailed(BocsLabError):
    pass
