"""Exception types shared by every model and construction."""

from __future__ import annotations


class RescatError(Exception):
    """Base class; ``code`` is the stable machine-readable error name."""

    code = "ERROR"

    def __init__(self, message: str, **detail):
        super().__init__(message)
        self.detail = detail

    def to_dict(self) -> dict:
        return {"code": self.code, "message": str(self), "detail": {k: repr(v) for k, v in self.detail.items()}}


class ModelError(RescatError):
    code = "MODEL_ERROR"


class ShapeMismatch(RescatError):
    code = "SHAPE_MISMATCH"


class IncompatibleFamily(RescatError):
    code = "INCOMPATIBLE_FAMILY"


class SearchBudgetExceeded(RescatError):
    code = "SEARCH_BUDGET_EXCEEDED"


class IllFormedAtlas(RescatError):
    code = "ILL_FORMED_ATLAS"


class NonFunctionalRelation(RescatError):
    code = "NON_FUNCTIONAL_RELATION"


class IllFormedCocycle(RescatError):
    code = "ILL_FORMED_COCYCLE"


class BadTransitionFamily(RescatError):
    code = "BAD_TRANSITION_FAMILY"


class NotIso(RescatError):
    code = "NOT_ISO"


class NotInEqualizer(RescatError):
    code = "NOT_IN_EQUALIZER"


class ParseError(RescatError):
    code = "PARSE_ERROR"


class UnknownCheck(RescatError):
    code = "UNKNOWN_CHECK"
