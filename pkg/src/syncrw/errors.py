"""Exception types shared by the engine layers."""

from __future__ import annotations


class SyncrwError(Exception):
    """Base class; ``code`` is the stable diagnostic code."""

    code = "E-INTERNAL"

    def __init__(self, message: str, span=None, code: str | None = None):
        super().__init__(message)
        self.span = span
        if code is not None:
            self.code = code


class DeclarationError(SyncrwError):
    code = "E-DECLARATION"


class SubsortCycle(DeclarationError):
    code = "E-SUBSORT-CYCLE"


class IllFormedTerm(SyncrwError):
    code = "E-ILL-FORMED"


class SortAmbiguity(SyncrwError):
    code = "E-SORT-AMBIGUITY"


class NonTermination(SyncrwError):
    code = "E-STEP-BUDGET"


class AdmissibilityError(SyncrwError):
    code = "E-ADMISSIBILITY"


class PropertyError(SyncrwError):
    code = "E-PROPERTY"


class ResolutionError(SyncrwError):
    code = "E-RESOLVE"


class InitError(SyncrwError):
    code = "E-INIT"
