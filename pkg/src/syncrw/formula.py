"""State formulas: boolean combinations of property atoms and stage patterns.

Grammar::

    f    ::= f or f | f and f | not f | ( f ) | atom
    atom ::= PATH.prop | PATH.prop == LIT | PATH.prop =/= LIT
           | PATH ~ PATTERN | true | false

An atom whose property is undefined at a stage is false there.  ``PATH ~
PATTERN`` holds when the part of the stage at component ``PATH`` matches
the term pattern, which runs up to the next ``and``, ``or`` or unmatched
``)``.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import prelude
from .errors import SyncrwError
from .frontend.lexer import LexError, tokenize
from .mel import UNDEFINED
from .terms import Term, match, mk_int


class FormulaError(SyncrwError):
    code = "E-FORMULA"


@dataclass(frozen=True)
class Atom:
    prop: str
    op: str | None = None  # "==" or "=/="
    literal: Term | None = None

    def __str__(self) -> str:
        if self.op is None:
            return self.prop
        from .printer import term_str
        return f"{self.prop} {self.op} {term_str(self.literal)}"


@dataclass(frozen=True)
class Matches:
    path: tuple
    pattern_text: str

    def __str__(self) -> str:
        return f"{'.'.join(self.path) or '.'} ~ {self.pattern_text}"


@dataclass(frozen=True)
class Const:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Not:
    arg: object

    def __str__(self) -> str:
        return f"not {_wrap(self.arg)}"


@dataclass(frozen=True)
class And:
    left: object
    right: object

    def __str__(self) -> str:
        return f"{_wrap(self.left)} and {_wrap(self.right)}"


@dataclass(frozen=True)
class Or:
    left: object
    right: object

    def __str__(self) -> str:
        return f"{_wrap(self.left)} or {_wrap(self.right)}"


def _wrap(f) -> str:
    return f"({f})" if isinstance(f, (And, Or)) else str(f)


def parse_formula(text: str):
    try:
        toks = [t for t in tokenize(text) if t.kind != "eof"]
    except LexError as e:
        raise FormulaError(f"{e} in formula {text!r}") from None
    p = _FParser(text, toks)
    f = p.disj()
    if p.i < len(toks):
        raise FormulaError(f"unexpected {toks[p.i].text!r} in formula {text!r}")
    return f


class _FParser:
    def __init__(self, text, toks):
        self.text = text
        self.toks = toks
        self.i = 0

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j].text if j < len(self.toks) else None

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def disj(self):
        f = self.conj()
        while self.peek() == "or":
            self.i += 1
            f = Or(f, self.conj())
        return f

    def conj(self):
        f = self.neg()
        while self.peek() == "and":
            self.i += 1
            f = And(f, self.neg())
        return f

    def neg(self):
        if self.peek() == "not":
            self.i += 1
            return Not(self.neg())
        if self.peek() == "(":
            self.i += 1
            f = self.disj()
            if self.peek() != ")":
                raise FormulaError(f"missing ')' in formula {self.text!r}")
            self.i += 1
            return f
        return self.atom()

    def atom(self):
        if self.i >= len(self.toks):
            raise FormulaError(f"formula {self.text!r} ends too early")
        t = self.take()
        if t.text in ("true", "false") and self.peek() not in ("~",):
            return Const(t.text == "true")
        if t.text == "~" or self.peek() == "~":
            path = () if t.text == "~" else tuple(t.text.split("."))
            if t.text != "~":
                self.i += 1
            return Matches(path, self.pattern())
        if t.kind != "word":
            raise FormulaError(f"expected a property name, found {t.text!r}")
        if self.peek() in ("==", "=/="):
            op = self.take().text
            return Atom(t.text, op, self.literal())
        return Atom(t.text)

    def literal(self) -> Term:
        if self.i >= len(self.toks):
            raise FormulaError("expected a value after the comparison")
        t = self.take()
        if t.text == "true":
            return prelude.TRUE
        if t.text == "false":
            return prelude.FALSE
        if t.kind == "int":
            return mk_int(int(t.text))
        if t.text == "-" and self.i < len(self.toks) and self.toks[self.i].kind == "int":
            return mk_int(-int(self.take().text))
        raise FormulaError(f"comparison literals are true, false or integers, not {t.text!r}")

    def pattern(self) -> str:
        depth = 0
        start = self.i
        while self.i < len(self.toks):
            x = self.toks[self.i].text
            if depth == 0 and x in ("and", "or", ")"):
                break
            if x == "(":
                depth += 1
            elif x == ")":
                depth -= 1
            self.i += 1
        if self.i == start:
            raise FormulaError("expected a pattern after '~'")
        a, b = self.toks[start].start, self.toks[self.i - 1].end
        return self.text[a:b]


# -- evaluation -------------------------------------------------------------------


class Evaluator:
    """Evaluates a formula at stages of one system (through a SystemView)."""

    def __init__(self, view, formula):
        self.view = view
        self.formula = formula
        self._patterns: dict = {}
        self._check(formula)

    def _check(self, f) -> None:
        if isinstance(f, Atom):
            self.view.prop_symbol(f.prop)
        elif isinstance(f, Matches):
            self._pattern(f)
        elif isinstance(f, Not):
            self._check(f.arg)
        elif isinstance(f, (And, Or)):
            self._check(f.left)
            self._check(f.right)

    def _pattern(self, m: Matches):
        hit = self._patterns.get(m)
        if hit is None:
            hit = self._patterns[m] = self.view.part_pattern(m.path, m.pattern_text)
        return hit

    def __call__(self, stage: Term) -> bool:
        return self.eval(self.formula, stage)

    def eval(self, f, stage) -> bool:
        if isinstance(f, Const):
            return f.value
        if isinstance(f, Not):
            return not self.eval(f.arg, stage)
        if isinstance(f, And):
            return self.eval(f.left, stage) and self.eval(f.right, stage)
        if isinstance(f, Or):
            return self.eval(f.left, stage) or self.eval(f.right, stage)
        if isinstance(f, Matches):
            index, module, pat = self._pattern(f)
            part = self.view.project(stage, index)
            return next(iter(match(pat, part, module)), None) is not None
        v = self.view.prop_value(f.prop, stage)
        if v is UNDEFINED:
            return False
        if f.op is None:
            if v is prelude.TRUE:
                return True
            if v is prelude.FALSE:
                return False
            raise FormulaError(f"property {f.prop} is not boolean; compare it with '=='")
        return (v is f.literal) == (f.op == "==")


__all__ = ["parse_formula", "Evaluator", "FormulaError", "Atom", "Matches", "Const", "Not",
           "And", "Or"]
