"""Built-in sorts and operators shared by every module: Int and Bool.

Each built-in symbol may carry a ``builtin`` evaluator ``fn(term, engine)``
returning a replacement term or ``None`` when it does not apply (for
instance when an argument is not a literal).
"""

from __future__ import annotations

from .frontend.lexer import default_prec, name_parts
from .signature import ANY, Kind, OpDecl, Sort
from .terms import AcApply, IntLit, Symbol, mk_app, mk_int, make

INT = Sort("Int")
BOOL = Sort("Bool")


def _sym(name, arity, prec=None, assoc=False, comm=False, role=None):
    parts = name_parts(name, arity)
    s = Symbol(name, arity, "", assoc=assoc, comm=comm,
               prec=default_prec(parts) if prec is None else prec, parts=parts, role=role)
    return s


TRUE_SYM = _sym("true", 0)
FALSE_SYM = _sym("false", 0)
TRUE = mk_app(TRUE_SYM, ())
FALSE = mk_app(FALSE_SYM, ())


def boolean(b: bool):
    return TRUE if b else FALSE


def _ints(t):
    a, b = t.args
    if type(a) is IntLit and type(b) is IntLit:
        return a.value, b.value
    return None


def _fold_ac(op):
    def fn(t, eng):
        if type(t) is not AcApply:
            return None
        lits = [a for a in t.args if type(a) is IntLit]
        if len(lits) < 2:
            return None
        acc = lits[0].value
        for x in lits[1:]:
            acc = op(acc, x.value)
        rest = [a for a in t.args if type(a) is not IntLit]
        return make(t.sym, [mk_int(acc)] + rest) if rest else mk_int(acc)
    return fn


def _binary(op, wrap):
    def fn(t, eng):
        v = _ints(t)
        if v is None:
            return None
        r = op(*v)
        return None if r is None else wrap(r)
    return fn


def _quo(a, b):
    if b == 0:
        return None
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _rem(a, b):
    q = _quo(a, b)
    return None if q is None else a - b * q


def _neg(t, eng):
    (a,) = t.args
    return mk_int(-a.value) if type(a) is IntLit else None


def _and(t, eng):
    if type(t) is not AcApply:
        return None
    if FALSE in t.args:
        return FALSE
    if TRUE in t.args:
        rest = [a for a in t.args if a is not TRUE]
        return TRUE if not rest else make(t.sym, rest)
    return None


def _or(t, eng):
    if type(t) is not AcApply:
        return None
    if TRUE in t.args:
        return TRUE
    if FALSE in t.args:
        rest = [a for a in t.args if a is not FALSE]
        return FALSE if not rest else make(t.sym, rest)
    return None


def _not(t, eng):
    (a,) = t.args
    if a is TRUE:
        return FALSE
    if a is FALSE:
        return TRUE
    return None


def _eq(t, eng):
    a, b = t.args
    if not (a.ground and b.ground):
        return None
    return boolean(a is b)


def _neq(t, eng):
    a, b = t.args
    if not (a.ground and b.ground):
        return None
    return boolean(a is not b)


def _agree(t, eng):
    a, b = t.args
    if not (a.ground and b.ground):
        return None
    if isinstance(eng.sort_of_normal(a), Kind) or isinstance(eng.sort_of_normal(b), Kind):
        return TRUE
    return boolean(a is b)


def _build():
    syms = {}
    decls = []

    def add(name, arity, args, result, fn=None, **kw):
        s = _sym(name, arity, **kw)
        s.builtin = fn
        syms[name] = s
        decls.append(OpDecl(s, tuple(args), result))
        return s

    syms["true"] = TRUE_SYM
    syms["false"] = FALSE_SYM
    decls.append(OpDecl(TRUE_SYM, (), BOOL, ctor=True))
    decls.append(OpDecl(FALSE_SYM, (), BOOL, ctor=True))
    add("_+_", 2, (INT, INT), INT, _fold_ac(lambda x, y: x + y), prec=33, assoc=True, comm=True)
    add("_*_", 2, (INT, INT), INT, _fold_ac(lambda x, y: x * y), prec=31, assoc=True, comm=True)
    add("_-_", 2, (INT, INT), INT, _binary(lambda x, y: x - y, mk_int), prec=33)
    add("-_", 1, (INT,), INT, _neg, prec=15)
    add("_quo_", 2, (INT, INT), INT, _binary(_quo, mk_int), prec=31)
    add("_rem_", 2, (INT, INT), INT, _binary(_rem, mk_int), prec=31)
    for name, op in (("_<_", lambda x, y: x < y), ("_<=_", lambda x, y: x <= y),
                     ("_>_", lambda x, y: x > y), ("_>=_", lambda x, y: x >= y)):
        add(name, 2, (INT, INT), BOOL, _binary(op, boolean), prec=37)
    add("_==_", 2, (ANY, ANY), BOOL, _eq, prec=51)
    add("_=/=_", 2, (ANY, ANY), BOOL, _neq, prec=51)
    add("not_", 1, (BOOL,), BOOL, _not, prec=53)
    add("_and_", 2, (BOOL, BOOL), BOOL, _and, prec=55, assoc=True, comm=True)
    add("_or_", 2, (BOOL, BOOL), BOOL, _or, prec=59, assoc=True, comm=True)
    add("agree", 2, (ANY, ANY), BOOL, _agree, role="agree")
    return syms, decls


SYMBOLS, DECLS = _build()
AGREE = SYMBOLS["agree"]
SORTS = [INT, BOOL]


def is_literal(t) -> bool:
    """Prelude values: integer literals and the two booleans."""
    return type(t) is IntLit or t is TRUE or t is FALSE


def int_value(t):
    return t.value if type(t) is IntLit else None


__all__ = ["INT", "BOOL", "TRUE", "FALSE", "SYMBOLS", "DECLS", "SORTS", "AGREE",
           "boolean", "is_literal", "int_value"]
