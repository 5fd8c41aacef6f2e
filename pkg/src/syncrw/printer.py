"""Mixfix pretty-printing of terms, parenthesized so the parser reads them back."""

from __future__ import annotations

from typing import Callable, Optional

from .terms import AcApply, Apply, IntLit, Term, Var

NameOf = Callable[[object], Optional[str]]

_NO_SPACE_BEFORE = {",", ")"}
_NO_SPACE_AFTER = {"("}


def _join(tokens: list[str]) -> str:
    out = ""
    prev = None
    for tok in tokens:
        if prev is not None and tok not in _NO_SPACE_BEFORE and prev[-1] not in _NO_SPACE_AFTER:
            out += " "
        out += tok
        prev = tok
    return out


def term_str(t: Term, name_of: NameOf | None = None, var_sorts: bool = False) -> str:
    """Surface syntax of ``t``.

    ``name_of(sym)`` may return a qualified spelling for the leading keyword
    of a symbol (``LTRAIN.isMoving``); ``None`` keeps the plain name.
    """
    if type(t) is IntLit:
        return str(t.value)
    return _fmt(t, name_of, var_sorts)[0]


def _fmt(t: Term, name_of, var_sorts) -> tuple[str, int]:
    tp = type(t)
    if tp is IntLit:
        return (str(t.value), 0) if t.value >= 0 else (f"({t.value})", 0)
    if tp is Var:
        if var_sorts:
            return f"{t.name}:{t.sort}", 0
        return t.name, 0
    sym = t.sym
    parts = sym.parts
    if tp is AcApply:
        # children of a flattened chain are printed as a right-nested binary spine
        sub = t.args[-1]
        for a in reversed(t.args[:-1]):
            sub = _Pair(sym, a, sub)
        return _fmt_parts(sym, parts, [sub.left, sub.right], name_of, var_sorts)
    return _fmt_parts(sym, parts, list(t.args), name_of, var_sorts)


class _Pair:
    """Binary view of an AC chain used only for printing."""

    __slots__ = ("sym", "left", "right")

    def __init__(self, sym, left, right):
        self.sym, self.left, self.right = sym, left, right


def _fmt_parts(sym, parts, args, name_of, var_sorts) -> tuple[str, int]:
    keywords = {p for p in parts if p is not None}
    tokens: list[str] = []
    ai = 0
    first_kw = True
    last = len(parts) - 1
    for i, p in enumerate(parts):
        if p is not None:
            if first_kw and i == 0 and name_of is not None:
                q = name_of(sym)
                tokens.append(q if q else p)
            elif (p == "(" and i == 1) or (p == ":" and i > 0 and parts[i - 1] is not None):
                tokens[-1] += p
            else:
                tokens.append(p)
            first_kw = False
            continue
        a = args[ai]
        ai += 1
        if isinstance(a, _Pair):
            text, prec = _fmt_parts(a.sym, a.sym.parts, [a.left, a.right], name_of, var_sorts)
            same_assoc = True
        else:
            text, prec = _fmt(a, name_of, var_sorts)
            same_assoc = (type(a) in (Apply, AcApply) and a.sym is sym and sym.assoc)
        outer = i == 0 or i == last
        if outer:
            if prec >= sym.prec and not (prec == sym.prec and same_assoc):
                text = f"({text})"
        elif prec > 0 and type(a) in (Apply, AcApply, _Pair):
            child_kw = {x for x in a.sym.parts if x is not None}
            if child_kw & keywords:
                text = f"({text})"
        tokens.append(text)
    return _join(tokens), sym.prec
