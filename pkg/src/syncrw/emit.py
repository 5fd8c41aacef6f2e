"""Printing plain modules as ``pmod`` source that the frontend reads back."""

from __future__ import annotations

from . import prelude
from .errors import SyncrwError
from .frontend.lexer import default_prec
from .frontend.resolve import parse_term
from .mel import BoolCond, Equality, Matching, SortTest
from .printer import term_str
from .signature import KindRef
from .split import PlainModule
from .terms import Term, mk_var, substitute, vars_of


class EmitError(SyncrwError):
    code = "E-EMIT"


def emit_plain(pm: PlainModule, header: bool = True) -> str:
    lines: list[str] = []
    if header:
        lines += _header(pm)
    lines += _Scope(pm, "pmod", "").lines()
    return "\n".join(lines) + "\n"


def _header(pm: PlainModule) -> list[str]:
    st = pm.stats
    out = [f"--- split of {pm.source or pm.name}"]
    crit = getattr(pm, "source_criteria", None)
    if crit:
        out.append("--- criteria: " + " /\\ ".join(crit))
    if not pm.atomic:
        out.append(f"--- rule combinations before subset expansion: {st.combinations}")
        out.append(f"--- product rules generated: {st.generated}")
        if getattr(pm, "pruned", False):
            out.append(f"--- pruned: {st.deleted} rules deleted, "
                       f"{st.conditions_removed} conditions removed, {len(pm.rules)} rules kept")
        else:
            out.append("--- not pruned")
    for c in st.guarded:
        out.append(f"--- criterion {c} involves a property not declared total: the membership")
        out.append("---   compares it through agree(_,_), which holds when either side is "
                   "undefined")
    autos = sorted({d.sym.name for d in _all_decls(pm) if d.sym.name.startswith("tr#")})
    if autos:
        out.append("--- auto-generated transition constants: " + " ".join(autos))
    return out


def _all_decls(pm):
    yield from pm.own_decls
    for _, sub in pm.components:
        yield from _all_decls(sub)


class _Scope:
    def __init__(self, pm: PlainModule, keyword: str, indent: str):
        self.pm = pm
        self.keyword = keyword
        self.indent = indent
        self.ns = pm.ns
        self.vars: dict = {}
        self.renames: dict = {}

    # names

    def sort(self, s) -> str:
        if isinstance(s, KindRef):
            return f"[{self.sort(s.sort)}]"
        if s.ns in ("", self.ns):
            return s.name
        return s.qname

    def qualify(self, sym):
        if sym.ns in ("", self.ns) or sym.parts[0] is None:
            return None
        return f"{sym.ns}.{sym.parts[0]}"

    def term(self, t: Term) -> str:
        t = self.rename(t)
        for name_of in (None, self.qualify):
            text = term_str(t, name_of)
            try:
                back = parse_term(self.pm, text, self.vars)
            except SyncrwError:
                continue
            if back is t:
                return text
        raise EmitError(f"cannot print {term_str(t)} so that it reads back in {self.pm.name}")

    def rename(self, t: Term) -> Term:
        if t.ground:
            return t
        sub = {v: self.renames[v] for v in vars_of(t) if self.renames.get(v, v) is not v}
        return substitute(t, sub) if sub else t

    def declare_vars(self, terms) -> None:
        for v in vars_of(*terms):
            if v in self.renames:
                continue
            name = v.name
            k = 1
            while name in self.vars and self.vars[name] is not mk_var(name, v.sort):
                k += 1
                name = f"{v.name}#{k}"
            nv = mk_var(name, v.sort)
            self.vars[name] = nv
            self.renames[v] = nv

    def cond(self, c) -> str:
        if isinstance(c, Equality):
            return f"{self.term(c.left)} = {self.term(c.right)}"
        if isinstance(c, Matching):
            return f"{self.term(c.pattern)} := {self.term(c.target)}"
        if isinstance(c, SortTest):
            return f"{self.term(c.subject)} : {self.sort(c.sort)}"
        if isinstance(c, BoolCond):
            return self.term(c.term)
        raise EmitError(f"unknown condition {c!r}")

    def conds(self, cs) -> str:
        return " if " + " /\\ ".join(self.cond(c) for c in cs) if cs else ""

    # statements

    def lines(self) -> list[str]:
        pm = self.pm
        ind = self.indent + "  "
        out = [f"{self.indent}{self.keyword} {pm.name} is"]
        for _, sub in pm.components:
            out += _Scope(sub, "component", ind).lines()
        sorts = [s for s in pm.own_sorts if s not in prelude.SORTS]
        if sorts:
            out.append(f"{ind}sorts {' '.join(self.sort(s) for s in dict.fromkeys(sorts))} .")
        for a, b in dict.fromkeys(pm.own_subsorts):
            out.append(f"{ind}subsort {self.sort(a)} < {self.sort(b)} .")
        for d in dict.fromkeys(pm.own_decls):
            if d.sym.role == "prop":
                continue
            out.append(ind + self.op(d))
        for sym, pd in pm.own_props.items():
            if sym.ns != self.ns:
                continue
            total = " [total]" if pd.total else ""
            out.append(f"{ind}prop {sym.name} : {self.sort(pd.codomain)}{total} .")
        stmts = [(m.subject, *_cterms(m.conditions)) for m in pm.own_memberships]
        stmts += [(e.lhs, e.rhs, *_cterms(e.conditions)) for e in pm.own_equations]
        stmts += [(r.lhs, r.rhs, *_cterms(r.conditions)) for r in pm.rules]
        for ts in stmts:
            self.declare_vars(ts)
        for name, v in sorted(self.vars.items()):
            out.append(f"{ind}var {name} : {self.sort(v.sort)} .")
        for m in pm.own_memberships:
            kw = "cmb" if m.conditions else "mb"
            out.append(f"{ind}{kw} {self.term(m.subject)} : {self.sort(m.sort)}"
                       f"{self.conds(m.conditions)} .")
        for e in pm.own_equations:
            kw = "ceq" if e.conditions else "eq"
            ow = " [otherwise]" if e.owise else ""
            out.append(f"{ind}{kw} {self.term(e.lhs)} = {self.term(e.rhs)}"
                       f"{self.conds(e.conditions)}{ow} .")
        for r in pm.rules:
            kw = "crl" if r.conditions else "rl"
            out.append(f"{ind}{kw} {self.term(r.lhs)} => {self.term(r.rhs)}"
                       f"{self.conds(r.conditions)} .")
        out.append(f"{self.indent}{'endpm' if self.keyword == 'pmod' else 'endc'}")
        return out

    def op(self, d) -> str:
        sym = d.sym
        args = " ".join(self.sort(a) for a in d.args)
        attrs = []
        if sym.assoc:
            attrs.append("assoc")
        if sym.comm:
            attrs.append("comm")
        if sym.identity is not None:
            attrs.append(f"id: {self.term(sym.identity)}")
        if d.ctor:
            attrs.append("ctor")
        if sym.prec != default_prec(sym.parts):
            attrs.append(f"prec {sym.prec}")
        tail = f" [{' '.join(attrs)}]" if attrs else ""
        return f"op {sym.name} : {args}{' ' if args else ''}-> {self.sort(d.result)}{tail} ."


def _cterms(conds) -> list:
    out = []
    for c in conds:
        if isinstance(c, Equality):
            out += [c.left, c.right]
        elif isinstance(c, Matching):
            out += [c.pattern, c.target]
        elif isinstance(c, SortTest):
            out.append(c.subject)
        else:
            out.append(c.term)
    return out


__all__ = ["emit_plain", "EmitError"]
