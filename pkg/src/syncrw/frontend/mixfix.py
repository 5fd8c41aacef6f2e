"""Mixfix term parsing.

A precedence parser first builds a tree of operator *shapes* (the
keyword/hole pattern of a name, shared by overloads and by namesakes in
other namespaces).  Resolution then picks symbols bottom-up and keeps only
alternatives that are well formed at the kind level.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..errors import SyncrwError
from ..signature import ANY
from ..terms import mk_int, mk_var, make
from .lexer import Token

INF = 10 ** 9


class MixfixError(Exception):
    def __init__(self, message: str, tok: Token | None):
        super().__init__(message)
        self.tok = tok


@dataclass
class Shape:
    parts: tuple
    syms: list = field(default_factory=list)
    prec: int = 0
    assoc: bool = True

    @property
    def trailing_bound(self) -> int:
        if self.parts[0] is None:
            return self.prec if self.assoc else self.prec - 1
        return self.prec

    def __str__(self) -> str:
        return "".join("_" if p is None else p for p in self.parts)


class Grammar:
    """Operator shapes available in one scope."""

    def __init__(self, symbols):
        self.shapes: dict = {}
        for sym in symbols:
            if not sym.parts:
                continue
            key = tuple(sym.parts)
            sh = self.shapes.get(key)
            if sh is None:
                sh = self.shapes[key] = Shape(key, [], sym.prec, sym.assoc)
            if sym not in sh.syms:
                sh.syms.append(sym)
            sh.prec = max(sh.prec, sym.prec)
            sh.assoc = sh.assoc and sym.assoc
        self.prefix: dict = {}
        self.infix: dict = {}
        self.juxt: list = []
        for sh in self.shapes.values():
            p = sh.parts
            if p[0] is not None:
                self.prefix.setdefault(p[0], []).append(sh)
            elif len(p) >= 2 and p[1] is not None:
                self.infix.setdefault(p[1], []).append(sh)
            elif len(p) == 2:
                self.juxt.append(sh)
        self.namespaces = {s.ns for s in symbols if s.ns}


@dataclass
class PNode:
    kind: str  # app | var | int
    tok: Token
    shape: Shape | None = None
    args: list = field(default_factory=list)
    value: object = None
    qual: str | None = None


class _Parser:
    def __init__(self, toks, grammar: Grammar, variables: dict, sort_of):
        end = toks[-1].end if toks else 0
        self.toks = list(toks) + [Token("eof", "", end, end, toks[-1].line if toks else 1,
                                        toks[-1].col if toks else 1, True)]
        self.g = grammar
        self.vars = variables
        self.sort_of = sort_of
        self.i = 0
        self.furthest: MixfixError | None = None

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        err = MixfixError(message, tok)
        if self.furthest is None or tok.start >= (self.furthest.tok.start if self.furthest.tok else -1):
            self.furthest = err
        raise err

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.text != text or t.kind == "eof":
            self.fail(f"expected {text!r}, found {t.text or 'end of term'!r}")
        self.i += 1
        return t

    def parse(self) -> PNode:
        if self.peek().kind == "eof":
            self.fail("empty term")
        try:
            node, _ = self.expr(INF, frozenset())
        except MixfixError:
            raise self.furthest from None
        t = self.peek()
        if t.kind != "eof":
            if self.furthest is not None and self.furthest.tok.start > t.start:
                raise self.furthest
            self.fail(f"unexpected {t.text!r}")
        return node

    def attempt(self, fn):
        save = self.i
        try:
            node, prec = fn()
            return node, prec, self.i
        except MixfixError:
            return None
        finally:
            self.i = save

    # -- expressions -----------------------------------------------------------

    def expr(self, maxp: int, stops: frozenset):
        left, lp = self.prefix(maxp, stops)
        while True:
            t = self.peek()
            if t.kind == "eof" or t.text in stops:
                break
            best = None
            for sh in self.g.infix.get(t.text, ()):
                if sh.prec > maxp or not _left_ok(sh, left, lp):
                    continue
                r = self.attempt(lambda sh=sh: self.finish(sh, [left], 1, stops, t))
                if r is not None and (best is None or r[2] > best[2]):
                    best = r
            if best is None and self.g.juxt and self.can_start(t):
                for sh in self.g.juxt:
                    if sh.prec > maxp or not _left_ok(sh, left, lp):
                        continue
                    r = self.attempt(lambda sh=sh: self.finish(sh, [left], 1, stops, t))
                    if r is not None and (best is None or r[2] > best[2]):
                        best = r
            if best is None:
                break
            left, lp, self.i = best
        return left, lp

    def can_start(self, t: Token) -> bool:
        if t.kind in ("word", "int") or t.text == "(":
            return True
        return t.text in self.g.prefix and t.text not in self.g.infix

    def finish(self, sh: Shape, args: list, k: int, stops: frozenset, tok: Token):
        parts = sh.parts
        last = len(parts) - 1
        args = list(args)
        for j in range(k, len(parts)):
            p = parts[j]
            if p is not None:
                self.expect(p)
                continue
            if j == last:
                child, cp = self.expr(sh.trailing_bound, stops)
                if cp > sh.trailing_bound:
                    self.fail(f"operand of {sh} needs parentheses", child.tok)
            else:
                nxt = parts[j + 1]
                if nxt is None:
                    child, _ = self.expr(sh.prec, stops)
                else:
                    child, _ = self.expr(INF, frozenset((nxt,)))
            args.append(child)
        return PNode("app", tok, sh, args), sh.prec

    def prefix(self, maxp: int, stops: frozenset):
        t = self.peek()
        if t.kind == "eof":
            self.fail("unexpected end of term")
        if t.kind == "int":
            self.i += 1
            return PNode("int", t, value=int(t.text)), 0
        nxt = self.peek(1)
        if t.text == "-" and nxt.kind == "int" and not nxt.spaced:
            self.i += 2
            return PNode("int", t, value=-int(nxt.text)), 0
        cands = []
        qual = None
        if t.kind == "word":
            if nxt.text == ":" and not nxt.spaced and self._fly_sort_follows():
                return self.fly_var(t), 0
            v = self.vars.get(t.text)
            if v is not None:
                self.i += 1
                return PNode("var", t, value=v), 0
            cands = list(self.g.prefix.get(t.text, ()))
            if not cands and "." in t.text:
                ns, kw = t.text.rsplit(".", 1)
                if ns in self.g.namespaces:
                    qual = ns
                    cands = [sh for sh in self.g.prefix.get(kw, ())
                             if any(s.ns == ns for s in sh.syms)]
            if not cands:
                self.fail(f"unknown operator or variable {t.text!r}")
        else:
            cands = list(self.g.prefix.get(t.text, ()))
        best = None
        for sh in cands:
            if sh.prec > maxp and sh.parts[-1] is None:
                continue

            def go(sh=sh):
                self.i += 1
                return self.finish(sh, [], 1, stops, t)
            r = self.attempt(go)
            if r is not None and (best is None or r[2] > best[2]):
                best = r
        if t.text == "(":
            r = self.attempt(self.group)
            if r is not None and (best is None or r[2] > best[2]):
                best = r
        if best is None:
            if self.furthest is not None and self.furthest.tok.start >= t.start:
                raise self.furthest
            self.fail(f"cannot parse a term starting at {t.text!r}")
        node, prec, self.i = best
        node.qual = qual
        return node, prec

    def group(self):
        self.expect("(")
        node, _ = self.expr(INF, frozenset((")",)))
        self.expect(")")
        return node, 0

    def _fly_sort_follows(self) -> bool:
        j = self.i + 2
        if j >= len(self.toks):
            return False
        s = self.toks[j]
        return s.text == "[" or (s.kind == "word" and not s.spaced)

    def fly_var(self, t: Token) -> PNode:
        self.i += 2
        s = self.peek()
        if s.text == "[":
            self.i += 1
            name = self.peek()
            self.i += 1
            self.expect("]")
            sort = self.sort_of(name.text, True, name)
        elif s.kind == "word" and not s.spaced:
            self.i += 1
            sort = self.sort_of(s.text, False, s)
        else:
            self.fail("expected a sort after ':'", s)
        return PNode("var", t, value=mk_var(t.text, sort))


def _left_ok(sh: Shape, left: PNode, lp: int) -> bool:
    if lp < sh.prec:
        return True
    return lp == sh.prec and sh.assoc and left.kind == "app" and left.shape is sh


def parse_tree(toks, grammar: Grammar, variables: dict, sort_of) -> PNode:
    return _Parser(toks, grammar, variables, sort_of).parse()


# -- resolution ---------------------------------------------------------------


class TermResolver:
    """Turns parse trees into terms of one signature."""

    def __init__(self, signature, ns: str, limit: int = 64):
        self.sig = signature
        self.ns = ns
        self.limit = limit

    def resolve(self, node: PNode, expect=None):
        alts = self.alternatives(node)
        if not alts:
            raise MixfixError("no well-formed reading of this term", node.tok)
        if len(alts) > 1 and expect is not None:
            fit = [a for a in alts if self._kind(a) == expect]
            if fit:
                alts = fit
        if len(alts) > 1:
            scored = sorted(alts, key=self._foreign)
            if self._foreign(scored[0]) < self._foreign(scored[1]):
                return scored[0]
            from ..printer import term_str
            shown = "; ".join(f"{term_str(a)} in {self._kind(a)}" for a in alts[:4])
            raise MixfixError(f"ambiguous term, readings: {shown}", node.tok)
        return alts[0]

    def _kind(self, t):
        try:
            return self.sig.kind_of(self.sig.least_sort_syntactic(t))
        except SyncrwError:
            return None

    def _foreign(self, t) -> int:
        n = 0
        stack = [t]
        while stack:
            u = stack.pop()
            sym = getattr(u, "sym", None)
            if sym is not None:
                if sym.ns not in ("", self.ns):
                    n += 1
                stack.extend(u.args)
        return n

    def alternatives(self, node: PNode) -> list:
        if node.kind == "int":
            return [mk_int(node.value)]
        if node.kind == "var":
            return [node.value]
        child_alts = [self.alternatives(a) for a in node.args]
        for a, alts in zip(node.args, child_alts):
            if not alts:
                raise MixfixError("no well-formed reading of this subterm", a.tok)
        out: dict = {}
        syms = [s for s in node.shape.syms if node.qual is None or s.ns == node.qual]
        for sym in syms:
            decls = self.sig.decls.get(sym)
            if not decls:
                continue
            for combo in itertools.product(*child_alts):
                if not self._fits(decls, combo):
                    continue
                try:
                    out[make(sym, list(combo))] = None
                except (ValueError, SyncrwError):
                    continue
                if len(out) >= self.limit:
                    break
        if not out:
            raise MixfixError(f"no declaration of {node.shape} accepts these arguments", node.tok)
        return list(out)

    def _fits(self, decls, args) -> bool:
        sig = self.sig
        try:
            kinds = [sig.kind_of(sig.least_sort_syntactic(a)) for a in args]
        except SyncrwError:
            return False
        for d in decls:
            if all(p is ANY or k == sig.kind_of(p) for k, p in zip(kinds, d.args)):
                return True
        return False
