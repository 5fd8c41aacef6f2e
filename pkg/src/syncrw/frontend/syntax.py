"""Module grammar of ``.ers`` sources.

Terms are kept as token slices: they can only be parsed once the whole
signature of their module (imports included) is known, which happens in
``resolve``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..diagnostics import Diagnostic, Span
from .lexer import LexError, Token, tokenize

MODULE_ENDS = {"mod": "endm", "fmod": "endfm", "pmod": "endpm", "component": "endc"}
IMPORT_KEYWORDS = {"pr", "protecting", "inc", "including", "ex", "extending"}
STATEMENTS = {"sort", "sorts", "subsort", "subsorts", "op", "ops", "var", "vars", "eq", "ceq",
              "mb", "cmb", "rl", "crl", "prop", "props"} | IMPORT_KEYWORDS


class SyntaxErr(Exception):
    def __init__(self, message: str, tok: Token, code: str = "E-SYNTAX", hint: str | None = None):
        super().__init__(message)
        self.tok = tok
        self.code = code
        self.hint = hint


@dataclass(frozen=True)
class SortRef:
    name: str
    kind: bool = False
    span: Span | None = field(default=None, compare=False)

    def __str__(self) -> str:
        return f"[{self.name}]" if self.kind else self.name


@dataclass
class SortsStmt:
    names: list
    span: Span


@dataclass
class SubsortStmt:
    chains: list  # list of lists of SortRef; each list is one "<" level
    span: Span


@dataclass
class OpStmt:
    names: list
    args: list
    result: SortRef
    attrs: dict
    span: Span


@dataclass
class VarStmt:
    names: list
    sort: SortRef
    span: Span


@dataclass
class PropStmt:
    names: list
    sort: SortRef
    total: bool
    span: Span


@dataclass
class Cond:
    kind: str  # match | eq | sort | bool
    left: list
    right: object = None  # token list, or SortRef for sort tests
    span: Span | None = None


@dataclass
class EqStmt:
    lhs: list
    rhs: list
    conds: list
    owise: bool
    span: Span


@dataclass
class MbStmt:
    subject: list
    sort: SortRef
    conds: list
    span: Span


@dataclass
class RuleStmt:
    lhs: list
    label: object  # token list, "*" for a synthesized constant, None for plain rules
    rhs: list
    conds: list
    name: str | None
    span: Span


@dataclass
class CritSyntax:
    left: str
    right: str
    span: Span


@dataclass
class ImportStmt:
    names: list
    criteria: list
    span: Span

    @property
    def is_composition(self) -> bool:
        return len(self.names) > 1 or bool(self.criteria)


@dataclass
class ModuleSyntax:
    kind: str  # mod | fmod | pmod | component
    name: str
    items: list
    span: Span
    path: str = "<input>"


@dataclass
class SourceUnit:
    path: str
    modules: list
    diagnostics: list
    text: str = ""


def parse_file(text: str, path: str = "<input>") -> SourceUnit:
    return _Parser(text, path).run()


class _Parser:
    def __init__(self, text: str, path: str):
        self.path = path
        self.text = text
        self.diags: list = []
        try:
            self.toks = tokenize(text)
        except LexError as e:
            self.diags.append(Diagnostic("error", "E-SYNTAX", str(e),
                                         Span(path, e.pos, e.pos + 1, e.line, e.col)))
            self.toks = [Token("eof", "", len(text), len(text), 1, 1, True)]
        self.i = 0

    def span(self, a: Token, b: Token | None = None) -> Span:
        b = b or a
        return Span(self.path, a.start, max(b.end, a.start + 1), a.line, a.col)

    def err(self, message: str, tok: Token, code: str = "E-SYNTAX") -> None:
        self.diags.append(Diagnostic("error", code, message, self.span(tok)))

    def peek(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def run(self) -> SourceUnit:
        mods = []
        while self.peek().kind != "eof":
            t = self.peek()
            if t.kind == "word" and t.text in ("mod", "fmod", "pmod"):
                m = self.module()
                if m is not None:
                    mods.append(m)
            else:
                self.err(f"expected a module, found {t.text!r}", t)
                self.skip_to_module()
        return SourceUnit(self.path, mods, self.diags, self.text)

    def skip_to_module(self) -> None:
        while self.peek().kind != "eof":
            t = self.peek()
            if t.kind == "word" and t.text in ("mod", "fmod", "pmod"):
                return
            self.next()

    def module(self) -> ModuleSyntax | None:
        kw = self.next()
        end = MODULE_ENDS[kw.text]
        name = self.next()
        if name.kind not in ("word", "int"):
            self.err("expected a module name", name)
            return None
        is_ = self.next()
        if is_.text != "is":
            self.err(f"expected 'is' after module name {name.text}", is_)
        items: list = []
        while True:
            t = self.peek()
            if t.kind == "eof":
                self.err(f"missing '{end}' for module {name.text}", kw)
                break
            if t.kind == "word" and t.text == end:
                self.next()
                break
            if t.kind == "word" and t.text in ("endm", "endfm", "endpm", "endc", "mod", "fmod",
                                                "pmod"):
                self.err(f"expected '{end}' to close {name.text}, found {t.text!r}", t)
                if t.text in ("endm", "endfm", "endpm", "endc"):
                    self.next()
                break
            if t.kind == "word" and t.text == "component":
                if kw.text not in ("pmod", "component"):
                    self.err("components are only allowed inside pmod", t)
                sub = self.module()
                if sub is not None:
                    items.append(sub)
                continue
            stmt_toks = self.statement_tokens()
            if not stmt_toks:
                continue
            try:
                items.append(self.statement(stmt_toks))
            except SyntaxErr as e:
                msg = str(e) + (f" (hint: {e.hint})" if e.hint else "")
                self.err(msg, e.tok, e.code)
        return ModuleSyntax(kw.text, name.text, items, self.span(kw, name), self.path)

    def statement_tokens(self) -> list:
        """Tokens of one statement, keyword first, without the final dot."""
        first = self.peek()
        toks = []
        while True:
            t = self.peek()
            if t.kind == "eof":
                self.err("missing '.' at end of statement", first)
                return []
            if t.kind == "dot":
                self.next()
                break
            if t.kind == "word" and toks and t.text in ("endm", "endfm", "endpm", "endc"):
                self.err("missing '.' at end of statement", first)
                return []
            toks.append(self.next())
        return toks

    # -- statements -----------------------------------------------------------

    def statement(self, toks: list):
        kw = toks[0]
        rest = toks[1:]
        sp = self.span(kw, toks[-1])
        k = kw.text
        if kw.kind != "word" or k not in STATEMENTS:
            raise SyntaxErr(f"unknown statement keyword {k!r}", kw)
        if k in ("sort", "sorts"):
            names = [self.sort_name(t) for t in rest]
            if not names:
                raise SyntaxErr("expected sort names", kw)
            return SortsStmt(names, sp)
        if k in ("subsort", "subsorts"):
            return self.subsort(rest, kw, sp)
        if k in ("op", "ops"):
            return self.op(k, rest, kw, sp)
        if k in ("var", "vars"):
            names, sort = self.names_colon_sort(rest, kw)
            return VarStmt(names, sort, sp)
        if k in ("prop", "props"):
            body, attrs = split_attrs(rest)
            names, sort = self.names_colon_sort(body, kw)
            total = False
            for a in attrs:
                if a.text == "total":
                    total = True
                else:
                    raise SyntaxErr(f"unknown property attribute {a.text!r}", a)
            return PropStmt(names, sort, total, sp)
        if k in ("eq", "ceq"):
            return self.equation(rest, kw, sp)
        if k in ("mb", "cmb"):
            body, conds = self.split_if(rest)
            colon = last_top(body, lambda t: t.text == ":" and t.spaced)
            if colon is None:
                raise SyntaxErr("expected ': Sort' in membership axiom", kw)
            sort = self.sort_ref(body[colon + 1:], body[colon])
            if not body[:colon]:
                raise SyntaxErr("membership axiom without a subject", kw)
            return MbStmt(body[:colon], sort, conds, sp)
        if k in ("rl", "crl"):
            return self.rule(rest, kw, sp)
        return self.import_(rest, kw, sp)

    def sort_name(self, t: Token) -> SortRef:
        if t.kind not in ("word",):
            raise SyntaxErr(f"expected a sort name, found {t.text!r}", t)
        return SortRef(t.text, False, self.span(t))

    def sort_ref(self, toks: list, where: Token) -> SortRef:
        if len(toks) == 1 and toks[0].kind == "word":
            return SortRef(toks[0].text, False, self.span(toks[0]))
        if (len(toks) == 3 and toks[0].text == "[" and toks[2].text == "]"
                and toks[1].kind == "word"):
            return SortRef(toks[1].text, True, self.span(toks[0], toks[2]))
        raise SyntaxErr("expected a sort or [kind]", toks[0] if toks else where)

    def sort_refs(self, toks: list) -> list:
        out = []
        i = 0
        while i < len(toks):
            t = toks[i]
            if t.text == "[":
                out.append(self.sort_ref(toks[i:i + 3], t))
                i += 3
            else:
                out.append(self.sort_ref([t], t))
                i += 1
        return out

    def subsort(self, rest, kw, sp) -> SubsortStmt:
        chains = [[]]
        for t in rest:
            if t.text == "<":
                if not chains[-1]:
                    raise SyntaxErr("empty side of '<' in subsort declaration", t)
                chains.append([])
            else:
                chains[-1].append(self.sort_name(t))
        if len(chains) < 2 or not chains[-1]:
            raise SyntaxErr("expected 'A < B' in subsort declaration", kw)
        return SubsortStmt(chains, sp)

    def names_colon_sort(self, toks, kw):
        colon = decl_colon(toks)
        if colon is None:
            raise SyntaxErr("expected ':'", kw)
        names = []
        for t in toks[:colon]:
            if t.kind != "word":
                raise SyntaxErr(f"expected a name, found {t.text!r}", t)
            names.append(t.text)
        if not names:
            raise SyntaxErr("expected at least one name", kw)
        if len(names) > 1 and kw.text in ("var", "prop"):
            raise SyntaxErr(f"'{kw.text}' declares one name; use '{kw.text}s'", kw)
        return names, self.sort_ref(toks[colon + 1:], toks[colon])

    def op(self, k, rest, kw, sp) -> OpStmt:
        body, attr_toks = split_attrs(rest)
        colon = decl_colon(body)
        if colon is None:
            raise SyntaxErr("expected ':' in operator declaration", kw)
        groups = adjacent_groups(body[:colon])
        if not groups:
            raise SyntaxErr("expected an operator name", kw)
        if k == "op" and len(groups) > 1:
            raise SyntaxErr("'op' declares one name; use 'ops' or remove the spaces", groups[1][0])
        names = ["".join(t.text for t in g) for g in groups]
        sig = body[colon + 1:]
        arrow = first_index(sig, lambda t: t.text == "->")
        if arrow is None:
            raise SyntaxErr("expected '->' in operator declaration", kw)
        args = self.sort_refs(sig[:arrow])
        res = sig[arrow + 1:]
        if not res:
            raise SyntaxErr("expected a result sort", sig[arrow])
        result = self.sort_ref(res, sig[arrow])
        return OpStmt(names, args, result, self.op_attrs(attr_toks), sp)

    def op_attrs(self, toks) -> dict:
        attrs: dict = {}
        i = 0
        while i < len(toks):
            t = toks[i]
            w = t.text
            if w in ("assoc", "comm", "ctor"):
                attrs[w] = True
                i += 1
            elif w in ("id", "id:"):
                j = i + 1
                if j < len(toks) and toks[j].text == ":":
                    j += 1
                k = j
                while k < len(toks) and toks[k].text not in ("assoc", "comm", "ctor", "prec",
                                                              "id"):
                    k += 1
                if k == j:
                    raise SyntaxErr("expected an identity term after 'id:'", t)
                attrs["id"] = toks[j:k]
                i = k
            elif w == "prec":
                if i + 1 >= len(toks) or toks[i + 1].kind != "int":
                    raise SyntaxErr("expected a number after 'prec'", t)
                attrs["prec"] = int(toks[i + 1].text)
                i += 2
            else:
                raise SyntaxErr(f"unknown operator attribute {w!r}", t)
        return attrs

    def split_if(self, toks):
        j = first_top(toks, lambda t: t.kind == "word" and t.text == "if")
        if j is None:
            return toks, []
        return toks[:j], self.conditions(toks[j + 1:], toks[j])

    def conditions(self, toks, where) -> list:
        parts = split_top(toks, lambda t: t.text == "/\\")
        out = []
        for p in parts:
            if not p:
                raise SyntaxErr("empty condition", where)
            sp = self.span(p[0], p[-1])
            j = first_top(p, lambda t: t.text == ":=")
            if j is not None:
                out.append(Cond("match", p[:j], p[j + 1:], sp))
                continue
            j = first_top(p, lambda t: t.text == "=")
            if j is not None:
                out.append(Cond("eq", p[:j], p[j + 1:], sp))
                continue
            j = last_top(p, lambda t: t.text == ":" and t.spaced)
            if j is not None:
                out.append(Cond("sort", p[:j], self.sort_ref(p[j + 1:], p[j]), sp))
                continue
            out.append(Cond("bool", p, None, sp))
        for c in out:
            if not c.left or (isinstance(c.right, list) and not c.right):
                raise SyntaxErr("condition side is empty", where)
        return out

    def equation(self, rest, kw, sp) -> EqStmt:
        body, attr_toks = split_attrs(rest)
        owise = False
        for a in attr_toks:
            if a.text in ("otherwise", "owise"):
                owise = True
            else:
                raise SyntaxErr(f"unknown equation attribute {a.text!r}", a)
        body, conds = self.split_if(body)
        if kw.text == "ceq" and not conds:
            raise SyntaxErr("'ceq' needs an 'if' part", kw)
        if kw.text == "eq" and conds:
            raise SyntaxErr("conditional equations are written 'ceq'", kw)
        j = first_top(body, lambda t: t.text == "=")
        if j is None:
            raise SyntaxErr("expected '=' in equation", kw)
        if not body[:j] or not body[j + 1:]:
            raise SyntaxErr("equation side is empty", kw)
        return EqStmt(body[:j], body[j + 1:], conds, owise, sp)

    def rule(self, rest, kw, sp) -> RuleStmt:
        name = None
        if len(rest) >= 4 and rest[0].text == "[" and rest[2].text == "]" and rest[3].text == ":":
            name = rest[1].text
            rest = rest[4:]
        body, conds = self.split_if(rest)
        if kw.text == "crl" and not conds:
            raise SyntaxErr("'crl' needs an 'if' part", kw)
        if kw.text == "rl" and conds:
            raise SyntaxErr("conditional rules are written 'crl'", kw)
        a = first_top(body, lambda t: t.text == "=[")
        if a is not None:
            b = first_top(body, lambda t: t.text == "]=>")
            if b is None or b < a:
                raise SyntaxErr("expected ']=>' after the transition term", body[a])
            label = body[a + 1:b]
            if len(label) == 1 and label[0].text == "*":
                label = "*"
            elif not label:
                raise SyntaxErr("empty transition term", body[a])
            lhs, rhs = body[:a], body[b + 1:]
        else:
            j = first_top(body, lambda t: t.text == "=>")
            if j is None:
                raise SyntaxErr("expected '=[ label ]=>' in rule", kw)
            label = None
            lhs, rhs = body[:j], body[j + 1:]
        if not lhs or not rhs:
            raise SyntaxErr("rule side is empty", kw)
        return RuleStmt(lhs, label, rhs, conds, name, sp)

    def import_(self, rest, kw, sp) -> ImportStmt:
        sync = first_index(rest, lambda t: t.kind == "word" and t.text == "sync")
        head = rest if sync is None else rest[:sync]
        names = []
        expect_name = True
        for t in head:
            if expect_name:
                if t.kind != "word":
                    raise SyntaxErr(f"expected a module name, found {t.text!r}", t)
                names.append(t.text)
                expect_name = False
            elif t.text == "||":
                expect_name = True
            else:
                raise SyntaxErr(f"expected '||' or 'sync on', found {t.text!r}", t)
        if expect_name:
            raise SyntaxErr("expected a module name", head[-1] if head else kw)
        crits = []
        if sync is not None:
            if sync + 1 >= len(rest) or rest[sync + 1].text != "on":
                raise SyntaxErr("expected 'sync on'", rest[sync])
            for part in split_top(rest[sync + 2:], lambda t: t.text == "/\\"):
                if len(part) != 3 or part[1].text != "=" or part[0].kind != "word" or \
                        part[2].kind != "word":
                    raise SyntaxErr("a criterion has the form 'A.p = B.q'",
                                    part[0] if part else rest[sync])
                crits.append(CritSyntax(part[0].text, part[2].text,
                                        self.span(part[0], part[2])))
            if not crits:
                raise SyntaxErr("expected criteria after 'sync on'", rest[sync])
        return ImportStmt(names, crits, sp)


# -- token-slice helpers ----------------------------------------------------------

_OPEN = {"(": ")", "{": "}", "=[": "]=>"}
_CLOSE = {")", "}", "]=>"}


def _scan(toks):
    depth = 0
    for i, t in enumerate(toks):
        if t.kind in ("special", "sym") and t.text in _OPEN:
            depth += 1
            yield i, t, depth - 1
            continue
        if t.kind in ("special", "sym") and t.text in _CLOSE:
            depth = max(0, depth - 1)
        yield i, t, depth


def first_top(toks, pred):
    for i, t, d in _scan(toks):
        if d == 0 and pred(t):
            return i
    return None


def last_top(toks, pred):
    found = None
    for i, t, d in _scan(toks):
        if d == 0 and pred(t):
            found = i
    return found


def first_index(toks, pred):
    for i, t in enumerate(toks):
        if pred(t):
            return i
    return None


def split_top(toks, pred) -> list:
    parts, cur = [], []
    for i, t, d in _scan(toks):
        if d == 0 and pred(t):
            parts.append(cur)
            cur = []
        else:
            cur.append(t)
    parts.append(cur)
    return parts


def split_attrs(toks):
    """Separate a trailing ``[ ... ]`` attribute list."""
    if not toks or toks[-1].text != "]":
        return toks, []
    for j in range(len(toks) - 2, -1, -1):
        if toks[j].text == "[":
            if j > 0 and toks[j - 1].text in ("->", ":"):
                return toks, []
            return toks[:j], toks[j + 1:-1]
        if toks[j].text == "]":
            break
    return toks, []


def decl_colon(toks):
    """The ':' separating names from sorts; names may contain unspaced colons."""
    j = first_index(toks, lambda t: t.text == ":" and t.spaced)
    return first_index(toks, lambda t: t.text == ":") if j is None else j


def adjacent_groups(toks) -> list:
    groups: list = []
    for t in toks:
        if groups and not t.spaced:
            groups[-1].append(t)
        else:
            groups.append([t])
    return groups
