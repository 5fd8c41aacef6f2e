"""Module resolution: from parsed sources to systems.

Single-name imports copy the imported module's statements into the
importer's namespace.  A composition import (``pr A || B sync on ...``)
turns the module into a composed system whose components are built once
and shared by every composition that names them.
"""

from __future__ import annotations

from pathlib import Path

from .. import prelude
from ..compose import ComposedSystem, PropRef, SyncCriterion
from ..diagnostics import Diagnostic, Span
from ..egrw import AtomicModule, EgRule, check_admissible, check_topmost
from ..errors import SyncrwError
from ..mel import BoolCond, Equality, Equation, Matching, Membership, MelModule, SortTest, \
    make_signature
from ..signature import KindRef, OpDecl, PropDecl, Sort
from ..split import PlainModule, PlainRule
from ..terms import Apply, Symbol, UnsupportedPattern, Var, mk_app, mk_var
from .lexer import default_prec, name_parts
from .mixfix import Grammar, MixfixError, TermResolver, parse_tree
from .syntax import (EqStmt, ImportStmt, MbStmt, ModuleSyntax, OpStmt, PropStmt,
                     RuleStmt, SortsStmt, SubsortStmt, VarStmt, parse_file)


class Program:
    """Everything loaded from a set of sources, by module name."""

    def __init__(self):
        self.systems: dict = {}
        self.syntax: dict = {}
        self.diagnostics: list = []

    @property
    def ok(self) -> bool:
        return not any(d.severity == "error" for d in self.diagnostics)

    def errors(self) -> list:
        return [d for d in self.diagnostics if d.severity == "error"]

    def get(self, name: str):
        if name not in self.syntax:
            raise SyncrwError(f"unknown module {name}", code="E-UNKNOWN-MODULE")
        sys = self.systems.get(name)
        if sys is None:
            raise SyncrwError(f"module {name} has errors", code="E-MODULE-ERRORS")
        return sys

    def __contains__(self, name) -> bool:
        return self.systems.get(name) is not None


def load_text(text: str, path: str = "<input>") -> Program:
    return load_units([parse_file(text, path)])


def load_paths(paths) -> Program:
    units = []
    for p in paths:
        p = Path(p)
        units.append(parse_file(p.read_text(encoding="utf-8"), str(p)))
    return load_units(units)


def load_units(units) -> Program:
    prog = Program()
    for u in units:
        prog.diagnostics += u.diagnostics
    Loader(prog, units).run()
    return prog


class _Fail(Exception):
    def __init__(self, diag: Diagnostic):
        super().__init__(diag.message)
        self.diag = diag


def _span(tok_or_span, path="<input>"):
    if tok_or_span is None or isinstance(tok_or_span, Span):
        return tok_or_span
    t = tok_or_span
    return Span(path, t.start, max(t.end, t.start + 1), t.line, t.col)


STAGE_SORTS = ("State", "Trans", "Stage")


class Loader:
    def __init__(self, prog: Program, units):
        self.prog = prog
        self.mods: dict = {}
        for u in units:
            for m in u.modules:
                if m.name in self.mods:
                    self.diag("error", "E-DUPLICATE-MODULE", f"module {m.name} is declared twice",
                              m.span)
                    continue
                self.mods[m.name] = m
        prog.syntax = dict(self.mods)
        self.building: list = []

    def diag(self, sev, code, msg, span=None) -> None:
        self.prog.diagnostics.append(Diagnostic(sev, code, msg, span))

    def run(self) -> None:
        for name in self.mods:
            self.build(name)

    def build(self, name: str, span=None):
        if name in self.prog.systems:
            return self.prog.systems[name]
        m = self.mods.get(name)
        if m is None:
            raise _Fail(Diagnostic("error", "E-UNKNOWN-MODULE", f"unknown module {name}", span))
        if name in self.building:
            cycle = " -> ".join(self.building[self.building.index(name):] + [name])
            raise _Fail(Diagnostic("error", "E-IMPORT-CYCLE", f"import cycle: {cycle}", span))
        self.building.append(name)
        result = None
        try:
            if m.kind == "pmod":
                result = PlainBuilder(self, m).build()
            elif _composition(m) is not None:
                result = ComposedBuilder(self, m).build()
            else:
                result = AtomicBuilder(self, m).build()
        except _Fail as e:
            self.prog.diagnostics.append(e.diag)
        finally:
            self.building.pop()
        self.prog.systems[name] = result
        return result

    def flat_items(self, m: ModuleSyntax, seen=None) -> list:
        """Statements of ``m`` with single-name imports copied in place."""
        seen = set() if seen is None else seen
        out = []
        for it in m.items:
            if isinstance(it, ImportStmt) and not it.is_composition:
                name = it.names[0]
                if name in seen:
                    continue
                seen.add(name)
                sub = self.mods.get(name)
                if sub is None:
                    raise _Fail(Diagnostic("error", "E-UNKNOWN-MODULE",
                                           f"unknown module {name}", it.span))
                if sub.kind == "pmod" or _composition(sub) is not None:
                    raise _Fail(Diagnostic("error", "E-IMPORT-COMPOSED",
                                           f"{name} is a composed system; compose it with "
                                           f"'pr {name} || ...' instead", it.span))
                if name in self.building:
                    cycle = " -> ".join(self.building[self.building.index(name):] + [name])
                    raise _Fail(Diagnostic("error", "E-IMPORT-CYCLE", f"import cycle: {cycle}",
                                           it.span))
                self.building.append(name)
                try:
                    out += self.flat_items(sub, seen)
                finally:
                    self.building.pop()
            else:
                out.append(it)
        return out


def _composition(m: ModuleSyntax):
    comps = [it for it in m.items if isinstance(it, ImportStmt) and it.is_composition]
    return comps[0] if comps else None


# -- shared scope machinery -------------------------------------------------------


class _Scope:
    """Declarations and term parsing inside one namespace."""

    def __init__(self, loader: Loader, m: ModuleSyntax, ns: str):
        self.loader = loader
        self.m = m
        self.ns = ns
        self.path = m.path
        self.sorts: list = []
        self.subsorts: list = []
        self.decls: list = []
        self.props: dict = {}
        self.syms: dict = {}
        self.vars: dict = {}
        self.visible_sorts: list = []  # sorts of components, for lookups
        self.known_ns: set = set()
        self.warnings: list = []
        self.sig = None
        self._grammar = None

    def fail(self, code, msg, where=None):
        raise _Fail(Diagnostic("error", code, msg, _span(where, self.path)))

    def warn(self, code, msg, where=None):
        self.loader.diag("warning", code, msg, _span(where, self.path))

    # sorts

    def add_sort(self, name: str) -> Sort:
        s = Sort(name, self.ns)
        if s not in self.sorts:
            self.sorts.append(s)
        return s

    def sort(self, ref, where=None):
        s = self.lookup_sort(ref.name, ref.span or where)
        return KindRef(s) if ref.kind else s

    def lookup_sort(self, name: str, where=None) -> Sort:
        if "." in name:
            ns, base = name.rsplit(".", 1)
            if ns == self.ns or ns in self.known_ns:
                for s in self.sorts + self.visible_sorts:
                    if s.ns == ns and s.name == base:
                        return s
        own = Sort(name, self.ns)
        if own in self.sorts:
            return own
        for s in prelude.SORTS:
            if s.name == name:
                return s
        hits = list(dict.fromkeys(s for s in self.visible_sorts if s.name == name))
        if len(hits) == 1:
            return hits[0]
        if hits:
            self.fail("E-AMBIGUOUS-SORT", f"sort {name} is ambiguous: "
                      + ", ".join(s.qname for s in hits) + "; qualify it", where)
        self.fail("E-UNKNOWN-SORT", f"unknown sort {name}", where)

    # declarations

    def subsort_stmt(self, st: SubsortStmt) -> None:
        for lo_chain, hi_chain in zip(st.chains, st.chains[1:]):
            for lo in lo_chain:
                for hi in hi_chain:
                    a = self.lookup_sort(lo.name, lo.span)
                    b = self.lookup_sort(hi.name, hi.span)
                    if (a, b) not in self.subsorts:
                        self.subsorts.append((a, b))

    def symbol(self, name: str, arity: int, attrs: dict, where) -> Symbol:
        key = (name, arity)
        sym = self.syms.get(key)
        assoc, comm = bool(attrs.get("assoc")), bool(attrs.get("comm"))
        if sym is None:
            parts = name_parts(name, arity)
            prec = attrs.get("prec", default_prec(parts))
            sym = Symbol(name, arity, self.ns, assoc=assoc, comm=comm, prec=prec, parts=parts)
            self.syms[key] = sym
            return sym
        if (assoc, comm) != (sym.assoc, sym.comm) and attrs:
            self.fail("E-ATTR-MISMATCH",
                      f"operator {name} is redeclared with different attributes", where)
        if "prec" in attrs and attrs["prec"] != sym.prec:
            self.fail("E-ATTR-MISMATCH", f"operator {name} is redeclared with another precedence",
                      where)
        return sym

    def op_stmt(self, st: OpStmt, ids: list) -> None:
        args = tuple(self.sort(a, st.span) for a in st.args)
        result = self.sort(st.result, st.span)
        attrs = st.attrs
        if attrs.get("assoc") and not attrs.get("comm"):
            self.fail("E-ATTR-UNSUPPORTED", "'assoc' is only supported together with 'comm'",
                      st.span)
        if attrs.get("comm") and len(args) != 2:
            self.fail("E-ATTR", "'comm' needs a binary operator", st.span)
        if "id" in attrs and not attrs.get("assoc"):
            self.fail("E-ATTR-UNSUPPORTED", "'id:' is only supported on assoc comm operators",
                      st.span)
        for n in st.names:
            if "_" in n and n.count("_") != len(args):
                self.fail("E-OP-ARITY", f"operator {n} has {n.count('_')} holes but "
                          f"{len(args)} arguments", st.span)
            sym = self.symbol(n, len(args), {k: v for k, v in attrs.items() if k != "id"},
                              st.span)
            d = OpDecl(sym, args, result, bool(attrs.get("ctor")))
            if d not in self.decls:
                self.decls.append(d)
            if "id" in attrs:
                ids.append((sym, attrs["id"], st.span))

    def var_stmt(self, st: VarStmt) -> None:
        s = self.sort(st.sort, st.span)
        for n in st.names:
            old = self.vars.get(n)
            v = mk_var(n, s)
            if old is not None and old is not v:
                self.fail("E-DUPLICATE-VAR", f"variable {n} is declared with two sorts", st.span)
            self.vars[n] = v

    def prop_symbol(self, name: str, where) -> Symbol:
        key = (name, 1)
        if key in self.syms:
            self.fail("E-DUPLICATE-PROPERTY", f"{name} is already declared", where)
        sym = Symbol(name, 1, self.ns, prec=41, parts=[name, "@", None], role="prop")
        self.syms[key] = sym
        return sym

    def check_attrs(self) -> None:
        sig = self.sig
        for d in self.decls:
            sym = d.sym
            if sym.comm:
                a, b = d.args
                if sig.kind_of(a) != sig.kind_of(b) or (sym.assoc and
                                                         sig.kind_of(a) != sig.kind_of(d.result)):
                    self.fail("E-ATTR", f"{sym.name}: assoc/comm operators need arguments and "
                              "result in one kind")
        seen: dict = {}
        for d in self.decls:
            key = (d.sym, tuple(sig.kind_of(a) for a in d.args))
            k = sig.kind_of(d.result)
            if seen.setdefault(key, k) != k:
                self.fail("E-OVERLOAD", f"{d.sym.name} is declared with the same argument kinds "
                          "but results in different kinds; rename one of them")

    # terms

    def grammar(self) -> Grammar:
        if self._grammar is None:
            self._grammar = Grammar(list(self.sig.decls))
        return self._grammar

    def _fly_sort(self, name, is_kind, tok):
        try:
            s = self.lookup_sort(name, tok)
        except _Fail as e:
            raise MixfixError(e.diag.message, tok) from None
        return KindRef(s) if is_kind else s

    def term(self, toks, expect=None, where=None):
        try:
            node = parse_tree(toks, self.grammar(), self.vars, self._fly_sort)
            return TermResolver(self.sig, self.ns).resolve(node, expect)
        except MixfixError as e:
            self.fail("E-PARSE-TERM", str(e), e.tok or where)
        except SyncrwError as e:
            self.fail(e.code, str(e), toks[0] if toks else where)

    def kind(self, t):
        try:
            return self.sig.kind_of(self.sig.least_sort_syntactic(t))
        except SyncrwError:
            return None

    def pair(self, ltoks, rtoks, where, what="equation"):
        lhs = self.term(ltoks, None, where)
        rhs = self.term(rtoks, self.kind(lhs), where)
        kl, kr = self.kind(lhs), self.kind(rhs)
        if kl is not None and kr is not None and kl != kr:
            self.fail("E-KIND-MISMATCH", f"the sides of this {what} are in different kinds "
                      f"{kl} and {kr}", where)
        return lhs, rhs

    def conditions(self, conds) -> tuple:
        out = []
        for c in conds:
            if c.kind == "match":
                pat, tgt = self.pair(c.left, c.right, c.span, "matching condition")
                out.append(Matching(pat, tgt))
            elif c.kind == "eq":
                a, b = self.pair(c.left, c.right, c.span, "condition")
                out.append(Equality(a, b))
            elif c.kind == "sort":
                out.append(SortTest(self.term(c.left, None, c.span), self.sort(c.right, c.span)))
            else:
                t = self.term(c.left, self.sig.kind_of(prelude.BOOL), c.span)
                if self.kind(t) != self.sig.kind_of(prelude.BOOL):
                    self.fail("E-KIND-MISMATCH", "a boolean condition must have sort Bool",
                              c.span)
                out.append(BoolCond(t))
        return tuple(out)

    def equation(self, st: EqStmt) -> Equation:
        lhs, rhs = self.pair(st.lhs, st.rhs, st.span)
        if type(lhs) is not Apply and type(lhs).__name__ != "AcApply":
            self.fail("E-EQ-LHS", "the left-hand side of an equation must be an operator "
                      "application", st.span)
        return Equation(lhs, rhs, self.conditions(st.conds), st.owise, st.span)

    def membership(self, st: MbStmt) -> Membership:
        subj = self.term(st.subject, None, st.span)
        if type(subj) is Var:
            self.fail("E-MB-SUBJECT", "a membership subject must be an operator application",
                      st.span)
        return Membership(subj, self.sort(st.sort, st.span), self.conditions(st.conds), st.span)

    def identities(self, ids) -> None:
        for sym, toks, sp in ids:
            t = self.term(toks, None, sp)
            if not t.ground:
                self.fail("E-ATTR", "an identity element must be ground", sp)
            sym.identity = t

    def init_term(self, eqs):
        sym = self.syms.get(("init", 0))
        if sym is None:
            return None
        for e in eqs:
            if type(e.lhs) is Apply and e.lhs.sym is sym:
                return mk_app(sym, ())
        return None


# -- atomic and functional modules ------------------------------------------------


class AtomicBuilder:
    def __init__(self, loader: Loader, m: ModuleSyntax):
        self.loader = loader
        self.m = m

    def build(self):
        m = self.m
        items = self.loader.flat_items(m)
        sc = _Scope(self.loader, m, m.name)
        system = m.kind == "mod"
        if system:
            for n in STAGE_SORTS:
                sc.add_sort(n)
            state, trans, stage = (Sort(n, sc.ns) for n in STAGE_SORTS)
            sc.subsorts += [(state, stage), (trans, stage)]
            sc.decls.append(OpDecl(sc.symbol("init", 0, {}, m.span), (), stage))
        ids: list = []
        rule_stmts = []
        auto = 0
        for it in items:
            if isinstance(it, SortsStmt):
                for r in it.names:
                    sc.add_sort(r.name)
        for it in items:
            if isinstance(it, SubsortStmt):
                sc.subsort_stmt(it)
            elif isinstance(it, OpStmt):
                sc.op_stmt(it, ids)
            elif isinstance(it, VarStmt):
                sc.var_stmt(it)
            elif isinstance(it, PropStmt):
                if not system:
                    sc.fail("E-PROP-IN-FMOD", "properties are declared in system modules", it.span)
                cod = sc.sort(it.sort, it.span)
                if not isinstance(cod, Sort):
                    sc.fail("E-PROP-SORT", "a property codomain must be a sort", it.span)
                for n in it.names:
                    sym = sc.prop_symbol(n, it.span)
                    sc.decls.append(OpDecl(sym, (KindRef(stage),), KindRef(cod)))
                    sc.props[sym] = PropDecl(sym, cod, it.total)
            elif isinstance(it, RuleStmt):
                if not system:
                    sc.fail("E-RULE-IN-FMOD", "functional modules have no rules", it.span)
                if it.label is None:
                    if it.name is not None:
                        sc.fail("E-STANDARD-RULE", f"rule [{it.name}] uses the standard form; "
                                f"write it as 'rl lhs =[ {it.name} ]=> rhs .' and declare "
                                f"'op {it.name} : -> Trans .'", it.span)
                    sc.fail("E-LABEL-REQUIRED", "an egalitarian rule needs a transition term: "
                            "'rl lhs =[ label ]=> rhs .' (or '=[*]=>' for a fresh constant)",
                            it.span)
                if it.label == "*":
                    auto += 1
                    sym = sc.symbol(f"tr#{auto}", 0, {}, it.span)
                    sc.decls.append(OpDecl(sym, (), trans, True))
                    sc.warn("W-AUTO-LABEL", f"transition constant tr#{auto} was synthesized "
                            "for this rule", it.span)
                    rule_stmts.append((it, mk_app(sym, ())))
                else:
                    rule_stmts.append((it, None))
            elif isinstance(it, ModuleSyntax):
                sc.fail("E-COMPONENT", "components are only allowed inside pmod", it.span)
        try:
            sc.sig = make_signature(sc.sorts, sc.subsorts, sc.decls, sc.props)
        except SyncrwError as e:
            sc.fail(e.code, str(e), m.span)
        sc.check_attrs()
        sc.identities(ids)
        eqs = [sc.equation(it) for it in items if isinstance(it, EqStmt)]
        mbs = [sc.membership(it) for it in items if isinstance(it, MbStmt)]
        rules = []
        for it, label in rule_stmts:
            lhs = sc.term(it.lhs, None, it.span)
            lab = label if label is not None else sc.term(it.label, None, it.span)
            rhs = sc.term(it.rhs, None, it.span)
            k = sc.sig.kind_of(stage)
            for part, what in ((lhs, "left-hand side"), (lab, "transition term"),
                               (rhs, "right-hand side")):
                if sc.kind(part) != k:
                    sc.fail("E-RULE-KIND", f"the {what} of a rule must be a stage", it.span)
            rules.append(EgRule(lhs, lab, rhs, sc.conditions(it.conds), it.span, it.name))
        try:
            if not system:
                return MelModule(m.name, sc.sig, eqs, mbs, ns=sc.ns)
            mod = AtomicModule(m.name, sc.sig, eqs, mbs, rules, sc.init_term(eqs), ns=sc.ns)
        except (UnsupportedPattern, SyncrwError) as e:
            sc.fail(getattr(e, "code", "E-DECLARATION"), str(e), m.span)
        for rep in (check_topmost(mod), check_admissible(mod)):
            for d in rep:
                self.loader.diag("warning", d.code, f"{m.name}: {d.message}", d.span or m.span)
        return mod


# -- composed modules ---------------------------------------------------------------


class ComposedBuilder:
    def __init__(self, loader: Loader, m: ModuleSyntax):
        self.loader = loader
        self.m = m

    def build(self):
        m = self.m
        comp_imports = [it for it in m.items if isinstance(it, ImportStmt) and it.is_composition]
        sc = _Scope(self.loader, m, m.name)
        if len(comp_imports) > 1:
            sc.fail("E-COMPOSITION", "a module has at most one composition import",
                    comp_imports[1].span)
        imp = comp_imports[0]
        comps = []
        for n in imp.names:
            sub = self.loader.build(n, imp.span)
            if sub is None:
                raise _Fail(Diagnostic("error", "E-COMPONENT-ERRORS",
                                       f"component {n} of {m.name} has errors", imp.span))
            if not isinstance(sub, (AtomicModule, ComposedSystem)):
                sc.fail("E-NOT-SYSTEM", f"{n} is not a system module", imp.span)
            comps.append((n, sub))
        items = self.loader.flat_items(
            ModuleSyntax(m.kind, m.name, [it for it in m.items if it is not imp], m.span, m.path))
        for n in STAGE_SORTS[2:]:
            sc.add_sort(n)
        stage = Sort("Stage", sc.ns)
        for _, sub in comps:
            mod = sub if isinstance(sub, AtomicModule) else sub.glue
            sc.visible_sorts += mod.signature.sorts
            sc.known_ns |= {s.ns for s in mod.signature.sorts if s.ns}
        ids: list = []
        exported = {}
        has_init = any(isinstance(it, EqStmt) and [t.text for t in it.lhs] == ["init"]
                       for it in items)
        if has_init:
            sc.decls.append(OpDecl(sc.symbol("init", 0, {}, m.span), (), stage))
        for it in items:
            if isinstance(it, SortsStmt):
                for r in it.names:
                    sc.add_sort(r.name)
        for it in items:
            if isinstance(it, SubsortStmt):
                sc.subsort_stmt(it)
            elif isinstance(it, OpStmt):
                sc.op_stmt(it, ids)
            elif isinstance(it, VarStmt):
                sc.var_stmt(it)
            elif isinstance(it, PropStmt):
                cod = sc.sort(it.sort, it.span)
                for n in it.names:
                    sym = sc.prop_symbol(n, it.span)
                    exported[n] = PropDecl(sym, cod, it.total)
            elif isinstance(it, RuleStmt):
                sc.fail("E-RULE-IN-COMPOSITION", "a composed system has no rules of its own",
                        it.span)
            elif isinstance(it, ModuleSyntax):
                sc.fail("E-COMPONENT", "components are only allowed inside pmod", it.span)
        crits = [SyncCriterion(PropRef.parse(c.left), PropRef.parse(c.right), c.span)
                 for c in imp.criteria]
        try:
            system = ComposedSystem(m.name, comps, crits, exported, ns=sc.ns,
                                    extra_sorts=[s for s in sc.sorts if s != stage],
                                    extra_subsorts=sc.subsorts, extra_decls=sc.decls)
        except SyncrwError as e:
            sc.fail(e.code, str(e), e.span or imp.span)
        sc.sig = system.glue.signature
        sc.check_attrs()
        sc.identities(ids)
        eqs = [sc.equation(it) for it in items if isinstance(it, EqStmt)]
        mbs = [sc.membership(it) for it in items if isinstance(it, MbStmt)]
        projs = set(system.projections.values())
        for e, it in zip(eqs, [it for it in items if isinstance(it, EqStmt)]):
            _check_export_form(sc, e, stage, projs, it.span)
        glue = system.glue
        glue.equations.extend(eqs)
        glue.memberships.extend(mbs)
        try:
            glue._reindex()
        except UnsupportedPattern as e:
            sc.fail("E-EQ-LHS", str(e), m.span)
        system.own_equations = eqs
        system.own_memberships = mbs
        system._init = sc.init_term(eqs)
        return system


def _check_export_form(sc: _Scope, e: Equation, stage: Sort, projs: set, span) -> None:
    """Stage variables of a composed module may only occur under projections."""

    def walk(t, under_proj):
        if type(t) is Var:
            if t.sort == stage and not under_proj:
                sc.fail("E-EXPORT-FORM", f"stage variable {t.name} must be accessed through a "
                        "component projection", span)
            return
        args = getattr(t, "args", ())
        for a in args:
            walk(a, t.sym in projs)

    from ..mel import condition_terms
    lhs = e.lhs
    if lhs.sym.role == "prop":
        for a in lhs.args:
            if type(a) is not Var:
                walk(a, False)
    else:
        walk(lhs, False)
    walk(e.rhs, False)
    for c in e.conditions:
        for t in condition_terms(c):
            walk(t, False)


# -- plain modules --------------------------------------------------------------------


class PlainBuilder:
    def __init__(self, loader: Loader, m: ModuleSyntax):
        self.loader = loader
        self.m = m

    def build(self):
        return self.scope(self.m, [])

    def scope(self, m: ModuleSyntax, outer_sorts: list) -> PlainModule:
        sc = _Scope(self.loader, m, m.name)
        comps = []
        for it in m.items:
            if isinstance(it, ModuleSyntax):
                comps.append((it.name, self.scope(it, outer_sorts)))
            elif isinstance(it, ImportStmt):
                sc.fail("E-PLAIN-IMPORT", "plain modules are self-contained", it.span)
        for _, sub in comps:
            sc.visible_sorts += sub.signature.sorts
            sc.known_ns |= {s.ns for s in sub.signature.sorts if s.ns}
        ids: list = []
        for it in m.items:
            if isinstance(it, SortsStmt):
                for r in it.names:
                    sc.add_sort(r.name)
        top = Sort("State", sc.ns)
        if top not in sc.sorts:
            sc.fail("E-PLAIN-STATE", f"{m.name} must declare sort State", m.span)
        prop_order = []
        for it in m.items:
            if isinstance(it, SubsortStmt):
                sc.subsort_stmt(it)
            elif isinstance(it, OpStmt):
                sc.op_stmt(it, ids)
            elif isinstance(it, VarStmt):
                sc.var_stmt(it)
            elif isinstance(it, PropStmt):
                cod = sc.sort(it.sort, it.span)
                for n in it.names:
                    sym = sc.prop_symbol(n, it.span)
                    sc.decls.append(OpDecl(sym, (KindRef(top),), KindRef(cod)))
                    sc.props[sym] = PropDecl(sym, cod, it.total)
                    prop_order.append(sym)
        tuple_sym = None
        if comps:
            for (name, arity), sym in sc.syms.items():
                if name.startswith("<") and arity == len(comps):
                    sym.role = "tuple"
                    tuple_sym = sym
            if tuple_sym is None:
                sc.fail("E-PLAIN-TUPLE", f"{m.name} declares no tuple operator for its "
                        f"{len(comps)} components", m.span)
            for _, sub in comps:
                for sym in dict.fromkeys(sub.prop_table().values()):
                    pd = sub.signature.props[sym]
                    sc.decls.append(OpDecl(sym, (KindRef(top),), KindRef(pd.codomain)))
        try:
            probe = PlainModule(m.name, comps, sc.sorts, sc.subsorts, sc.decls, sc.props,
                                ns=sc.ns, tuple_sym=tuple_sym)
        except (UnsupportedPattern, SyncrwError) as e:
            sc.fail(getattr(e, "code", "E-DECLARATION"), str(e), m.span)
        sc.sig = probe.signature
        sc.check_attrs()
        sc.identities(ids)
        eqs, mbs, rules = [], [], []
        for it in m.items:
            if isinstance(it, EqStmt):
                eqs.append(sc.equation(it))
            elif isinstance(it, MbStmt):
                mbs.append(sc.membership(it))
            elif isinstance(it, RuleStmt):
                if it.label is not None:
                    sc.fail("E-PLAIN-LABEL", "rules of a plain module carry no transition term",
                            it.span)
                lhs, rhs = sc.pair(it.lhs, it.rhs, it.span, "rule")
                rules.append(PlainRule(lhs, rhs, sc.conditions(it.conds), it.span))
        try:
            return PlainModule(m.name, comps, sc.sorts, sc.subsorts, sc.decls, sc.props, eqs, mbs,
                               rules, sc.init_term(eqs), ns=sc.ns, tuple_sym=tuple_sym,
                               source=m.name)
        except (UnsupportedPattern, SyncrwError) as e:
            sc.fail(getattr(e, "code", "E-DECLARATION"), str(e), m.span)


# -- terms typed at run time ----------------------------------------------------------


def engine_of(system) -> MelModule:
    """The MEL module evaluating terms of ``system``."""
    return system.glue if isinstance(system, ComposedSystem) else system


def parse_term(system, text: str, variables=None):
    """Parse ``text`` in the signature of ``system``.

    Variables may be written on the fly as ``X:Sort``; ``variables`` maps
    further names to Var terms.
    """
    from .lexer import LexError, tokenize
    mod = engine_of(system)
    sig = mod.signature
    ns = mod.ns

    def sort_of(name, is_kind, tok):
        s = _find_sort(sig.sorts, name, ns)
        if s is None:
            raise MixfixError(f"unknown or ambiguous sort {name}", tok)
        return KindRef(s) if is_kind else s

    try:
        toks = [t for t in tokenize(text) if t.kind != "eof"]
    except LexError as e:
        raise SyncrwError(f"{e} in term {text!r}", code="E-PARSE-TERM") from None
    if not toks:
        raise SyncrwError("empty term", code="E-PARSE-TERM")
    grammar = getattr(mod, "_term_grammar", None)
    if grammar is None:
        grammar = mod._term_grammar = Grammar(list(sig.decls))
    try:
        node = parse_tree(toks, grammar, dict(variables or {}), sort_of)
        return TermResolver(sig, ns).resolve(node)
    except MixfixError as e:
        col = f" at column {e.tok.col}" if e.tok is not None else ""
        raise SyncrwError(f"{e}{col} in term {text!r}", code="E-PARSE-TERM") from None


def _find_sort(sorts, name: str, ns: str):
    by_q = [s for s in sorts if s.qname == name]
    if by_q:
        return by_q[0]
    own = [s for s in sorts if s.name == name and s.ns == ns]
    if own:
        return own[0]
    pre = [s for s in sorts if s.name == name and s.ns == ""]
    if pre:
        return pre[0]
    hits = [s for s in sorts if s.name == name]
    return hits[0] if len(hits) == 1 else None


__all__ = ["Program", "load_text", "load_paths", "load_units", "parse_term", "engine_of"]
