"""Atomic egalitarian rewrite systems: rules labeled by transition terms,
the half-rewrite relation, topmostness, admissibility and readability."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import prelude
from .diagnostics import Report
from .errors import SyncrwError
from .mel import (BoolCond, Equality, Matching, MelModule, SortTest, condition_terms,
                  user_decls)
from .printer import term_str
from .signature import KindRef, Sort
from .terms import AcApply, Apply, IntLit, Term, Var, match, mk_var, substitute, vars_of


@dataclass(frozen=True)
class EgRule:
    lhs: Term
    label: Term
    rhs: Term
    conditions: tuple = ()
    span: object = field(default=None, compare=False)
    name: str | None = field(default=None, compare=False)

    def describe(self) -> str:
        return "rule " + rule_str(self)


def condition_str(c, name_of=None) -> str:
    if isinstance(c, Equality):
        return f"{term_str(c.left, name_of)} = {term_str(c.right, name_of)}"
    if isinstance(c, Matching):
        return f"{term_str(c.pattern, name_of)} := {term_str(c.target, name_of)}"
    if isinstance(c, SortTest):
        return f"{term_str(c.subject, name_of)} : {c.sort}"
    return term_str(c.term, name_of)


def rule_str(r: EgRule, name_of=None) -> str:
    s = (f"{term_str(r.lhs, name_of)} =[ {term_str(r.label, name_of)} ]=> "
         f"{term_str(r.rhs, name_of)}")
    if r.conditions:
        s += " if " + " /\\ ".join(condition_str(c, name_of) for c in r.conditions)
    return s


def map_condition(c, fn):
    if isinstance(c, Equality):
        return Equality(fn(c.left), fn(c.right))
    if isinstance(c, Matching):
        return Matching(fn(c.pattern), fn(c.target))
    if isinstance(c, SortTest):
        return SortTest(fn(c.subject), c.sort)
    return BoolCond(fn(c.term))


def condition_vars(conds) -> list:
    return vars_of(*[t for c in conds for t in condition_terms(c)])


class AtomicModule(MelModule):
    """One component system: a MEL module plus egalitarian rules and ``init``.

    ``state``, ``trans`` and ``stage`` are the module's own copies of the
    three stage sorts.
    """

    def __init__(self, name, signature, equations=(), memberships=(), rules=(), init=None,
                 ns=None, state=None, trans=None, stage=None, **kw):
        super().__init__(name, signature, equations, memberships, ns=ns, **kw)
        self.rules = list(rules)
        self.state = state or Sort("State", self.ns)
        self.trans = trans or Sort("Trans", self.ns)
        self.stage = stage or Sort("Stage", self.ns)
        self._init = init
        self._half_cache: dict = {}
        self._index_rules()

    def _index_rules(self) -> None:
        self._by_lhs = _HeadIndex([(r.lhs, r) for r in self.rules])
        self._by_label = _HeadIndex([(r.label, r) for r in self.rules])

    # -- stages ---------------------------------------------------------------

    @property
    def init(self) -> Term | None:
        return None if self._init is None else self.normalize(self._init)

    def stage_class(self, t: Term) -> str | None:
        """``"State"``, ``"Trans"`` or None for a normalized stage."""
        s = self.sort_of_normal(t)
        sig = self.signature
        if sig.leq(s, self.state):
            return "State"
        if sig.leq(s, self.trans):
            return "Trans"
        return None

    def own_props(self) -> dict:
        """Properties declared in this module, by plain name."""
        return {sym.name: pd for sym, pd in self.signature.props.items() if sym.ns == self.ns}

    # -- half rewrites ----------------------------------------------------------

    def half_successors(self, stage: Term, domains: dict | None = None) -> list:
        """Targets of all half rewrites out of ``stage``, sorted canonically.

        ``domains`` maps a sort (or sort name) to the finite list of values
        its unbound variables range over, overriding enumerated sorts.
        """
        if domains is None:
            hit = self._half_cache.get(stage)
            if hit is not None:
                return hit
        stage = self.normalize(stage)
        cls = self.stage_class(stage)
        if cls is None:
            raise SyncrwError(f"{term_str(stage)} is neither a state nor a transition of {self.name}")
        enum = self._enum(domains)
        out: dict = {}
        if cls == "State":
            for pat, rule in self._by_lhs.candidates(stage):
                self._fire(pat, rule.label, rule, stage, enum, out)
        else:
            for pat, rule in self._by_label.candidates(stage):
                self._fire(pat, rule.rhs, rule, stage, enum, out)
        res = sorted(out)
        if domains is None:
            self._half_cache[stage] = res
        return res

    def _fire(self, pat, target, rule, stage, enum, out) -> None:
        for theta in match(pat, stage, self):
            for th in self.solve_conditions(rule.conditions, theta, enum, rule):
                for full in self._complete(target, th, enum, rule):
                    out[self.normalize(substitute(target, full, strict=True))] = None

class _HeadIndex:
    """Rules bucketed by the head symbol of a pattern; variable patterns
    and literal patterns are tried against everything."""

    def __init__(self, items):
        self.by_sym: dict = {}
        self.wild: list = []
        for pat, rule in items:
            if type(pat) in (Apply, AcApply):
                self.by_sym.setdefault(pat.sym, []).append((pat, rule))
            else:
                self.wild.append((pat, rule))
        self.order = {id(r): i for i, (_, r) in enumerate(items)}

    def candidates(self, t):
        hits = self.by_sym.get(t.sym, []) if type(t) in (Apply, AcApply) else []
        if not self.wild:
            return hits
        if not hits:
            return self.wild
        return sorted(hits + self.wild, key=lambda pr: self.order[id(pr[1])])


def half_successors(stage: Term, module: AtomicModule, domains=None) -> list:
    return module.half_successors(stage, domains)


# -- checks -------------------------------------------------------------------


def check_topmost(module: AtomicModule) -> Report:
    """Flag declarations building a Stage-kind term from a Stage-kind argument
    that can hold a genuine state or transition."""
    rep = Report()
    sig = module.signature
    stage_kind = sig.kind_of(module.stage)
    proper = {s for s in stage_kind.sorts
              if sig.leq(module.state, s) or sig.leq(module.trans, s)}
    decls = [d for d in user_decls(sig) if d.sym.role not in ("prop", "proj")]

    def closure(s) -> set:
        if isinstance(s, KindRef) or not isinstance(s, Sort):
            return set(stage_kind.sorts)
        seen = set(sig.subsorts_of(s))
        stack = list(seen)
        while stack:
            cur = stack.pop()
            for d in decls:
                if d.result != cur:
                    continue
                for a in d.args:
                    for b in (sig.subsorts_of(a) if isinstance(a, Sort) else stage_kind.sorts):
                        if b not in seen:
                            seen.add(b)
                            stack.append(b)
        return seen

    for d in decls:
        res = d.result
        if sig.kind_of(res) != stage_kind:
            continue
        for i, a in enumerate(d.args):
            if a is not None and not isinstance(a, Sort) and not isinstance(a, KindRef):
                continue
            if sig.kind_of(a) != stage_kind:
                continue
            if closure(a) & proper:
                rep.add("error", "E-NOT-TOPMOST",
                        f"operator {d.sym.name} builds a {res} from argument {i + 1} of sort {a}, "
                        f"which can hold a stage")
    return rep


def _coverage(bound, conds, target, finite) -> list:
    """Variables of ``target`` or of condition sides that no earlier step binds."""
    bound = set(bound)
    missing: list = []

    def need(vs):
        for v in vs:
            if v not in bound:
                if finite(v):
                    bound.add(v)
                elif v not in missing:
                    missing.append(v)
                    bound.add(v)

    for c in conds:
        if isinstance(c, Matching):
            need(vars_of(c.target))
            bound.update(vars_of(c.pattern))
        elif isinstance(c, (Equality, BoolCond)):
            left, right = (c.left, c.right) if isinstance(c, Equality) else (c.term, prelude.TRUE)
            lv, rv = vars_of(left), vars_of(right)
            if type(left) is Var and left not in bound and all(v in bound for v in rv):
                bound.add(left)
            elif type(right) is Var and right not in bound and all(v in bound for v in lv):
                bound.add(right)
            else:
                need(lv + rv)
        else:
            need(vars_of(c.subject))
    need(vars_of(target))
    return missing


def check_admissible(module: AtomicModule, domains=None) -> Report:
    """Report every variable a half rewrite would need but cannot bind."""
    rep = Report()
    enum = module._enum(domains)

    def finite(v):
        return enum(v) is not None

    for r in module.rules:
        for half, start, target in (("first", r.lhs, r.label), ("second", r.label, r.rhs)):
            for v in _coverage(vars_of(start), r.conditions, target, finite):
                rep.add("error", "E-ADMISSIBILITY",
                        f"{half} half of {r.describe()}: variable {v.name} is never bound",
                        r.span)
    return rep


# -- readability --------------------------------------------------------------


def is_readable_syntactic(rule: EgRule) -> bool:
    """Conservative readability test: True means the rule is readable."""
    lv, bv, rv = set(vars_of(rule.lhs)), set(vars_of(rule.label)), set(vars_of(rule.rhs))
    # a variable equated to a term over label variables takes the same value in both halves
    grew = True
    while grew:
        grew = False
        for c in rule.conditions:
            if not isinstance(c, Equality):
                continue
            for v, t in ((c.left, c.right), (c.right, c.left)):
                if type(v) is Var and v not in bv and set(vars_of(t)) <= bv:
                    bv.add(v)
                    grew = True
    if (lv & rv) - bv:
        return False
    groups = [set(condition_vars([c])) - bv for c in rule.conditions]

    def reach(start):
        seen = set(start)
        changed = True
        while changed:
            changed = False
            for g in groups:
                if g & seen and not g <= seen:
                    seen |= g
                    changed = True
        return seen

    left = reach(lv - bv)
    right = reach(rv - bv)
    return not (left & right)


def _fresh_name(base: str, used: set) -> str:
    name = base
    while name in used:
        if "$" in name:
            head, tail = name.split("$", 1)
            name = f"{head}'${tail}"
        else:
            name += "'"
    used.add(name)
    return name


def make_readable(rule: EgRule) -> EgRule:
    """Equivalent readable rule: shared variables are renamed apart per
    position and linked by equations, then the conditions are duplicated
    into one copy per half with the other half's variables freshened."""
    t, l, r, conds = rule.lhs, rule.label, rule.rhs, tuple(rule.conditions)
    vt, vl, vr = vars_of(t), vars_of(l), vars_of(r)
    used = {v.name for v in vars_of(t, l, r, *[x for c in conds for x in condition_terms(c)])}
    ren = {"t": {}, "l": {}, "r": {}}
    ren_c: dict = {}
    links: list = []
    suffix = {"t": "t", "l": "l", "r": "t'"}
    for x in vars_of(t, l, r):
        sites = [s for s, vs in (("t", vt), ("l", vl), ("r", vr)) if x in vs]
        if len(sites) < 2:
            continue
        new = {s: mk_var(_fresh_name(f"{x.name}${suffix[s]}", used), x.sort) for s in sites}
        for s in sites:
            ren[s][x] = new[s]
        if "l" in sites:
            for s in ("t", "r"):
                if s in sites:
                    links.append(Equality(new["l"], new[s]))
            ren_c[x] = new["l"]
        else:
            links.append(Equality(new["t"], new["r"]))
            ren_c[x] = new["t"]
    t2, l2, r2 = substitute(t, ren["t"]), substitute(l, ren["l"]), substitute(r, ren["r"])
    base = tuple(links) + tuple(map_condition(c, lambda u: substitute(u, ren_c)) for c in conds)
    cvars = condition_vars(base)

    def freshen(keep):
        sub = {}
        for v in cvars:
            if v not in keep:
                nm = v.name
                if "$" in nm:
                    head, tail = nm.split("$", 1)
                    cand = f"{head}'${tail}"
                else:
                    cand = nm + "'"
                sub[v] = mk_var(_fresh_name(cand, used), v.sort)
        return tuple(map_condition(c, lambda u: substitute(u, sub)) for c in base)

    first = freshen(set(vars_of(t2, l2)))
    second = freshen(set(vars_of(l2, r2)))
    return EgRule(t2, l2, r2, first + second, rule.span, rule.name)


def alpha_equivalent(r1: EgRule, r2: EgRule) -> bool:
    """Equal up to a bijective renaming of variables."""
    fwd: dict = {}
    bwd: dict = {}

    def eq(a, b) -> bool:
        if type(a) is Var or type(b) is Var:
            if type(a) is not Var or type(b) is not Var or a.sort != b.sort:
                return False
            if fwd.setdefault(a, b) is not b or bwd.setdefault(b, a) is not a:
                return False
            return True
        if type(a) is IntLit or type(b) is IntLit:
            return a is b
        if type(a) is not type(b) or a.sym is not b.sym or len(a.args) != len(b.args):
            return False
        return all(eq(x, y) for x, y in zip(a.args, b.args))

    if len(r1.conditions) != len(r2.conditions):
        return False
    if not (eq(r1.lhs, r2.lhs) and eq(r1.label, r2.label) and eq(r1.rhs, r2.rhs)):
        return False
    for c1, c2 in zip(r1.conditions, r2.conditions):
        if type(c1) is not type(c2):
            return False
        if isinstance(c1, SortTest) and c1.sort != c2.sort:
            return False
        if not all(eq(a, b) for a, b in zip(condition_terms(c1), condition_terms(c2))):
            return False
    return True


def with_rules(module: AtomicModule, rules) -> AtomicModule:
    """A copy of ``module`` with its rule set replaced."""
    m = AtomicModule(module.name, module.signature, module.equations, module.memberships,
                     rules, module._init, ns=module.ns, state=module.state,
                     trans=module.trans, stage=module.stage, step_budget=module.step_budget)
    return m


__all__ = ["EgRule", "AtomicModule", "half_successors", "check_topmost", "check_admissible",
           "is_readable_syntactic", "make_readable", "alpha_equivalent", "rule_str",
           "condition_str", "map_condition", "condition_vars", "with_rules"]
