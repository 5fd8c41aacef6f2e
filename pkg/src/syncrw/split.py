"""Split: egalitarian systems as plain rewrite systems.

An atomic split keeps every stage as a state (the old ``State`` becomes
``State'`` and ``Stage`` becomes the new top sort ``State``) and cuts each
rule in two.  A composed split materializes tuples, the compatibility
membership axiom and one product rule per choice of component rules and
stepping subset.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import prelude
from .compose import ComposedSystem, render_flat
from .egrw import AtomicModule, _HeadIndex, check_topmost, map_condition
from .errors import SyncrwError
from .mel import Equality, Equation, Membership, MelModule, SortTest, make_signature, user_decls
from .printer import term_str
from .signature import Kind, KindRef, OpDecl, PropDecl, Sort
from .terms import AcApply, Apply, IntLit, Symbol, Term, Var, make, match, mk_app, mk_var, \
    substitute, vars_of


class SplitError(SyncrwError):
    code = "E-SPLIT"


@dataclass(frozen=True)
class PlainRule:
    lhs: Term
    rhs: Term
    conditions: tuple = ()
    span: object = field(default=None, compare=False)

    def describe(self) -> str:
        return f"rule {term_str(self.lhs)} => {term_str(self.rhs)}"


@dataclass
class SplitStats:
    combinations: int = 0
    generated: int = 0
    deleted: int = 0
    conditions_removed: int = 0
    guarded: list = field(default_factory=list)


@dataclass(frozen=True)
class PlainCriterion:
    """A criterion of the materialized membership axiom, by tuple position."""

    left_index: int
    left_sym: Symbol
    right_index: int
    right_sym: Symbol
    guarded: bool
    text: str


class PlainModule(MelModule):
    """A plain rewrite system: unlabeled rules over one top sort ``State``.

    The ``own_*`` fields are what this level declares; the signature,
    equations and memberships of the module also contain every component's.
    """

    def __init__(self, name, components=(), own_sorts=(), own_subsorts=(), own_decls=(),
                 own_props=None, own_equations=(), own_memberships=(), rules=(), init=None,
                 ns=None, tuple_sym=None, criteria=(), source=None, stats=None, warnings=()):
        self.components = list(components)
        self.own_sorts = list(own_sorts)
        self.own_subsorts = list(own_subsorts)
        self.own_decls = list(own_decls)
        self.own_props = dict(own_props or {})
        self.own_equations = list(own_equations)
        self.own_memberships = list(own_memberships)
        ns = name if ns is None else ns
        sorts, subsorts, decls, props, eqs, mbs = [], [], [], {}, [], []
        for _, sub in self.components:
            sorts += sub.signature.sorts
            subsorts += sub.signature.subsorts
            decls += user_decls(sub.signature)
            props.update(sub.signature.props)
            eqs += sub.equations
            mbs += sub.memberships
        sorts += self.own_sorts
        subsorts += self.own_subsorts
        decls += self.own_decls
        props.update(self.own_props)
        sig = make_signature(sorts, list(dict.fromkeys(subsorts)), decls, props)
        super().__init__(name, sig, eqs + self.own_equations, mbs + self.own_memberships, ns=ns)
        self.rules = list(dict.fromkeys(rules))
        self._init = init
        self.tuple_sym = tuple_sym
        self.criteria = list(criteria)
        self.source = source
        self.stats = stats or SplitStats()
        self.warnings = list(warnings)
        self.state = Sort("State", ns)
        self.state_prime = Sort("State'", ns)
        self.trans = Sort("Trans", ns)
        self._index_rules()
        self._succ: dict = {}

    @property
    def atomic(self) -> bool:
        return self.tuple_sym is None

    @property
    def init(self) -> Term | None:
        return None if self._init is None else self.normalize(self._init)

    def init_symbol(self):
        t = self._init
        if type(t) is Apply and not t.args and t.sym.name == "init":
            return t.sym
        return None

    # -- rewriting ----------------------------------------------------------------

    def _index_rules(self) -> None:
        if self.atomic:
            self._by_lhs = _HeadIndex([(r.lhs, r) for r in self.rules])
            return
        groups: dict = {}
        for r in self.rules:
            groups.setdefault(tuple(self._leaf_keys(r.lhs)), []).append(r)
        self._groups = list(groups.items())

    def _leaf_keys(self, t) -> list:
        if self.atomic:
            return [_key(t)]
        if type(t) is Apply and t.sym is self.tuple_sym:
            out = []
            for (_, sub), a in zip(self.components, t.args):
                out += sub._leaf_keys(a)
            return out
        return [None] * self.leaf_count()

    def leaf_count(self) -> int:
        if self.atomic:
            return 1
        return sum(sub.leaf_count() for _, sub in self.components)

    def _candidates(self, t):
        if self.atomic:
            return [r for _, r in self._by_lhs.candidates(t)]
        keys = self._leaf_keys(t)
        out = []
        for gk, rules in self._groups:
            if all(a is None or a == b for a, b in zip(gk, keys)):
                out += rules
        return out

    def plain_successors(self, t: Term) -> list:
        """All one-step rewrites of ``t`` at the top, sorted canonically."""
        hit = self._succ.get(t)
        if hit is not None:
            return hit
        t = self.normalize(t)
        enum = self._enum(None)
        out: dict = {}
        for rule in self._candidates(t):
            for theta in match(rule.lhs, t, self):
                for th in self.solve_conditions(rule.conditions, theta, enum, rule):
                    for full in self._complete(rule.rhs, th, enum, rule):
                        out[self.normalize(substitute(rule.rhs, full, strict=True))] = None
        res = sorted(out)
        self._succ[t] = res
        return res

    successors = plain_successors

    def is_state(self, t: Term) -> bool:
        return self.sort_ok(t, self.state)

    # -- views ------------------------------------------------------------------

    def flatten(self, t: Term) -> list:
        if self.atomic:
            return [t]
        if type(t) is not Apply or t.sym is not self.tuple_sym:
            return [t]
        out = []
        for (_, sub), a in zip(self.components, t.args):
            out += sub.flatten(a)
        return out

    def render(self, t: Term) -> str:
        if self.atomic:
            return term_str(t)
        return render_flat([term_str(p) for p in self.flatten(t)])

    def _leaf_classes(self, t) -> list:
        if self.atomic:
            s = self.sort_of_normal(t)
            sig = self.signature
            if sig.has_sort(self.state_prime) and sig.leq(s, self.state_prime):
                return ["State"]
            if sig.has_sort(self.trans) and sig.leq(s, self.trans):
                return ["Trans"]
            return ["Stage"]
        if type(t) is not Apply or t.sym is not self.tuple_sym:
            return ["Stage"]
        out = []
        for (_, sub), a in zip(self.components, t.args):
            out += sub._leaf_classes(a)
        return out

    def node_kind(self, t: Term) -> str:
        kinds = set(self._leaf_classes(t))
        if kinds == {"State"}:
            return "State"
        if kinds == {"Trans"}:
            return "Trans"
        return "Stage"

    def prop_table(self) -> dict:
        """Qualified property name -> symbol, as in the composed view."""
        out = {sym.name: sym for sym in self.own_props}
        for c, sub in self.components:
            for n, sym in sub.prop_table().items():
                out[f"{c}.{n}"] = sym
        return out

    def prop_names(self) -> list:
        return list(self.prop_table())

    def prop_value(self, name: str, t: Term):
        return self.eval_property(lookup_prop(self.prop_table(), name), t)

    def __repr__(self) -> str:
        return f"PlainModule({self.name}, {len(self.rules)} rules)"


def _key(t):
    if type(t) is Var:
        return None
    if type(t) is IntLit:
        return ("int", t.value)
    return t.sym


def lookup_prop(table: dict, name: str):
    sym = table.get(name)
    if sym is not None:
        return sym
    hits = [k for k in table if k.endswith("." + name)]
    if len(hits) == 1:
        return table[hits[0]]
    if not hits:
        raise SyncrwError(f"unknown property {name}", code="E-UNKNOWN-PROPERTY")
    raise SyncrwError(f"property {name} is ambiguous: {', '.join(hits)}",
                      code="E-AMBIGUOUS-PROPERTY")


# -- sort renaming --------------------------------------------------------------


class _Renamer:
    def __init__(self, mapping: dict):
        self.mapping = mapping
        self._vars: dict = {}

    def sort(self, s):
        if isinstance(s, Sort):
            return self.mapping.get(s, s)
        if isinstance(s, KindRef):
            return KindRef(self.sort(s.sort))
        return s

    def decl(self, d: OpDecl) -> OpDecl:
        return OpDecl(d.sym, tuple(self.sort(a) for a in d.args), self.sort(d.result), d.ctor)

    def term(self, t: Term) -> Term:
        if t.ground:
            return t
        sub = {}
        for v in vars_of(t):
            ns = self.sort(v.sort)
            if ns != v.sort:
                sub[v] = mk_var(v.name, ns)
        return substitute(t, sub) if sub else t

    def cond(self, c):
        c2 = map_condition(c, self.term)
        if isinstance(c2, SortTest):
            return SortTest(c2.subject, self.sort(c2.sort))
        return c2

    def equation(self, e: Equation) -> Equation:
        return Equation(self.term(e.lhs), self.term(e.rhs),
                        tuple(self.cond(c) for c in e.conditions), e.owise, e.span)

    def membership(self, m: Membership) -> Membership:
        return Membership(self.term(m.subject), self.sort(m.sort),
                          tuple(self.cond(c) for c in m.conditions), m.span)


# -- split ----------------------------------------------------------------------


def split(system, prune: bool = False) -> PlainModule:
    if isinstance(system, AtomicModule):
        return split_atomic(system)
    return split_composed(system, prune=prune)


def split_atomic(module: AtomicModule) -> PlainModule:
    rep = check_topmost(module)
    if not rep.ok:
        raise SplitError(f"{module.name} is not topmost: {rep.diagnostics[0].message}",
                         code="E-NOT-TOPMOST")
    ns = module.ns
    top, prime = Sort("State", ns), Sort("State'", ns)
    ren = _Renamer({module.state: prime, module.stage: top})
    sig = module.signature
    own_sorts = [ren.sort(s) for s in sig.sorts if s not in prelude.SORTS]
    own_subsorts = [(ren.sort(a), ren.sort(b)) for a, b in sig.subsorts]
    own_decls = [ren.decl(d) for d in user_decls(sig)]
    rules = []
    for r in module.rules:
        conds = tuple(ren.cond(c) for c in r.conditions)
        lhs, label, rhs = ren.term(r.lhs), ren.term(r.label), ren.term(r.rhs)
        rules.append(PlainRule(lhs, label, conds, r.span))
        rules.append(PlainRule(label, rhs, conds, r.span))
    return PlainModule(module.name, (), own_sorts, own_subsorts, own_decls, dict(sig.props),
                       [ren.equation(e) for e in module.equations],
                       [ren.membership(m) for m in module.memberships], rules, module._init,
                       ns=ns, source=module.name)


def _tuple_var_names(names) -> list:
    used: set = set()
    out = []
    for i, n in enumerate(names):
        pick = None
        for ch in n:
            if ch.isalpha() and ch.upper() not in used:
                pick = ch.upper()
                break
        if pick is None:
            pick = f"Q{i + 1}"
        used.add(pick)
        out.append(pick)
    return out


def _rename_apart(rule_lists) -> list:
    used: set = set()
    out = []
    for i, rules in enumerate(rule_lists):
        vs = vars_of(*[t for r in rules for t in (r.lhs, r.rhs, *_cond_terms(r.conditions))])
        sub = {}
        names = set()
        for v in vs:
            name = v.name
            if name in used:
                k = i + 1
                name = f"{v.name}#{k}"
                while name in used or name in names:
                    k += 1
                    name = f"{v.name}#{k}"
                sub[v] = mk_var(name, v.sort)
            names.add(name)
        used |= names
        if sub:
            rules = [PlainRule(substitute(r.lhs, sub), substitute(r.rhs, sub),
                               tuple(map_condition(c, lambda u: substitute(u, sub))
                                     for c in r.conditions), r.span) for r in rules]
        out.append(list(rules))
    return out


def _cond_terms(conds) -> list:
    from .mel import condition_terms
    return [t for c in conds for t in condition_terms(c)]


def _drop_projections(t: Term, projs: dict) -> Term:
    if type(t) not in (Apply, AcApply):
        return t
    args = [_drop_projections(a, projs) for a in t.args]
    i = projs.get(t.sym)
    if i is not None and type(args[0]) is Apply and args[0].sym.role == "tuple":
        return args[0].args[i]
    return make(t.sym, args)


def _prop_decl_of(owner, sym) -> PropDecl:
    mod = owner if isinstance(owner, MelModule) else owner.glue
    return mod.signature.props[sym]


def split_composed(system: ComposedSystem, prune: bool = False) -> PlainModule:
    comps = [(c, split(sub, prune)) for c, sub in system.components]
    ns = system.ns
    top = Sort("State", ns)
    tup = system.tuple_sym
    stats = SplitStats()
    warnings: list = []
    qnames = _tuple_var_names([c for c, _ in comps])
    qvars = [mk_var(n, sub.state) for n, (_, sub) in zip(qnames, comps)]
    qtuple = mk_app(tup, qvars)
    own_decls = [OpDecl(tup, tuple(sub.state for _, sub in comps), KindRef(top))]

    # compatibility membership
    conds = []
    criteria = []
    for left, right, crit in system._resolved:
        if not left.index or not right.index:
            raise SplitError(f"criterion {crit} does not address a component")
        li, ri = left.index[0], right.index[0]
        guarded = not (_prop_decl_of(left.owner, left.sym).total
                       and _prop_decl_of(right.owner, right.sym).total)
        a = make(left.sym, [qvars[li]])
        b = make(right.sym, [qvars[ri]])
        if guarded:
            conds.append(Equality(make(prelude.AGREE, [a, b]), prelude.TRUE))
            stats.guarded.append(str(crit))
            warnings.append(f"criterion {crit} uses a property not declared total; "
                            f"the membership guards it with agree(_,_)")
        else:
            conds.append(Equality(a, b))
        criteria.append(PlainCriterion(li, left.sym, ri, right.sym, guarded, str(crit)))
    own_mbs = [Membership(qtuple, top, tuple(conds))]

    # exported properties, defined through projections in the source
    own_props = {}
    for pd in system.exported.values():
        own_props[pd.sym] = pd
        own_decls.append(OpDecl(pd.sym, (KindRef(top),), KindRef(pd.codomain)))
    projs = {system.projections[c]: i for i, (c, _) in enumerate(system.components)}
    g_sort = system.stage
    ren = _Renamer({g_sort: top})
    skip = set(projs) | {tup} | {pd.sym for pd in system.exported.values()}
    own_decls += [ren.decl(d) for d in user_decls(system.glue.signature)
                  if d.sym.ns == ns and d.sym not in skip]
    own_eqs = []
    for e in system.own_equations:
        sub = {v: qtuple for v in vars_of(e.lhs, e.rhs) if v.sort == g_sort}

        def tr(u, sub=sub):
            return ren.term(_drop_projections(substitute(u, sub), projs))
        guard = (SortTest(qtuple, top),) if sub else ()
        own_eqs.append(Equation(tr(e.lhs), tr(e.rhs),
                                guard + tuple(map_condition(c, tr) for c in e.conditions),
                                e.owise, e.span))

    # inherited properties of every component
    for i, (c, sub) in enumerate(comps):
        for sym in dict.fromkeys(sub.prop_table().values()):
            pd = sub.signature.props[sym]
            own_decls.append(OpDecl(sym, (KindRef(top),), KindRef(pd.codomain)))
            own_eqs.append(Equation(make(sym, [qtuple]), make(sym, [qvars[i]]),
                                    (SortTest(qtuple, top),)))

    # init
    init = None
    init_sym = Symbol("init", 0, ns, parts=["init"])
    if system._init is not None:
        # defined by an own equation, already translated above
        init, init_rhs = system._init, None
    else:
        parts = [sub._init for _, sub in comps]
        init_rhs = None if any(p is None for p in parts) else mk_app(
            tup, [mk_app(sub.init_symbol(), ()) if sub.init_symbol() else sub._init
                  for _, sub in comps])
    if init is None and init_rhs is not None:
        own_decls.append(OpDecl(init_sym, (), top))
        init = mk_app(init_sym, ())
        own_eqs.append(Equation(init, init_rhs))

    # product rules
    lists = _rename_apart([sub.rules for _, sub in comps])
    stats.combinations = 1
    for rl in lists:
        stats.combinations *= len(rl)
    masks = [m for m in itertools.product((False, True), repeat=len(comps)) if any(m)]
    rules: dict = {}
    for combo in itertools.product(*lists):
        lhs = mk_app(tup, [r.lhs for r in combo])
        for mask in masks:
            rhs = mk_app(tup, [r.rhs if m else r.lhs for r, m in zip(combo, mask)])
            cs = tuple(c for r, m in zip(combo, mask) if m for c in r.conditions)
            cs += (SortTest(lhs, top), SortTest(rhs, top))
            rules[PlainRule(lhs, rhs, cs)] = None
    stats.generated = len(rules)
    pm = PlainModule(system.name, comps, [top], [], own_decls, own_props, own_eqs, own_mbs,
                     list(rules), init, ns=ns, tuple_sym=tup, criteria=criteria,
                     source=system.name, stats=stats, warnings=warnings)
    pm.source_criteria = [str(c) for c in system.criteria]
    return prune_rules(pm) if prune else pm


# -- pruning --------------------------------------------------------------------

_UNDEF = object()


def _settled(mod: PlainModule, t: Term):
    """Ground normal form of ``t`` (or _UNDEF when it is unsorted); None if
    it still depends on variables."""
    try:
        v = mod.normalize(t)
        if not v.ground:
            return None
        if isinstance(mod.sort_of_normal(v), Kind):
            return _UNDEF, v
        return v, v
    except SyncrwError:
        return None


def decide_membership(mod: PlainModule, t: Term):
    """True/False when ``t : State`` holds for every instance of ``t``,
    None when it cannot be decided statically."""
    if mod.atomic:
        return _decide_sorted(mod, t, mod.state)
    if type(t) is Var:
        return True if mod.signature.leq(t.sort, mod.state) else None
    if type(t) is not Apply or t.sym is not mod.tuple_sym:
        return None
    result = True
    for (_, sub), part in zip(mod.components, t.args):
        r = decide_membership(sub, part)
        if r is False:
            return False
        if r is None:
            result = None
    for crit in mod.criteria:
        r = _decide_criterion(mod, crit, t)
        if r is False:
            return False
        if r is None:
            result = None
    return result


def _decide_sorted(mod, t, sort):
    try:
        s = mod.signature.least_sort_syntactic(t, child=mod.sort_of_normal)
    except SyncrwError:
        return None
    if isinstance(s, Sort) and mod.signature.leq(s, sort):
        return True
    return None


def _decide_criterion(mod, crit: PlainCriterion, t: Term):
    a = _settled(mod, make(crit.left_sym, [t.args[crit.left_index]]))
    b = _settled(mod, make(crit.right_sym, [t.args[crit.right_index]]))
    if crit.guarded:
        if (a is not None and a[0] is _UNDEF) or (b is not None and b[0] is _UNDEF):
            return True
        if a is None or b is None:
            return None
        return a[0] is b[0]
    if a is None or b is None:
        return None
    return a[1] is b[1]


def prune_rules(mod: PlainModule) -> PlainModule:
    """Drop product rules whose tuple memberships are statically false and
    strip the ones that are statically true."""
    if mod.atomic:
        return mod
    kept = []
    stats = SplitStats(mod.stats.combinations, mod.stats.generated, mod.stats.deleted,
                       mod.stats.conditions_removed, list(mod.stats.guarded))
    for r in mod.rules:
        conds = []
        dead = False
        for c in r.conditions:
            if isinstance(c, SortTest) and c.sort == mod.state:
                d = decide_membership(mod, c.subject)
                if d is False:
                    dead = True
                    break
                if d is True:
                    stats.conditions_removed += 1
                    continue
            conds.append(c)
        if dead:
            stats.deleted += 1
            continue
        kept.append(PlainRule(r.lhs, r.rhs, tuple(conds), r.span))
    out = PlainModule(mod.name, mod.components, mod.own_sorts, mod.own_subsorts, mod.own_decls,
                      mod.own_props, mod.own_equations, mod.own_memberships, kept, mod._init,
                      ns=mod.ns, tuple_sym=mod.tuple_sym, criteria=mod.criteria,
                      source=mod.source, stats=stats, warnings=mod.warnings)
    out.source_criteria = getattr(mod, "source_criteria", [])
    out.pruned = True
    return out


def plain_successors(t: Term, module: PlainModule) -> list:
    return module.plain_successors(t)


__all__ = ["PlainRule", "PlainModule", "SplitStats", "SplitError", "split", "split_atomic",
           "split_composed", "prune_rules", "plain_successors", "decide_membership",
           "lookup_prop"]
