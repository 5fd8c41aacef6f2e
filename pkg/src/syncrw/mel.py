"""Membership equational logic: normalization, conditions, least sorts, properties."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Union

from . import prelude
from .errors import AdmissibilityError, NonTermination, PropertyError, SortAmbiguity
from .signature import Kind, KindRef, PropDecl, Signature, Sort
from .printer import term_str
from .terms import (AcApply, Apply, InstantiationError, IntLit, Term, UnsupportedPattern,
                    Var, make, match, mk_app, substitute, vars_of)

DEFAULT_STEP_BUDGET = 100_000


@dataclass(frozen=True)
class Equality:
    left: Term
    right: Term


@dataclass(frozen=True)
class Matching:
    pattern: Term
    target: Term


@dataclass(frozen=True)
class SortTest:
    subject: Term
    sort: object


@dataclass(frozen=True)
class BoolCond:
    """Shorthand condition ``t``, meaning ``t = true``."""

    term: Term


Condition = Union[Equality, Matching, SortTest, BoolCond]


@dataclass
class Equation:
    lhs: Term
    rhs: Term
    conditions: tuple = ()
    owise: bool = False
    span: object = None

    def describe(self) -> str:
        return f"equation for {self.lhs!r}"


@dataclass
class Membership:
    subject: Term
    sort: object
    conditions: tuple = ()
    span: object = None

    def describe(self) -> str:
        return f"membership {self.subject!r} : {self.sort}"


class _Undefined:
    """Value of a property at a stage where it is not defined."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "UNDEFINED"

    def __bool__(self) -> bool:
        return False


UNDEFINED = _Undefined()

Enumerator = Callable[[Var], Optional[list]]


def condition_terms(c: Condition) -> tuple:
    if isinstance(c, Equality):
        return (c.left, c.right)
    if isinstance(c, Matching):
        return (c.pattern, c.target)
    if isinstance(c, SortTest):
        return (c.subject,)
    return (c.term,)


def make_signature(sorts, subsorts, decls, props=None) -> Signature:
    """Signature over ``sorts`` with the prelude added."""
    sig = Signature(list(prelude.SORTS) + [s for s in sorts if s not in prelude.SORTS],
                    list(subsorts), int_sort=prelude.INT)
    for d in prelude.DECLS:
        sig.add_decl(d)
    for d in decls:
        if d not in _PRELUDE_DECLS:
            sig.add_decl(d)
    for sym, pd in (props or {}).items():
        sig.props[sym] = pd
    return sig


def user_decls(sig: Signature) -> list:
    return [d for ds in sig.decls.values() for d in ds if d not in _PRELUDE_DECLS]


_PRELUDE_DECLS = set(prelude.DECLS)


class MelModule:
    """A signature with equations and membership axioms, plus an evaluator.

    The module doubles as the matching oracle handed to the term kernel.
    """

    def __init__(self, name: str, signature: Signature, equations=(), memberships=(),
                 ns: str | None = None, step_budget: int = DEFAULT_STEP_BUDGET):
        self.name = name
        self.ns = name if ns is None else ns
        self.signature = signature
        self.equations = list(equations)
        self.memberships = list(memberships)
        self.step_budget = step_budget
        self._reindex()

    def _reindex(self) -> None:
        self._eqs: dict = {}
        for eq in self.equations:
            if type(eq.lhs) not in (Apply, AcApply):
                raise UnsupportedPattern(f"equation lhs must be an application: {eq.lhs!r}")
            reg, ow = self._eqs.setdefault(eq.lhs.sym, ([], []))
            (ow if eq.owise else reg).append(eq)
        self._mbs: dict = {}
        for mb in self.memberships:
            self._mbs.setdefault(mb.subject.sym, []).append(mb)
        self._nf_cache: dict = {}
        self._ls_cache: dict = {}
        self._coll_cache: dict = {}
        self._finite: dict = {}
        self._steps = 0
        self._depth = 0

    # -- oracle for the kernel matcher --------------------------------------

    def sort_ok(self, t: Term, sort) -> bool:
        return self.signature.leq(self.sort_of_normal(t), sort)

    def is_collector(self, var: Var, sym) -> bool:
        key = (var.sort, sym)
        r = self._coll_cache.get(key)
        if r is None:
            if not isinstance(var.sort, Sort):
                r = True
            else:
                r = any(isinstance(d.result, Sort) and self.signature.leq(d.result, var.sort)
                        for d in self.signature.decls.get(sym, ()))
            self._coll_cache[key] = r
        return r

    # -- normalization --------------------------------------------------------

    def normalize(self, t: Term) -> Term:
        try:
            return self._nf(t)
        except RecursionError:
            self._depth = 0
            raise NonTermination(f"normalization of {t!r} recursed too deeply") from None

    def _nf(self, t: Term) -> Term:
        cache = self._nf_cache
        r = cache.get(t)
        if r is not None:
            return r
        tp = type(t)
        if tp is Var or tp is IntLit:
            return t
        if self._depth == 0:
            self._steps = 0
        self._depth += 1
        try:
            return self._nf_compute(t)
        finally:
            self._depth -= 1

    def _nf_compute(self, t: Term) -> Term:
        cache = self._nf_cache
        u = self._nf_args(t)
        while True:
            v = self._rewrite_root(u)
            if v is None:
                break
            self._steps += 1
            if self._steps > self.step_budget:
                raise NonTermination(
                    f"rewrite-step budget of {self.step_budget} exceeded normalizing {t!r}")
            if type(v) is Var or type(v) is IntLit:
                u = v
                break
            hit = cache.get(v)
            if hit is not None:
                u = hit
                break
            u = self._nf_args(v)
        cache[t] = u
        cache[u] = u
        return u

    def _nf_args(self, t: Term) -> Term:
        args = t.args
        if not args:
            return t
        nargs = [self._nf(a) for a in args]
        for a, b in zip(args, nargs):
            if a is not b:
                u = make(t.sym, nargs)
                if type(u) is Apply or type(u) is AcApply:
                    return u
                return self._nf(u)
        return t

    def _rewrite_root(self, u: Term):
        if type(u) is not Apply and type(u) is not AcApply:
            return None
        sym = u.sym
        fn = sym.builtin
        if fn is not None:
            r = fn(u, self)
            if r is not None and r is not u:
                return r
        eqs = self._eqs.get(sym)
        if eqs is None:
            return None
        regular, owise = eqs
        for eq in regular:
            r = self._try_equation(eq, u)
            if r is not None:
                return r
        # owise is only decidable on ground subjects
        if owise and u.ground:
            for eq in owise:
                r = self._try_equation(eq, u)
                if r is not None:
                    return r
        return None

    def _try_equation(self, eq: Equation, u: Term):
        for theta in match(eq.lhs, u, self):
            for th in self._solve(eq.conditions, 0, theta, None, eq):
                try:
                    return substitute(eq.rhs, th, strict=True)
                except InstantiationError as e:
                    raise AdmissibilityError(
                        f"variable {e} of the rhs is unbound in {eq.describe()}", eq.span) from None
        return None

    # -- conditions -----------------------------------------------------------

    def solve_conditions(self, conditions, subst=None, enum: Enumerator | None = None,
                         ctx=None) -> Iterator[dict]:
        """Every extension of ``subst`` satisfying all conditions, left to right."""
        yield from self._solve(tuple(conditions), 0, dict(subst or {}), enum, ctx)

    def _solve(self, conds, i, theta, enum, ctx):
        if i == len(conds):
            yield theta
            return
        c = conds[i]
        tc = type(c)
        if tc is Matching:
            free = _unbound(c.target, theta)
            if free:
                yield from self._branch(free, conds, i, theta, enum, ctx)
                return
            tgt = self._nf(substitute(c.target, theta))
            for th in match(c.pattern, tgt, self, theta):
                yield from self._solve(conds, i + 1, th, enum, ctx)
            return
        if tc is SortTest:
            free = _unbound(c.subject, theta)
            if free:
                yield from self._branch(free, conds, i, theta, enum, ctx)
                return
            s = self.sort_of_normal(self._nf(substitute(c.subject, theta)))
            if self.signature.leq(s, c.sort):
                yield from self._solve(conds, i + 1, theta, enum, ctx)
            return
        if tc is BoolCond:
            left, right = c.term, prelude.TRUE
        else:
            left, right = c.left, c.right
        fl = _unbound(left, theta)
        fr = _unbound(right, theta)
        if not fl and not fr:
            a = self._nf(substitute(left, theta))
            b = self._nf(substitute(right, theta))
            if a is b:
                yield from self._solve(conds, i + 1, theta, enum, ctx)
            return
        # an equation ``X = t`` with X unbound binds X to the normal form of t
        for var, other, fo in ((left, right, fr), (right, left, fl)):
            if type(var) is Var and var not in theta and not fo:
                val = self._nf(substitute(other, theta))
                if self.sort_ok(val, var.sort):
                    th = dict(theta)
                    th[var] = val
                    yield from self._solve(conds, i + 1, th, enum, ctx)
                return
        yield from self._branch(fl + [v for v in fr if v not in fl], conds, i, theta, enum, ctx)

    def _branch(self, free, conds, i, theta, enum, ctx):
        """Enumerate an unbound variable's finite domain, or fail admissibility."""
        if enum is not None:
            for v in free:
                values = enum(v)
                if values is None:
                    continue
                for val in values:
                    if self.sort_ok(val, v.sort):
                        th = dict(theta)
                        th[v] = val
                        yield from self._solve(conds, i, th, enum, ctx)
                return
        where = ctx.describe() if ctx is not None and hasattr(ctx, "describe") else "a condition"
        raise AdmissibilityError(
            f"variable {free[0].name} is unbound when condition {i + 1} of {where} is evaluated",
            getattr(ctx, "span", None))

    # -- finite domains ---------------------------------------------------------

    def finite_values(self, sort):
        """All values of an enumerated sort: one whose sort-level declarations
        are constants only.  None for Int or any sort with a proper constructor."""
        if not isinstance(sort, Sort):
            return None
        r = self._finite.get(sort, False)
        if r is not False:
            return r
        sig = self.signature
        below = set(sig.subsorts_of(sort))
        vals = None
        if prelude.INT not in below:
            vals = []
            for sym, decls in sig.decls.items():
                if sym.ns == "" and sym.builtin is not None:
                    continue
                for d in decls:
                    if isinstance(d.result, Sort) and d.result in below:
                        if d.args or sym.role == "prop":
                            vals = None
                            break
                        vals.append(mk_app(sym, ()))
                if vals is None:
                    break
            if vals is not None:
                out = {}
                for v in vals:
                    v = self.normalize(v)
                    if self.sort_ok(v, sort):
                        out[v] = None
                vals = sorted(out)
        self._finite[sort] = vals
        return vals

    def _enum(self, domains):
        def enum(v: Var):
            if domains:
                d = domains.get(v.sort)
                if d is None and isinstance(v.sort, Sort):
                    d = domains.get(v.sort.name)
                if d is not None:
                    return d
            return self.finite_values(v.sort)
        return enum

    def _complete(self, target, theta, enum, rule):
        free = [v for v in vars_of(target) if v not in theta]
        if not free:
            yield theta
            return
        domains = []
        for v in free:
            vals = enum(v)
            if vals is None:
                raise AdmissibilityError(
                    f"variable {v.name} of {term_str(target)} is unbound in {rule.describe()}",
                    rule.span)
            domains.append([x for x in vals if self.sort_ok(x, v.sort)])
        for combo in itertools.product(*domains):
            th = dict(theta)
            th.update(zip(free, combo))
            yield th

    # -- sorts ----------------------------------------------------------------

    def least_sort(self, t: Term):
        return self.sort_of_normal(self.normalize(t))

    def sort_of_normal(self, t: Term):
        r = self._ls_cache.get(t)
        if r is not None:
            return r
        sig = self.signature
        tp = type(t)
        if tp is IntLit:
            return prelude.INT
        if tp is Var:
            return sig.kind_of(t.sort) if isinstance(t.sort, KindRef) else t.sort
        base = sig.least_sort_syntactic(t, child=self.sort_of_normal)
        mbs = self._mbs.get(t.sym)
        if not mbs:
            self._ls_cache[t] = base
            return base
        derived = [base]
        self._ls_cache[t] = base
        changed = True
        while changed:
            changed = False
            for mb in mbs:
                if any(isinstance(d, Sort) and sig.leq(d, mb.sort) for d in derived):
                    continue
                if self._membership_holds(mb, t):
                    derived.append(mb.sort)
                    changed = True
            sorts = [d for d in derived if isinstance(d, Sort)]
            if sorts:
                mins = sig.minimal(sorts)
                if len(mins) > 1:
                    raise SortAmbiguity(
                        f"incomparable sorts {', '.join(map(str, mins))} for {t!r}")
                self._ls_cache[t] = mins[0]
        return self._ls_cache[t]

    def _membership_holds(self, mb: Membership, t: Term) -> bool:
        for theta in match(mb.subject, t, self):
            for _ in self._solve(mb.conditions, 0, theta, None, mb):
                return True
        return False

    # -- properties -----------------------------------------------------------

    def prop_decl(self, sym) -> PropDecl:
        return self.signature.props[sym]

    def eval_property(self, sym, stage: Term):
        """Normal form of ``sym @ stage``, or UNDEFINED when it has no sort."""
        pd = self.signature.props[sym]
        v = self.normalize(make(sym, [stage]))
        s = self.sort_of_normal(v)
        if isinstance(s, Kind):
            return UNDEFINED
        sig = self.signature
        if sig.leq(s, pd.codomain):
            return v
        if sig.kind_of(s) == sig.kind_of(pd.codomain):
            return UNDEFINED
        raise PropertyError(
            f"property {sym.qname} yields {v!r} of sort {s}, outside the kind of {pd.codomain}")

    def properties(self) -> dict:
        return dict(self.signature.props)


def _unbound(t: Term, theta: dict) -> list:
    if t.ground:
        return []
    return [v for v in vars_of(t) if v not in theta]


def normalize(term: Term, module: MelModule) -> Term:
    return module.normalize(term)


def solve_conditions(conditions, substitution, module: MelModule, enum=None):
    return list(module.solve_conditions(conditions, substitution, enum))


def least_sort(term: Term, module: MelModule):
    return module.least_sort(term)


def eval_property(prop, stage: Term, module: MelModule):
    return module.eval_property(prop, stage)


def check_collectors(t: Term, module: MelModule) -> None:
    """Raise UnsupportedPattern when an AC node of ``t`` has two collectors."""
    if t.ground:
        return
    if type(t) is AcApply:
        n = sum(1 for a in t.args if type(a) is Var and module.is_collector(a, t.sym))
        if n > 1:
            raise UnsupportedPattern(
                f"pattern under {t.sym.name} has {n} collector variables; at most one is supported")
    if type(t) in (Apply, AcApply):
        for a in t.args:
            check_collectors(a, module)


__all__ = ["Equality", "Matching", "SortTest", "BoolCond", "Condition", "Equation", "Membership",
           "UNDEFINED", "MelModule", "make_signature", "normalize", "solve_conditions",
           "least_sort", "eval_property", "check_collectors", "condition_terms", "user_decls"]
