"""Order-sorted signatures: sorts, kinds, operator declarations, least sorts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

from .errors import DeclarationError, IllFormedTerm, SortAmbiguity, SubsortCycle
from .terms import AcApply, IntLit, Symbol, Term, Var


@dataclass(frozen=True)
class Sort:
    name: str
    ns: str = ""

    @property
    def qname(self) -> str:
        return f"{self.ns}.{self.name}" if self.ns else self.name

    def __str__(self) -> str:
        return self.qname

    def __repr__(self) -> str:
        return f"Sort({self.qname})"


@dataclass(frozen=True)
class Kind:
    """A connected component of the subsort graph."""

    sorts: frozenset
    top: tuple = ()  # maximal sorts, for display

    def __str__(self) -> str:
        return "[" + ",".join(s.qname for s in self.top) + "]"

    __repr__ = __str__


@dataclass(frozen=True)
class KindRef:
    """The kind of ``sort``, written ``[sort]``; resolved per signature."""

    sort: Sort

    def __str__(self) -> str:
        return f"[{self.sort.qname}]"

    __repr__ = __str__


class _Any:
    """Argument position of a polymorphic built-in; accepts any kind."""

    def __str__(self) -> str:
        return "[Universal]"

    __repr__ = __str__


ANY = _Any()

SortLike = Union[Sort, Kind, KindRef, _Any]


@dataclass(frozen=True)
class OpDecl:
    sym: Symbol
    args: tuple
    result: SortLike
    ctor: bool = False


@dataclass
class PropDecl:
    sym: Symbol
    codomain: Sort
    total: bool = False

    @property
    def name(self) -> str:
        return self.sym.name


def kind_complete(sorts: Iterable[Sort], pairs: Iterable[tuple[Sort, Sort]]):
    """Kinds as weakly connected components plus the reflexive-transitive ``<=``.

    Returns ``(supers, kinds)`` where ``supers[s]`` is the set of sorts above
    or equal to ``s`` and ``kinds[s]`` is the kind of ``s``.
    """
    sorts = list(dict.fromkeys(sorts))
    known = set(sorts)
    up: dict[Sort, set] = {s: set() for s in sorts}
    parent = {s: s for s in sorts}

    def find(s):
        while parent[s] is not s:
            parent[s] = parent[parent[s]]
            s = parent[s]
        return s

    for a, b in pairs:
        for s in (a, b):
            if s not in known:
                raise DeclarationError(f"subsort declaration mentions undeclared sort {s}")
        up[a].add(b)
        ra, rb = find(a), find(b)
        if ra is not rb:
            parent[ra] = rb
    supers: dict[Sort, frozenset] = {}
    for s in sorts:
        seen = {s}
        stack = [s]
        while stack:
            for b in up[stack.pop()]:
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
        supers[s] = frozenset(seen)
    for s in sorts:
        for b in supers[s]:
            if b != s and s in supers[b]:
                raise SubsortCycle(f"subsort cycle between {s} and {b}")
    groups: dict[Sort, list] = {}
    for s in sorts:
        groups.setdefault(find(s), []).append(s)
    kinds: dict[Sort, Kind] = {}
    for members in groups.values():
        mset = frozenset(members)
        top = tuple(m for m in members if supers[m] == {m})
        k = Kind(mset, top)
        for m in members:
            kinds[m] = k
    return supers, kinds


@dataclass
class Signature:
    sorts: list
    subsorts: list
    decls: dict = field(default_factory=dict)  # Symbol -> list[OpDecl]
    props: dict = field(default_factory=dict)  # Symbol -> PropDecl
    int_sort: Sort | None = None

    def __post_init__(self):
        self.sorts = list(dict.fromkeys(self.sorts))
        self._supers, self._kinds = kind_complete(self.sorts, self.subsorts)
        self._ls_cache: dict = {}

    # -- sort order ---------------------------------------------------------

    def kind_of(self, s: SortLike) -> Kind:
        if isinstance(s, Sort):
            try:
                return self._kinds[s]
            except KeyError:
                raise DeclarationError(f"unknown sort {s}") from None
        if isinstance(s, KindRef):
            return self.kind_of(s.sort)
        return s

    def leq(self, a: SortLike, b: SortLike) -> bool:
        if b is ANY:
            return True
        if isinstance(b, KindRef):
            return a is not ANY and self.kind_of(a) == self.kind_of(b)
        if isinstance(a, KindRef):
            a = self.kind_of(a)
        if isinstance(a, Sort):
            if isinstance(b, Sort):
                sup = self._supers.get(a)
                return sup is not None and b in sup
            return self._kinds.get(a) == b
        if isinstance(a, Kind):
            return isinstance(b, Kind) and a == b
        return False

    def has_sort(self, s: Sort) -> bool:
        return s in self._supers

    def subsorts_of(self, s: Sort) -> list:
        return [x for x in self.sorts if s in self._supers[x]]

    def minimal(self, sorts: Iterable[Sort]) -> list:
        ss = list(dict.fromkeys(sorts))
        return [s for s in ss if not any(t != s and self.leq(t, s) for t in ss)]

    # -- declarations -------------------------------------------------------

    def add_decl(self, decl: OpDecl) -> None:
        self.decls.setdefault(decl.sym, []).append(decl)

    def symbols(self) -> list:
        return list(self.decls)

    def least_sort_syntactic(self, t: Term, child=None) -> SortLike:
        """Least sort from declarations alone, or the kind when only the
        kind-level overload applies.  ``child`` computes argument sorts
        (defaults to this function; the MEL engine passes a membership-aware
        version)."""
        if child is None:
            cached = self._ls_cache.get(t)
            if cached is not None:
                return cached
            res = self._ls(t, self.least_sort_syntactic)
            self._ls_cache[t] = res
            return res
        return self._ls(t, child)

    def _ls(self, t: Term, child) -> SortLike:
        tp = type(t)
        if tp is IntLit:
            if self.int_sort is None:
                raise IllFormedTerm("integer literal without Int in scope")
            return self.int_sort
        if tp is Var:
            return self.kind_of(t.sort) if isinstance(t.sort, KindRef) else t.sort
        decls = self.decls.get(t.sym)
        if not decls:
            raise IllFormedTerm(f"no declaration for {t.sym.qname}")
        if tp is AcApply:
            acc = child(t.args[0])
            for a in t.args[1:]:
                acc = self._apply_decls(t.sym, decls, (acc, child(a)))
            return acc
        return self._apply_decls(t.sym, decls, tuple(child(a) for a in t.args))

    def _apply_decls(self, sym: Symbol, decls, arg_sorts) -> SortLike:
        results = []
        for d in decls:
            if not isinstance(d.result, Sort):
                continue
            if all(self._arg_fits(a, p) for a, p in zip(arg_sorts, d.args)):
                results.append(d.result)
        if results:
            mins = self.minimal(results)
            if len(mins) > 1:
                raise SortAmbiguity(
                    f"{sym.qname} has incomparable result sorts {', '.join(map(str, mins))}")
            return mins[0]
        for d in decls:
            if all(p is ANY or self.kind_of(a) == self.kind_of(p) for a, p in zip(arg_sorts, d.args)):
                return self.kind_of(d.result)
        raise IllFormedTerm(
            f"{sym.qname} applied to arguments of sorts {', '.join(map(str, arg_sorts))}")

    def _arg_fits(self, actual: SortLike, declared: SortLike) -> bool:
        if declared is ANY:
            return True
        if not isinstance(declared, Sort):
            return False
        return isinstance(actual, Sort) and self.leq(actual, declared)

    def kind_of_term(self, t: Term) -> Kind:
        return self.kind_of(self.least_sort_syntactic(t))
