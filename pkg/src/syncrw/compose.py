"""Synchronous composition of egalitarian systems under property-equality criteria."""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Union

from . import prelude
from .egrw import AtomicModule
from .errors import InitError, ResolutionError
from .mel import UNDEFINED, MelModule, make_signature, user_decls
from .printer import term_str
from .signature import KindRef, OpDecl, Sort
from .terms import Apply, Symbol, Term, mk_app


@dataclass(frozen=True)
class PropRef:
    """A property named through a path of component names."""

    path: tuple
    name: str

    @classmethod
    def parse(cls, text: str) -> "PropRef":
        parts = text.split(".")
        return cls(tuple(parts[:-1]), parts[-1])

    def __str__(self) -> str:
        return ".".join(self.path + (self.name,))


@dataclass(frozen=True)
class SyncCriterion:
    left: PropRef
    right: PropRef
    span: object = field(default=None, compare=False)

    def flipped(self) -> "SyncCriterion":
        return SyncCriterion(self.right, self.left, self.span)

    def __str__(self) -> str:
        return f"{self.left} = {self.right}"


@dataclass(frozen=True)
class Endpoint:
    """A resolved criterion side: where the part sits and who owns the property."""

    index: tuple  # positions through nested tuples
    owner: object
    sym: Symbol

    def value(self, stage: Term):
        return evaluate_at(self.owner, self.sym, project(stage, self.index))


def project(stage: Term, index: tuple) -> Term:
    for i in index:
        stage = stage.args[i]
    return stage


def evaluate_at(owner, sym, part):
    if isinstance(owner, AtomicModule):
        return owner.eval_property(sym, part)
    return owner.glue.eval_property(sym, part)


System = Union[AtomicModule, "ComposedSystem"]


# shared per shape so that regroupings of the same composition build identical terms
@functools.lru_cache(maxsize=None)
def tuple_symbol(n: int, ns: str) -> Symbol:
    parts = ["<"]
    for i in range(n):
        parts += [None, ","] if i < n - 1 else [None]
    parts.append(">")
    return Symbol("<" + ",".join("_" * n) + ">", n, ns, prec=0, parts=parts, role="tuple")


@functools.lru_cache(maxsize=None)
def _projection(name: str, ns: str, tup: Symbol, index: int) -> Symbol:
    sym = Symbol(name, 1, ns, prec=0, parts=[name, "(", None, ")"], role="proj")

    def fn(t, eng):
        (a,) = t.args
        if type(a) is Apply and a.sym is tup:
            return a.args[index]
        return None

    sym.builtin = fn
    return sym


class ComposedSystem:
    """A composition node: ordered components, criteria and exported properties.

    ``exported`` maps property names to PropDecls whose symbols live in this
    system's namespace; ``equations`` define them through projections.
    """

    def __init__(self, name, components, criteria=(), exported=None, equations=(),
                 memberships=(), init: Term | None = None, ns: str | None = None,
                 extra_sorts=(), extra_subsorts=(), extra_decls=()):
        self.name = name
        self.ns = name if ns is None else ns
        self.components = list(components)
        names = [c for c, _ in self.components]
        if len(set(names)) != len(names):
            raise ResolutionError(f"duplicate component names in {name}")
        if not self.components:
            raise ResolutionError(f"{name} has no components")
        self.criteria = list(criteria)
        self.exported = dict(exported or {})
        self._init = init
        self.own_equations = list(equations)
        self.own_memberships = list(memberships)
        n = len(self.components)
        self.stage = Sort("Stage", self.ns)
        self.tuple_sym = tuple_symbol(n, self.ns)
        self.projections = {c: _projection(c, self.ns, self.tuple_sym, i)
                            for i, (c, _) in enumerate(self.components)}
        self.glue = self._build_glue(equations, memberships, extra_sorts, extra_subsorts,
                                     extra_decls)
        self._resolved = [(self._resolve_ref(c.left), self._resolve_ref(c.right), c)
                          for c in self.criteria]
        for left, right, crit in self._resolved:
            _check_codomains(left, right, crit)
        self._atoms = list(_atoms(self, ()))
        self._plan = self._criteria_plan()
        self._succ: dict = {}

    # -- glue module ------------------------------------------------------------

    def _build_glue(self, equations, memberships, extra_sorts, extra_subsorts, extra_decls):
        sorts, subsorts, decls, props, eqs, mbs = [], [], [], {}, [], []
        for _, sub in self.components:
            mod = sub if isinstance(sub, AtomicModule) else sub.glue
            sig = mod.signature
            sorts += sig.sorts
            subsorts += sig.subsorts
            decls += user_decls(sig)
            props.update(sig.props)
            eqs += mod.equations
            mbs += mod.memberships
        sorts += [self.stage, *extra_sorts]
        subsorts += list(extra_subsorts)
        comp_stages = [_stage_sort(sub) for _, sub in self.components]
        decls.append(OpDecl(self.tuple_sym, tuple(comp_stages), self.stage, ctor=True))
        for (c, _), s in zip(self.components, comp_stages):
            decls.append(OpDecl(self.projections[c], (self.stage,), s))
        for pd in self.exported.values():
            decls.append(OpDecl(pd.sym, (self.stage,), _kind_of_codomain(pd.codomain)))
            props[pd.sym] = pd
        decls += list(extra_decls)
        sig = make_signature(sorts, list(dict.fromkeys(subsorts)), decls, props)
        return MelModule(self.name, sig, eqs + list(equations), mbs + list(memberships),
                         ns=self.ns)

    # -- name resolution --------------------------------------------------------

    def component(self, name: str) -> System:
        for c, sub in self.components:
            if c == name:
                return sub
        raise ResolutionError(f"{self.name} has no component {name}")

    def component_index(self, name: str) -> int:
        for i, (c, _) in enumerate(self.components):
            if c == name:
                return i
        raise ResolutionError(f"{self.name} has no component {name}")

    def _resolve_ref(self, ref: PropRef) -> Endpoint:
        return resolve_prop(self, ref)

    def prop_names(self) -> list:
        return prop_names(self)

    # -- stages -----------------------------------------------------------------

    @property
    def init(self) -> Term:
        return init_stage(self)

    def atoms(self) -> list:
        """``(index path, AtomicModule)`` for every leaf, left to right."""
        return list(self._atoms)

    def build(self, parts) -> Term:
        """Nested stage from a flat list of atom stages."""
        it = iter(parts)
        return _build(self, it)

    def flatten(self, stage: Term) -> list:
        return [project(stage, p) for p, _ in self._atoms]

    def _criteria_plan(self):
        """Criteria of every level, grouped by the last atom each depends on."""
        plan: dict = {}
        atom_pos = {p: i for i, (p, _) in enumerate(self._atoms)}
        for node_index, node in _nodes(self, ()):
            for left, right, crit in node._resolved:
                deps = []
                for ep in (left, right):
                    full = node_index + ep.index
                    deps += [atom_pos[p] for p in atom_pos if p[:len(full)] == full]
                plan.setdefault(max(deps), []).append((node_index + left.index, left,
                                                       node_index + right.index, right, crit))
        return plan

    def compatible(self, stage: Term) -> bool:
        return self.violated_criterion(stage) is None

    def violated_criterion(self, stage: Term):
        for group in self._plan.values():
            for li, left, ri, right, crit in group:
                if not _agrees(left, project(stage, li), right, project(stage, ri)):
                    return crit
        return None

    def successors(self, stage: Term) -> list:
        hit = self._succ.get(stage)
        if hit is not None:
            return hit
        parts = self.flatten(stage)
        options = []
        for (_, mod), part in zip(self._atoms, parts):
            options.append([part] + [s for s in mod.half_successors(part) if s is not part])
        out: dict = {}
        chosen = [None] * len(parts)
        self._extend(0, options, parts, chosen, False, out)
        res = sorted(out)
        self._succ[stage] = res
        return res

    def _extend(self, k, options, parts, chosen, moved, out) -> None:
        if k == len(parts):
            if moved:
                out[self.build(chosen)] = None
            return
        for v in options[k]:
            chosen[k] = v
            if self._check_upto(k, chosen):
                self._extend(k + 1, options, parts, chosen, moved or v is not parts[k], out)
        chosen[k] = None

    def _check_upto(self, k, chosen) -> bool:
        group = self._plan.get(k)
        if not group:
            return True
        for li, left, ri, right, _ in group:
            if not _agrees(left, self._partial(li, chosen), right, self._partial(ri, chosen)):
                return False
        return True

    def _partial(self, index, chosen) -> Term:
        node, at = self, 0
        # walk down to the addressed subtree, counting atoms skipped on the way
        for i in index:
            if not isinstance(node, ComposedSystem):
                break
            for j in range(i):
                at += _count_atoms(node.components[j][1])
            node = node.components[i][1]
        if isinstance(node, AtomicModule):
            return chosen[at]
        n = _count_atoms(node)
        return node.build(chosen[at:at + n])

    def node_kind(self, stage: Term) -> str:
        kinds = {mod.stage_class(p) for (_, mod), p in zip(self._atoms, self.flatten(stage))}
        if kinds == {"State"}:
            return "State"
        if kinds == {"Trans"}:
            return "Trans"
        return "Stage"

    def render(self, stage: Term) -> str:
        return render_flat([term_str(p) for p in self.flatten(stage)])

    def prop_value(self, name: str, stage: Term):
        return eval_composed_property(name, stage, self)

    def __repr__(self) -> str:
        return f"ComposedSystem({self.name})"


def render_flat(parts) -> str:
    return "< " + ", ".join(parts) + " >"


def _stage_sort(sub) -> Sort:
    return sub.stage


def _kind_of_codomain(codomain):
    return KindRef(codomain)


def _agrees(left: Endpoint, lpart, right: Endpoint, rpart) -> bool:
    a = evaluate_at(left.owner, left.sym, lpart)
    if a is UNDEFINED:
        return True
    b = evaluate_at(right.owner, right.sym, rpart)
    return b is UNDEFINED or a is b


def _atoms(system, prefix):
    if isinstance(system, AtomicModule):
        yield prefix, system
        return
    for i, (_, sub) in enumerate(system.components):
        yield from _atoms(sub, prefix + (i,))


def _nodes(system, prefix):
    if isinstance(system, ComposedSystem):
        yield prefix, system
        for i, (_, sub) in enumerate(system.components):
            yield from _nodes(sub, prefix + (i,))


def _count_atoms(system) -> int:
    if isinstance(system, AtomicModule):
        return 1
    return len(system._atoms)


def _build(system, it) -> Term:
    if isinstance(system, AtomicModule):
        return next(it)
    return mk_app(system.tuple_sym, [_build(sub, it) for _, sub in system.components])


def _check_codomains(left: Endpoint, right: Endpoint, crit: SyncCriterion) -> None:
    cl = _codomain(left)
    cr = _codomain(right)
    for c, ep in ((cl, crit.left), (cr, crit.right)):
        if c.ns != "":
            raise ResolutionError(
                f"criterion {crit}: property {ep} has codomain {c}, outside the built-in sorts",
                crit.span, code="E-CRITERION-SORT")
    if c_kind(cl) != c_kind(cr):
        raise ResolutionError(
            f"criterion {crit}: codomains {cl} and {cr} are in different kinds", crit.span,
            code="E-CRITERION-KIND")


def c_kind(s: Sort):
    return "Int" if s == prelude.INT else "Bool" if s == prelude.BOOL else s.qname


def _codomain(ep: Endpoint) -> Sort:
    owner = ep.owner
    props = owner.signature.props if isinstance(owner, AtomicModule) else owner.glue.signature.props
    return props[ep.sym].codomain


# -- resolution ---------------------------------------------------------------


def resolve_prop(system: System, ref: PropRef) -> Endpoint:
    """Resolve ``ref`` relative to ``system``.

    The path selects a subcomponent; at its end the name is looked up among
    that system's own properties, then, if unambiguous, among inherited ones.
    """
    node, index = system, ()
    for c in ref.path:
        if isinstance(node, AtomicModule):
            if c == node.name and index == () and node is system:
                continue
            raise ResolutionError(f"{node.name} has no component {c}", code="E-UNKNOWN-PROPERTY")
        try:
            i = node.component_index(c)
        except ResolutionError:
            if c == node.name and index == () and node is system:
                continue
            hits = list(_descendants(node, c, ()))
            if len(hits) != 1:
                what = "ambiguous" if hits else "unknown"
                raise ResolutionError(f"{what} component {c} in property {ref}",
                                      code="E-UNKNOWN-PROPERTY") from None
            sub_index, node = hits[0]
            index += sub_index
            continue
        index += (i,)
        node = node.components[i][1]
    found = _own_prop(node, ref.name)
    if found is not None:
        return Endpoint(index, node, found)
    hits = list(_inherited(node, ref.name, index))
    if len(hits) == 1:
        return hits[0]
    if not hits:
        raise ResolutionError(f"unknown property {ref}", code="E-UNKNOWN-PROPERTY")
    where = ", ".join(".".join(_path_names(system, h.index)) for h in hits)
    raise ResolutionError(f"property {ref} is ambiguous; it exists in {where}",
                          code="E-AMBIGUOUS-PROPERTY")


def _descendants(node, name, index):
    """Components named ``name`` strictly below ``node``, at any depth."""
    if isinstance(node, AtomicModule):
        return
    for i, (c, sub) in enumerate(node.components):
        if c == name:
            yield index + (i,), sub
        else:
            yield from _descendants(sub, name, index + (i,))


def _path_names(system, index) -> list:
    names = []
    node = system
    for i in index:
        names.append(node.components[i][0])
        node = node.components[i][1]
    return names


def _own_prop(node, name):
    if isinstance(node, AtomicModule):
        pd = node.own_props().get(name)
        return None if pd is None else pd.sym
    pd = node.exported.get(name)
    return None if pd is None else pd.sym


def _inherited(node, name, index):
    if isinstance(node, AtomicModule):
        return
    for i, (_, sub) in enumerate(node.components):
        sym = _own_prop(sub, name)
        if sym is not None:
            yield Endpoint(index + (i,), sub, sym)
        else:
            yield from _inherited(sub, name, index + (i,))


def prop_names(system: System) -> list:
    """Qualified names of every property visible at ``system``."""
    if isinstance(system, AtomicModule):
        return list(system.own_props())
    out = list(system.exported)
    for c, sub in system.components:
        out += [f"{c}.{n}" for n in prop_names(sub)]
    return out


# -- algebra ------------------------------------------------------------------


def atomic_components(system: System) -> list:
    if isinstance(system, AtomicModule):
        return [system]
    out = []
    for _, sub in system.components:
        for m in atomic_components(sub):
            if all(m is not x for x in out):
                out.append(m)
    return out


def criteria_set(system: System) -> frozenset:
    """Unordered pairs of property symbols over all composition levels."""
    if isinstance(system, AtomicModule):
        return frozenset()
    out = set()
    for left, right, _ in system._resolved:
        out.add(frozenset((left.sym, right.sym)))
    for _, sub in system.components:
        out |= criteria_set(sub)
    return frozenset(out)


def equivalent(a: System, b: System) -> bool:
    ida = {id(m) for m in atomic_components(a)}
    idb = {id(m) for m in atomic_components(b)}
    return ida == idb and criteria_set(a) == criteria_set(b)


def compatible(stage: Term, system: "ComposedSystem") -> bool:
    return system.compatible(stage)


def composed_successors(stage: Term, system: "ComposedSystem") -> list:
    return system.successors(stage)


def init_stage(system: "ComposedSystem") -> Term:
    if system._init is not None:
        stage = system.glue.normalize(system._init)
    else:
        parts = []
        for path, mod in system._atoms:
            init = mod.init
            if init is None:
                raise InitError(f"component {mod.name} declares no init")
            parts.append(init)
        stage = system.build(parts)
    crit = system.violated_criterion(stage)
    if crit is not None:
        raise InitError(f"initial stage {system.render(stage)} violates criterion {crit}")
    return stage


def eval_composed_property(name, stage: Term, system: System):
    ref = name if isinstance(name, PropRef) else PropRef.parse(name)
    ep = resolve_prop(system, ref)
    return ep.value(stage)


def with_init(system: "ComposedSystem", init: Term) -> "ComposedSystem":
    """Same composition starting from ``init``."""
    return ComposedSystem(system.name, system.components, system.criteria, system.exported,
                          system.own_equations, system.own_memberships, init, system.ns)


def with_criteria(system: "ComposedSystem", criteria) -> "ComposedSystem":
    """Same composition under another criteria list."""
    return ComposedSystem(system.name, system.components, list(criteria), system.exported,
                          system.own_equations, system.own_memberships, system._init, system.ns)


__all__ = ["PropRef", "SyncCriterion", "Endpoint", "ComposedSystem", "atomic_components",
           "criteria_set", "equivalent", "compatible", "composed_successors", "init_stage",
           "eval_composed_property", "resolve_prop", "prop_names", "project", "evaluate_at",
           "tuple_symbol", "render_flat", "with_init", "with_criteria"]
