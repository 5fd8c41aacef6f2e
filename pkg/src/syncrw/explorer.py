"""Bounded breadth-first exploration, invariants, search and graph export.

Works uniformly on atomic, composed and plain systems through SystemView.
Nodes are numbered level by level, each level in canonical term order, so
identical inputs give identical graphs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .compose import ComposedSystem, project, resolve_prop, PropRef, prop_names as _cprops
from .egrw import AtomicModule
from .errors import SyncrwError
from .formula import Evaluator, FormulaError, Matches, parse_formula
from .mel import UNDEFINED
from .printer import term_str
from .split import PlainModule, lookup_prop
from .terms import Term

DEFAULT_MAX_NODES = 100_000
SCHEMA = 1


class ExplorationError(SyncrwError):
    code = "E-EXPLORE"


# -- uniform view of a system -------------------------------------------------------


class SystemView:
    def __init__(self, system):
        self.system = system
        self.name = system.name
        if isinstance(system, PlainModule):
            self.kind = "plain"
        elif isinstance(system, ComposedSystem):
            self.kind = "composed"
        elif isinstance(system, AtomicModule):
            self.kind = "atomic"
        else:
            raise SyncrwError(f"{system.name} is not a system module", code="E-NOT-SYSTEM")
        self._props: dict = {}

    def init(self) -> Term:
        t = self.system.init
        if t is None:
            raise SyncrwError(f"{self.name} declares no init", code="E-INIT")
        return t

    def successors(self, t: Term) -> list:
        s = self.system
        if self.kind == "atomic":
            return s.half_successors(t)
        return s.successors(t)

    def render(self, t: Term) -> str:
        if self.kind == "atomic":
            return term_str(t)
        return self.system.render(t)

    def node_kind(self, t: Term) -> str:
        if self.kind == "atomic":
            return self.system.stage_class(t) or "Stage"
        return self.system.node_kind(t)

    def prop_names(self) -> list:
        s = self.system
        if self.kind == "atomic":
            return list(s.own_props())
        if self.kind == "composed":
            return _cprops(s)
        return s.prop_names()

    def prop_symbol(self, name: str):
        hit = self._props.get(name)
        if hit is not None:
            return hit
        s = self.system
        try:
            if self.kind == "atomic":
                base = name[len(s.name) + 1:] if name.startswith(s.name + ".") else name
                pd = s.own_props().get(base)
                if pd is None:
                    raise SyncrwError(f"unknown property {name}", code="E-UNKNOWN-PROPERTY")
                hit = pd.sym
            elif self.kind == "composed":
                hit = resolve_prop(s, PropRef.parse(name))
            else:
                hit = lookup_prop(s.prop_table(), name)
        except SyncrwError as e:
            raise FormulaError(str(e), code=e.code) from None
        self._props[name] = hit
        return hit

    def prop_value(self, name: str, t: Term):
        h = self.prop_symbol(name)
        if self.kind == "composed":
            return h.value(t)
        return self.system.eval_property(h, t)

    def project(self, t: Term, index: tuple) -> Term:
        return project(t, index)

    def part_pattern(self, path: tuple, text: str):
        """``(index, module, pattern)`` for a ``PATH ~ PATTERN`` atom."""
        from .frontend.resolve import engine_of, parse_term
        node, index = self.system, ()
        names = list(path)
        if names and names[0] == node.name:
            names = names[1:]
        for n in names:
            comps = getattr(node, "components", None)
            if not comps:
                raise FormulaError(f"{node.name} has no component {n}")
            found = _find_component(node, n, ())
            if found is None:
                raise FormulaError(f"unknown component {n} in {'.'.join(path)}")
            sub_index, node = found
            index += sub_index
        pat = parse_term(node, text)
        return index, engine_of(node), pat


def _find_component(node, name, index):
    hits = []

    def walk(n, idx):
        for i, (c, sub) in enumerate(getattr(n, "components", ()) or ()):
            if c == name:
                hits.append((idx + (i,), sub))
            else:
                walk(sub, idx + (i,))

    for i, (c, sub) in enumerate(node.components):
        if c == name:
            return index + (i,), sub
    walk(node, index)
    return hits[0] if len(hits) == 1 else None


def as_view(system) -> SystemView:
    return system if isinstance(system, SystemView) else SystemView(system)


# -- graphs ---------------------------------------------------------------------------


@dataclass
class StateGraph:
    system: str
    nodes: list  # rendered stage per node id
    kinds: list
    edges: list  # sorted (from, to) id pairs
    init: int = 0
    depths: list = field(default_factory=list)
    truncated: bool = False
    frontier: int = 0
    expanded: set = field(default_factory=set)
    terms: list | None = None
    parents: list | None = None
    _view: object = None
    _props: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.nodes)

    def index(self, rendered: str) -> int:
        return self.nodes.index(rendered)

    def props(self, i: int) -> dict:
        hit = self._props.get(i)
        if hit is None:
            hit = {}
            view = self._view
            for name in view.prop_names():
                try:
                    v = view.prop_value(name, self.terms[i])
                except SyncrwError:
                    v = UNDEFINED
                hit[name] = None if v is UNDEFINED else term_str(v)
            self._props[i] = hit
        return hit

    def successors_of(self, i: int) -> list:
        return [b for a, b in self.edges if a == i]

    def deadlocks(self) -> list:
        """Expanded nodes without successors."""
        out = {a for a, _ in self.edges}
        return [i for i in sorted(self.expanded) if i not in out]

    def trace_to(self, i: int) -> list:
        path = []
        while i is not None:
            path.append(i)
            i = self.parents[i]
        return path[::-1]


def explore(system, max_nodes: int = DEFAULT_MAX_NODES, max_depth: int | None = None,
            stop=None) -> StateGraph:
    """Breadth-first closure from init within the bounds.

    ``stop(term)`` may end the search early at the first node (in id order)
    for which it returns true; ``graph.hit`` then holds that node id.
    """
    view = as_view(system)
    init = view.init()
    ids = {init: 0}
    terms, parents, depths = [init], [None], [0]
    edges: set = set()
    expanded: set = set()
    truncated = False
    frontier = 0
    hit = 0 if stop is not None and stop(init) else None
    level = [init]
    d = 0
    while level and hit is None:
        if max_depth is not None and d >= max_depth:
            frontier = sum(1 for t in level if _succ(view, t))
            truncated = frontier > 0
            break
        succs = [(t, _succ(view, t)) for t in level]
        fresh: dict = {}
        for t, ss in succs:
            expanded.add(ids[t])
            for s in ss:
                if s not in ids and s not in fresh:
                    fresh[s] = ids[t]
        order = sorted(fresh, key=_key)
        added = []
        for s in order:
            if len(terms) >= max_nodes:
                truncated = True
                frontier = len(order) - len(added)
                break
            ids[s] = len(terms)
            terms.append(s)
            parents.append(fresh[s])
            depths.append(d + 1)
            added.append(s)
        for t, ss in succs:
            for s in ss:
                j = ids.get(s)
                if j is not None:
                    edges.add((ids[t], j))
        if stop is not None:
            for s in added:
                if stop(s):
                    hit = ids[s]
                    break
        if truncated:
            break
        level = added
        d += 1
    if hit is not None and level:
        truncated = True
    g = StateGraph(view.name, [view.render(t) for t in terms], [view.node_kind(t) for t in terms],
                   sorted(edges), 0, depths, truncated, frontier, expanded, terms, parents, view)
    g.hit = hit
    return g


def _key(t):
    return t.key


def _succ(view, t) -> list:
    try:
        return view.successors(t)
    except SyncrwError as e:
        raise ExplorationError(f"while expanding {view.render(t)}: {e}", code=e.code) from None


# -- verdicts -----------------------------------------------------------------------


@dataclass
class Verdict:
    status: str  # HOLDS-exhaustive | HOLDS-within-bounds | VIOLATED
    formula: str
    trace: list | None
    graph: StateGraph

    @property
    def holds(self) -> bool:
        return self.status != "VIOLATED"

    def to_json(self) -> dict:
        return {"schema": SCHEMA, "verdict": self.status, "formula": self.formula,
                "trace": self.trace, "nodes": len(self.graph), "truncated": self.graph.truncated}


def check_invariant(system, formula, max_nodes: int = DEFAULT_MAX_NODES,
                    max_depth: int | None = None) -> Verdict:
    """Check that ``formula`` holds at every explored stage."""
    view = as_view(system)
    f = parse_formula(formula) if isinstance(formula, str) else formula
    ev = Evaluator(view, f)
    g = explore(view, max_nodes, max_depth, stop=lambda t: not ev(t))
    if g.hit is not None:
        return Verdict("VIOLATED", str(f), [g.nodes[i] for i in g.trace_to(g.hit)], g)
    return Verdict("HOLDS-within-bounds" if g.truncated else "HOLDS-exhaustive", str(f), None, g)


@dataclass
class SearchResult:
    found: bool
    goal: str
    trace: list | None
    graph: StateGraph

    @property
    def truncated(self) -> bool:
        return self.graph.truncated

    def to_json(self) -> dict:
        return {"schema": SCHEMA, "found": self.found, "goal": self.goal, "trace": self.trace,
                "nodes": len(self.graph), "truncated": self.graph.truncated}


def goal_formula(view, goal: str):
    """A goal is a formula, or else a stage pattern for the whole system."""
    try:
        f = parse_formula(goal)
        Evaluator(view, f)
        return f
    except SyncrwError:
        f = Matches((), goal)
        Evaluator(view, f)
        return f


def search(system, goal, max_nodes: int = DEFAULT_MAX_NODES,
           max_depth: int | None = None) -> SearchResult:
    """Shortest trace from init to a stage satisfying ``goal``."""
    view = as_view(system)
    f = goal_formula(view, goal) if isinstance(goal, str) else goal
    ev = Evaluator(view, f)
    g = explore(view, max_nodes, max_depth, stop=ev)
    if g.hit is not None:
        return SearchResult(True, str(f), [g.nodes[i] for i in g.trace_to(g.hit)], g)
    return SearchResult(False, str(f), None, g)


def validate_trace(system, terms) -> bool:
    """Consecutive stages of ``terms`` are related by the successor relation."""
    view = as_view(system)
    if not terms or terms[0] is not view.init():
        return False
    return all(b in view.successors(a) for a, b in zip(terms, terms[1:]))


# -- comparison -------------------------------------------------------------------------


def graphs_equal(g1: StateGraph, g2: StateGraph, annotations: bool = True):
    """``(equal, report)``; nodes are identified by their rendered stage."""
    if g1.nodes[g1.init] != g2.nodes[g2.init]:
        return False, f"initial stages differ: {g1.nodes[g1.init]} vs {g2.nodes[g2.init]}"
    n1, n2 = set(g1.nodes), set(g2.nodes)
    if n1 != n2:
        only = sorted(n1 - n2)
        if only:
            return False, f"node {only[0]} only in the first graph"
        return False, f"node {sorted(n2 - n1)[0]} only in the second graph"
    e1 = {(g1.nodes[a], g1.nodes[b]) for a, b in g1.edges}
    e2 = {(g2.nodes[a], g2.nodes[b]) for a, b in g2.edges}
    if e1 != e2:
        only = sorted(e1 - e2)
        if only:
            return False, f"edge {only[0][0]} -> {only[0][1]} only in the first graph"
        a, b = sorted(e2 - e1)[0]
        return False, f"edge {a} -> {b} only in the second graph"
    if annotations:
        pos2 = {n: i for i, n in enumerate(g2.nodes)}
        for i, n in enumerate(g1.nodes):
            p1, p2 = g1.props(i), g2.props(pos2[n])
            if p1 != p2:
                diff = sorted(k for k in set(p1) | set(p2) if p1.get(k, "?") != p2.get(k, "?"))
                return False, f"properties of {n} differ at {diff[0]}"
    return True, ""


# -- export ------------------------------------------------------------------------------


def to_json(g: StateGraph, annotations: bool = True) -> dict:
    nodes = []
    for i, n in enumerate(g.nodes):
        d = {"id": i, "term": n, "sort": g.kinds[i]}
        if annotations:
            d["props"] = g.props(i)
        nodes.append(d)
    return {"schema": SCHEMA, "system": g.system, "init": g.init, "nodes": nodes,
            "edges": [list(e) for e in g.edges], "truncated": g.truncated,
            "frontier": g.frontier}


def export_json(g: StateGraph, annotations: bool = True) -> str:
    return json.dumps(to_json(g, annotations), indent=2, sort_keys=True) + "\n"


def graph_from_json(text_or_obj) -> StateGraph:
    d = json.loads(text_or_obj) if isinstance(text_or_obj, str) else text_or_obj
    if d.get("schema") != SCHEMA:
        raise SyncrwError(f"unsupported graph schema {d.get('schema')!r}", code="E-SCHEMA")
    nodes = sorted(d["nodes"], key=lambda n: n["id"])
    g = StateGraph(d.get("system", ""), [n["term"] for n in nodes], [n["sort"] for n in nodes],
                   sorted(tuple(e) for e in d["edges"]), d["init"], truncated=d["truncated"],
                   frontier=d.get("frontier", 0))
    g._props = {n["id"]: n["props"] for n in nodes if "props" in n}
    return g


_SHAPES = {"State": "ellipse", "Trans": "box"}


def export_dot(g: StateGraph) -> str:
    lines = [f"digraph {json.dumps(g.system)} {{"]
    for i, n in enumerate(g.nodes):
        shape = _SHAPES.get(g.kinds[i], "box")
        extra = ", style=rounded" if g.kinds[i] not in _SHAPES else ""
        if i == g.init:
            extra += ", peripheries=2"
        lines.append(f"  n{i} [label={json.dumps(n)}, shape={shape}{extra}];")
    for a, b in g.edges:
        lines.append(f"  n{a} -> n{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_graph(g: StateGraph, fmt: str = "json") -> str:
    if fmt == "dot":
        return export_dot(g)
    if fmt == "json":
        return export_json(g)
    raise ValueError(f"unknown graph format {fmt}")


__all__ = ["SystemView", "StateGraph", "Verdict", "SearchResult", "explore", "check_invariant",
           "search", "graphs_equal", "export_graph", "export_dot", "export_json", "to_json",
           "graph_from_json", "validate_trace", "as_view", "DEFAULT_MAX_NODES"]
