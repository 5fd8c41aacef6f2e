import json
from collections import deque

import pytest

from conftest import corpus, module
from oracles import trains as oracle
from syncrw.errors import SyncrwError
from syncrw.explorer import ExplorationError, as_view, check_invariant, explore, \
    export_dot, export_json, graph_from_json, graphs_equal, search, to_json, validate_trace

# frozen from the hand-written simulator in tests/oracles/trains.py
FROZEN = {"RECKONED-TRAINS": (30, 42), "CONTROLLED-TRAINS": (20, 28)}


@pytest.mark.parametrize("name,controlled", [("RECKONED-TRAINS", False),
                                             ("CONTROLLED-TRAINS", True)])
def test_trains_graphs_match_the_simulator(trains, name, controlled):
    nodes, edges = oracle.explore(controlled, 8)
    assert (len(nodes), len(edges)) == FROZEN[name]
    g = explore(trains.get(name), max_depth=8)
    assert (len(g), len(g.edges)) == FROZEN[name]
    assert set(g.nodes) == {oracle.render(s) for s in nodes}
    assert {(g.nodes[a], g.nodes[b]) for a, b in g.edges} == \
        {(oracle.render(a), oracle.render(b)) for a, b in edges}


def test_corpus_counts():
    assert (len(explore(corpus("mutex").get("TRAINS-MUTEX"))),
            len(explore(corpus("mutex").get("TRAINS-MUTEX")).edges)) == (35, 100)
    g = explore(corpus("computer").get("COMPUTER"))
    assert (len(g), len(g.edges)) == (22, 22)
    assert not g.truncated
    (dead,) = g.deadlocks()
    assert g.nodes[dead] == ("< ProgCounter: 5 Instr: halt Data: d0, "
                             "mem(cell(a0, d1) cell(a1, d0)) >")


def test_exploration_is_deterministic(trains):
    ct = trains.get("CONTROLLED-TRAINS")
    assert export_json(explore(ct, max_depth=9)) == export_json(explore(ct, max_depth=9))


def test_bounds_and_truncation(trains):
    ct = trains.get("CONTROLLED-TRAINS")
    g = explore(ct, max_nodes=7)
    assert len(g) == 7 and g.truncated and g.frontier > 0
    assert explore(ct, max_depth=3).truncated
    mutex = explore(corpus("mutex").get("TRAINS-MUTEX"))
    assert not mutex.truncated and mutex.frontier == 0


def test_depths_are_breadth_first_distances(trains):
    g = explore(trains.get("RECKONED-TRAINS"), max_depth=8)
    dist = {g.init: 0}
    todo = deque([g.init])
    while todo:
        a = todo.popleft()
        for b in g.successors_of(a):
            if b not in dist:
                dist[b] = dist[a] + 1
                todo.append(b)
    assert [dist[i] for i in range(len(g))] == g.depths


def test_verdicts(trains):
    rt = trains.get("RECKONED-TRAINS")
    v = check_invariant(rt, "not RECKONER.crash", max_depth=12)
    assert v.status == "VIOLATED" and not v.holds
    assert validate_trace(rt, [v.graph.terms[i] for i in v.graph.trace_to(v.graph.hit)])
    assert check_invariant(rt, "true", max_depth=4).status == "HOLDS-within-bounds"
    mutex = corpus("mutex").get("TRAINS-MUTEX")
    assert check_invariant(mutex, "true").status == "HOLDS-exhaustive"


def test_counterexample_is_shortest(trains):
    rt = trains.get("RECKONED-TRAINS")
    v = check_invariant(rt, "not RECKONER.crash", max_depth=12)
    g = explore(rt, max_depth=len(v.trace) - 2)
    bad = [i for i in range(len(g)) if g.props(i)["RECKONER.crash"] == "true"]
    assert bad == []


def test_search(trains):
    r = search(trains.get("RECKONER"), "0")
    assert r.found and r.trace == ["2", "lmoving | 2", "1", "lmoving | 1", "0"]
    ct = trains.get("CONTROLLED-TRAINS")
    r = search(ct, "CONTROLLER ~ consec and not RECKONER ~ 1", max_depth=12)
    assert not r.found and r.truncated
    r = search(ct, "RECKONER ~ rmoving | D:Int", max_depth=12)
    assert r.found
    assert r.trace[-1] == "< stopped, moving, rmoving | 2, fromNonConsec >"


def test_property_atoms_with_literals(trains):
    rk = trains.get("RECKONER")
    assert search(rk, "areConsec == true").trace[-1] == "1"
    # an atom over an undefined property is false, whatever the comparison
    v = check_invariant(rk, "areConsec =/= true", max_depth=2)
    assert v.trace == ["2", "2moving | 2"]


def test_formula_errors(trains):
    with pytest.raises(SyncrwError) as e:
        check_invariant(trains.get("RECKONER"), "nope.prop")
    assert e.value.code in ("E-FORMULA", "E-UNKNOWN-PROPERTY")


def test_json_round_trip(trains):
    g = explore(trains.get("CONTROLLED-TRAINS"), max_depth=6)
    back = graph_from_json(export_json(g))
    assert graphs_equal(g, back) == (True, "")
    data = json.loads(export_json(g))
    assert data["schema"] == 1
    assert data["nodes"][0]["term"] == "< stopped, stopped, 2, nonConsec >"
    assert data["nodes"][0]["props"]["CONTROLLER.areConsec"] == "false"
    with pytest.raises(SyncrwError):
        graph_from_json(dict(data, schema=99))


def test_dot_export(trains):
    g = explore(trains.get("TRAIN"))
    dot = export_dot(g)
    assert dot.startswith('digraph "TRAIN" {')
    assert 'n0 [label="stopped", shape=ellipse, peripheries=2];' in dot
    assert 'n1 [label="moving", shape=box];' in dot
    assert "n0 -> n1;" in dot and "n1 -> n0;" in dot


def test_graphs_equal_reports_the_difference(trains):
    g1 = explore(trains.get("RECKONER"), max_depth=2)
    g2 = explore(trains.get("RECKONER"), max_depth=4)
    ok, why = graphs_equal(g1, g2)
    assert not ok and "only in the second graph" in why
    assert to_json(g1, annotations=False)["nodes"][0] == {"id": 0, "term": "2", "sort": "State"}


def test_unbound_variable_stops_exploration():
    reader = module("""
mod READER is
  subsort Int < State .
  op read : -> Trans .
  vars N M : Int .
  rl N =[ read ]=> M .
  eq init = 0 .
endm""", "READER")
    with pytest.raises(ExplorationError):
        explore(reader)


def test_view_of_atomic_and_composed(trains):
    assert as_view(trains.get("TRAIN")).prop_names() == ["isMoving"]
    assert "CONTROLLER.doMoveR" in as_view(trains.get("CONTROLLED-TRAINS")).prop_names()
