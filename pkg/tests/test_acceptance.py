"""Acceptance run: one pytest case (or family of cases) per criterion.

The terminal summary prints one PASS/FAIL line per criterion.
"""

import itertools
import random
import time

import pytest

import props
from conftest import CORPUS, GOLDEN, corpus, corpus_systems
from syncrw import prelude
from syncrw.compose import criteria_set, equivalent
from syncrw.egrw import alpha_equivalent, is_readable_syntactic, make_readable, with_rules
from syncrw.emit import emit_plain
from syncrw.explorer import check_invariant, explore, graphs_equal
from syncrw.frontend.resolve import load_text, parse_term
from syncrw.printer import term_str
from syncrw.split import split, split_atomic, split_composed
from syncrw.terms import mk_int


# -- mutex ---------------------------------------------------------------------------------


@pytest.mark.criterion("mutex")
def test_mutex():
    system = corpus("mutex").get("TRAINS-MUTEX")
    t0 = time.perf_counter()
    trains = check_invariant(system, "not (TRAIN1.isCrossing and TRAIN2.isCrossing)")
    grants = check_invariant(system, "not (MUTEX.grants1 and MUTEX.grants2)")
    elapsed = time.perf_counter() - t0
    assert trains.status == "HOLDS-exhaustive"
    assert grants.status == "HOLDS-exhaustive"
    assert not trains.graph.truncated
    assert elapsed < 1.0, elapsed


# -- controlled trains ---------------------------------------------------------------------


@pytest.mark.criterion("controlled trains")
def test_controlled_trains():
    p = corpus("trains")
    ct = p.get("CONTROLLED-TRAINS")
    t0 = time.perf_counter()
    assert ct.render(ct.init) == "< stopped, stopped, 2, nonConsec >"
    held = check_invariant(ct, "not RECKONER.crash", max_nodes=50000, max_depth=12)
    broken = check_invariant(p.get("RECKONED-TRAINS"), "not RECKONER.crash",
                             max_nodes=50000, max_depth=12)
    elapsed = time.perf_counter() - t0
    assert held.status == "HOLDS-within-bounds"
    assert broken.status == "VIOLATED"
    assert len(broken.trace) - 1 == 4
    assert broken.trace == ["< stopped, stopped, 2 >", "< moving, stopped, lmoving | 2 >",
                            "< stopped, stopped, 1 >", "< moving, stopped, lmoving | 1 >",
                            "< stopped, stopped, 0 >"]
    assert elapsed < 5.0, elapsed


# -- split commutation ---------------------------------------------------------------------


@pytest.mark.criterion("split commutation")
@pytest.mark.parametrize("stem,name", corpus_systems())
def test_split_commutation(stem, name):
    sysm = corpus(stem).get(name)
    t0 = time.perf_counter()
    semantic = explore(sysm, max_depth=8)
    plain = explore(split(sysm), max_depth=8)
    elapsed = time.perf_counter() - t0
    ok, why = graphs_equal(semantic, plain)
    assert ok, why
    assert elapsed < 10.0, elapsed


# -- split counts and pruning --------------------------------------------------------------


@pytest.mark.criterion("split counts")
def test_split_counts_and_golden():
    p = corpus("trains")
    assert len(split_atomic(p.get("LTRAIN")).rules) == 2
    assert len(split_atomic(p.get("RTRAIN")).rules) == 2
    assert len(split_atomic(p.get("RECKONER")).rules) == 6
    rt = p.get("RECKONED-TRAINS")
    full = split_composed(rt)
    assert full.stats.combinations == 24
    pruned = split_composed(rt, prune=True)
    text = emit_plain(pruned)
    assert text == (GOLDEN / "reckoned-trains-pruned.ers").read_text()
    unpruned = emit_plain(full)
    dropped = "< moving, stopped, lmoving | D > => < moving, moving, lmoving | D >"
    assert dropped in unpruned and dropped not in text
    kept = "< moving, stopped, lmoving | D > => < stopped, stopped, D - 1 >"
    assert f"crl {kept} if" in unpruned
    assert f"  rl {kept} .\n" in text


# -- readability ---------------------------------------------------------------------------

READ_SRC = """
mod RD is
  subsort Int < State .
  op a : -> Trans .
  var X : Int .
  rl X =[ a ]=> X .
  vars X$t X$t' X'$t X'$t' : Int .
  crl X$t =[ a ]=> X$t' if X$t = X'$t' /\\ X'$t = X$t' .
endm
"""


@pytest.mark.criterion("readability")
def test_readability():
    prog = load_text(READ_SRC)
    assert prog.ok
    m = prog.get("RD")
    rule, expected = m.rules
    out = make_readable(rule)
    assert alpha_equivalent(out, expected)
    assert is_readable_syntactic(out)
    assert not is_readable_syntactic(rule)
    before, after = with_rules(m, [rule]), with_rules(m, [out])
    dom = {prelude.INT: [mk_int(i) for i in range(-3, 4)]}
    stages = [mk_int(i) for i in range(-3, 4)] + [parse_term(m, "a")]
    for s in stages:
        assert before.half_successors(s, dom) == after.half_successors(s, dom)
    assert len(before.half_successors(parse_term(m, "a"), dom)) == 7


# -- half-rewrite tables -------------------------------------------------------------------


def _edges(pairs):
    return {(a.replace("0", "b0").replace("1", "b1"), b.replace("0", "b0").replace("1", "b1"))
            for a, b in pairs}


TABLES = {
    "LABEL-X": _edges([("t(0)", "l(0)"), ("t(1)", "l(1)"), ("l(0)", "t'(0)"),
                       ("l(0)", "t'(1)"), ("l(1)", "t'(0)"), ("l(1)", "t'(1)")]),
    "LABEL-Y": _edges([("t(0)", "l(0)"), ("t(0)", "l(1)"), ("t(1)", "l(0)"),
                       ("t(1)", "l(1)"), ("l(0)", "t'(0)"), ("l(1)", "t'(1)")]),
    "LABEL-Z": _edges([("t(0)", "l(0)"), ("t(0)", "l(1)"), ("t(1)", "l(0)"),
                       ("t(1)", "l(1)"), ("l(0)", "t'(0)"), ("l(0)", "t'(1)"),
                       ("l(1)", "t'(0)"), ("l(1)", "t'(1)")]),
    "LABEL-CONST": _edges([("t(0)", "l"), ("t(1)", "l"), ("l", "t'(0)"), ("l", "t'(1)")]),
    "LABEL-XY": _edges([("t(0)", "l(0, 0)"), ("t(0)", "l(0, 1)"), ("t(1)", "l(1, 0)"),
                        ("t(1)", "l(1, 1)"), ("l(0, 0)", "t'(0)"), ("l(0, 1)", "t'(1)"),
                        ("l(1, 0)", "t'(0)"), ("l(1, 1)", "t'(1)")]),
}


def closure_edges(m, origins):
    todo = [parse_term(m, o) for o in origins]
    seen = set(todo)
    edges = set()
    while todo:
        s = todo.pop()
        for u in m.half_successors(s):
            edges.add((term_str(s), term_str(u)))
            if u not in seen:
                seen.add(u)
                todo.append(u)
    return edges


@pytest.mark.criterion("half-rewrite tables")
@pytest.mark.parametrize("name", sorted(TABLES))
def test_half_rewrite_table(name):
    m = corpus("tables").get(name)
    assert closure_edges(m, ["t(b0)", "t(b1)"]) == TABLES[name]
    g = explore(m)
    from_init = {(g.nodes[a], g.nodes[b]) for a, b in g.edges}
    assert from_init == closure_edges(m, ["t(b0)"])


# -- connectors ----------------------------------------------------------------------------


def _int(v):
    return None if v is None else int(v)


@pytest.mark.criterion("connector patterns")
def test_connector_adder():
    g = explore(corpus("connectors").get("ADDITION"))
    assert not g.truncated
    checked = set()
    for i in range(len(g)):
        if g.kinds[i] != "State":
            continue
        pr = g.props(i)
        a, b, s = _int(pr["IN1.out"]), _int(pr["IN2.out"]), _int(pr["SUM.total"])
        assert None not in (a, b, s)
        assert s == a + b, g.nodes[i]
        checked.add((a, b))
    assert checked == set(itertools.product(range(3), repeat=2))


@pytest.mark.criterion("connector patterns")
def test_connector_relation():
    g = explore(corpus("connectors").get("RELATION"))
    assert not g.truncated
    seen = set()
    for i in range(len(g)):
        if g.kinds[i] != "State":
            continue
        pr = g.props(i)
        p, q = _int(pr["LEFT.val"]), _int(pr["RIGHT.val"])
        assert p < q, g.nodes[i]
        seen.add((p, q))
    assert seen == {(p, q) for p in range(4) for q in range(4) if p < q}


# -- algebra laws --------------------------------------------------------------------------

_OWNER = {"TOGGLE": 0, "COUNTER": 1, "LAMP": 2}
_ORDER = ["TOGGLE", "COUNTER", "LAMP"]


def _sync(pairs):
    if not pairs:
        return " ."
    return " sync on " + " /\\ ".join(f"{a} = {b}" for a, b in pairs) + " ."


def _law_case(rng):
    """Module text for both groupings of one random criterion set."""
    perm = rng.sample(_ORDER, 3)
    t1, t2, t3 = perm
    pairs = [p if rng.random() < 0.5 else (p[1], p[0])
             for p in props.TOY_PAIRS if rng.random() < 0.5]

    def comps(p):
        return {p[0].split(".")[0], p[1].split(".")[0]}

    y = [p for p in pairs if comps(p) == {t1, t2} and rng.random() < 0.7]
    y1 = [p for p in pairs if p not in y]
    y3 = [p for p in pairs if comps(p) == {t2, t3} and rng.random() < 0.7]
    y2 = [p for p in pairs if p not in y3]
    text = (f"mod L12 is pr {t1} || {t2}{_sync(y)} endm\n"
            f"mod LEFT is pr L12 || {t3}{_sync(y1)} endm\n"
            f"mod R23 is pr {t2} || {t3}{_sync(y3)} endm\n"
            f"mod RIGHT is pr {t1} || R23{_sync(y2)} endm\n"
            f"mod FWD is pr {t1} || {t2}{_sync(y)} endm\n"
            f"mod BWD is pr {t2} || {t1}{_sync([(b, a) for a, b in y])} endm\n")
    return text, pairs


@pytest.mark.criterion("algebra laws")
def test_algebra_laws():
    toys = (CORPUS / "toys.ers").read_text()
    rng = random.Random(20231017)
    for case in range(100):
        text, pairs = _law_case(rng)
        prog = load_text(toys + text)
        assert prog.ok, (case, [str(d) for d in prog.errors()])
        left, right = prog.get("LEFT"), prog.get("RIGHT")
        assert equivalent(left, right), (case, text)
        assert len(criteria_set(left)) == len(pairs)
        assert criteria_set(prog.get("FWD")) == criteria_set(prog.get("BWD"))
        if case % 10 == 0:
            ok, why = graphs_equal(explore(left, max_depth=6), explore(right, max_depth=6),
                                   annotations=False)
            assert ok, (case, why)


@pytest.mark.criterion("algebra laws")
def test_algebra_laws_detect_difference():
    toys = (CORPUS / "toys.ers").read_text()
    text = ("mod A12 is pr TOGGLE || COUNTER sync on TOGGLE.lit = COUNTER.odd . endm\n"
            "mod A is pr A12 || LAMP . endm\n"
            "mod B23 is pr COUNTER || LAMP . endm\n"
            "mod B is pr TOGGLE || B23 . endm\n")
    prog = load_text(toys + text)
    assert not equivalent(prog.get("A"), prog.get("B"))


# -- property suites -----------------------------------------------------------------------


@pytest.mark.criterion("property-based suites")
@pytest.mark.parametrize("suite", sorted(props.SUITES))
def test_property_suite(suite):
    props.SUITES[suite]()

