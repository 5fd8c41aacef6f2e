import pytest

from conftest import corpus, module
from syncrw.compose import atomic_components, criteria_set, eval_composed_property, \
    prop_names, with_criteria, with_init
from syncrw.errors import InitError
from syncrw.frontend.resolve import load_text, parse_term
from syncrw.mel import UNDEFINED
from syncrw.printer import term_str


@pytest.fixture(scope="module")
def ct(trains):
    return trains.get("CONTROLLED-TRAINS")


def test_nested_structure(ct, trains):
    assert [c for c, _ in ct.components] == ["RECKONED-TRAINS", "CONTROLLER"]
    assert [(path, m.name) for path, m in ct.atoms()] == [
        ((0, 0), "LTRAIN"), ((0, 1), "RTRAIN"), ((0, 2), "RECKONER"), ((1,), "CONTROLLER")]
    assert trains.get("LTRAIN") is not trains.get("RTRAIN")
    assert [m.name for m in atomic_components(ct)] == ["LTRAIN", "RTRAIN", "RECKONER",
                                                       "CONTROLLER"]


def test_criteria_set_spans_levels(ct):
    names = {frozenset(s.qname for s in pair) for pair in criteria_set(ct)}
    assert names == {
        frozenset({"LTRAIN.isMoving", "RECKONER.isLMoving"}),
        frozenset({"RTRAIN.isMoving", "RECKONER.isRMoving"}),
        frozenset({"RECKONED-TRAINS.areConsec", "CONTROLLER.areConsec"}),
        frozenset({"RECKONED-TRAINS.isSomeMoving", "CONTROLLER.doMove"}),
        frozenset({"RECKONED-TRAINS.isRMoving", "CONTROLLER.doMoveR"}),
    }


def test_visible_properties(trains):
    assert prop_names(trains.get("RECKONED-TRAINS")) == [
        "areConsec", "isSomeMoving", "isRMoving", "LTRAIN.isMoving", "RTRAIN.isMoving",
        "RECKONER.areConsec", "RECKONER.isSomeMoving", "RECKONER.isLMoving",
        "RECKONER.isRMoving", "RECKONER.crash"]


def test_compatibility(ct):
    ok = parse_term(ct, "< < stopped, stopped, 1 >, consec >")
    bad = parse_term(ct, "< < stopped, stopped, 1 >, nonConsec >")
    assert ct.compatible(ok)
    assert not ct.compatible(bad)
    assert str(ct.violated_criterion(bad)) == "RECKONED-TRAINS.areConsec = CONTROLLER.areConsec"
    moving = parse_term(ct, "< < moving, stopped, rmoving | 1 >, fromNonConsec >")
    assert not ct.compatible(moving)


def test_undefined_properties_do_not_constrain(ct):
    # areConsec is undefined on both transitions here, doMoveR on fromNonConsec
    s = parse_term(ct, "< < moving, stopped, lmoving | 1 >, fromNonConsec >")
    assert ct.compatible(s)
    assert eval_composed_property("CONTROLLER.doMoveR", s, ct) is UNDEFINED


def test_composed_property_evaluation(ct):
    s = parse_term(ct, "< < stopped, stopped, 1 >, consec >")
    assert term_str(eval_composed_property("RECKONED-TRAINS.areConsec", s, ct)) == "true"
    assert term_str(eval_composed_property("RECKONER.crash", s, ct)) == "false"
    assert term_str(eval_composed_property("CONTROLLER.doMove", s, ct)) == "false"


def test_initial_stage_must_be_compatible(ct):
    assert ct.render(ct.init) == "< stopped, stopped, 2, nonConsec >"
    bad = parse_term(ct, "< < stopped, stopped, 1 >, nonConsec >")
    with pytest.raises(InitError):
        with_init(ct, bad).init


def test_every_successor_moves_and_is_compatible(ct):
    s = ct.init
    succ = ct.successors(s)
    assert succ
    for t in succ:
        assert t is not s and ct.compatible(t)
    assert ct.render(succ[0]).startswith("< ")


def test_dropping_criteria_only_adds_successors(trains):
    rt = trains.get("RECKONED-TRAINS")
    free = with_criteria(rt, [])
    s = rt.init
    assert set(rt.successors(s)) < set(free.successors(s))
    assert len(free.successors(s)) == 2 * 2 * 4 - 1


def test_ambiguous_inherited_property():
    text = """
mod P is op s : -> State . op t : -> Trans . rl s =[ t ]=> s .
  prop b : Bool . eq b @ s = true . eq init = s . endm
mod Q is pr P . endm
mod R is pr P . endm
mod QR is pr Q || R . endm
mod TOP is pr QR || P sync on QR.b = P.b . endm
"""
    codes = [d.code for d in load_text(text).errors()]
    assert "E-AMBIGUOUS-PROPERTY" in codes


def test_descendant_component_paths():
    text = """
mod P is op s : -> State . op t : -> Trans . rl s =[ t ]=> s .
  prop b : Bool . eq b @ s = true . eq init = s . endm
mod Q is pr P . endm
mod R is pr P . endm
mod QR is pr Q || R . endm
mod TOP is pr QR || P sync on Q.b = P.b . endm
"""
    top = module(text, "TOP")
    assert len(criteria_set(top)) == 1
