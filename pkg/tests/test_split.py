import pytest

from conftest import corpus, corpus_systems
from syncrw.explorer import explore, graphs_equal
from syncrw.frontend.resolve import parse_term
from syncrw.printer import term_str
from syncrw.split import plain_successors, prune_rules, split, split_atomic, split_composed


def test_atomic_split_cuts_each_rule_in_two(trains):
    pm = split_atomic(trains.get("TRAIN"))
    assert pm.atomic
    assert [r.describe() for r in pm.rules] == ["rule stopped => moving",
                                                "rule moving => stopped"]


def test_atomic_plain_successors(trains):
    rk = split(trains.get("RECKONER"))
    assert [term_str(t) for t in plain_successors(parse_term(rk, "2"), rk)] == \
        ["2moving | 2", "lmoving | 2", "rmoving | 2"]
    assert [term_str(t) for t in plain_successors(parse_term(rk, "lmoving | 2"), rk)] == ["1"]


def test_composed_split_counts(trains):
    pm = split_composed(trains.get("RECKONED-TRAINS"))
    assert pm.stats.combinations == 24
    assert len(pm.rules) == pm.stats.generated
    assert not pm.atomic
    ct = split_composed(trains.get("CONTROLLED-TRAINS"))
    assert ct.stats.combinations > 0


def test_membership_states_the_criteria(trains):
    from syncrw.emit import emit_plain
    text = emit_plain(split(trains.get("RECKONED-TRAINS")))
    assert ("cmb < L, R, E > : State if isMoving @ L = isLMoving @ E "
            "/\\ isMoving @ R = isRMoving @ E .") in text


def test_global_step_is_a_composed_step(trains):
    rt = trains.get("RECKONED-TRAINS")
    pm = split(rt)
    g = explore(rt, max_depth=6)
    for t in g.terms:
        assert sorted(rt.render(u) for u in rt.successors(t)) == \
            sorted(pm.render(u) for u in plain_successors(pm.normalize(
                parse_term(pm, rt.render(t))), pm))


def test_prune_keeps_behaviour_and_reports_work(trains):
    rt = trains.get("RECKONED-TRAINS")
    full = split(rt)
    pruned = prune_rules(full)
    assert len(pruned.rules) == 6
    assert pruned.stats.deleted == 138
    assert pruned.stats.conditions_removed == 42
    ok, why = graphs_equal(explore(full, max_depth=10), explore(pruned, max_depth=10))
    assert ok, why


@pytest.mark.parametrize("stem,name", corpus_systems())
def test_pruned_split_commutes(stem, name):
    sysm = corpus(stem).get(name)
    ok, why = graphs_equal(explore(sysm, max_depth=6), explore(split(sysm, prune=True),
                                                               max_depth=6))
    assert ok, why


def test_properties_survive_the_split(trains):
    rt = trains.get("RECKONED-TRAINS")
    pm = split(rt)
    g1, g2 = explore(rt, max_depth=6), explore(pm, max_depth=6)
    pos = {n: i for i, n in enumerate(g2.nodes)}
    for i, n in enumerate(g1.nodes):
        assert g1.props(i) == g2.props(pos[n])
    assert g1.props(0)["RECKONER.crash"] == "false"
