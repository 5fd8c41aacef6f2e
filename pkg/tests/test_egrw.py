import pytest

from conftest import corpus, module
from syncrw.egrw import check_admissible, check_topmost, half_successors, \
    is_readable_syntactic, make_readable, with_rules
from syncrw.frontend.resolve import load_text, parse_term
from syncrw.printer import term_str


def succ(m, text):
    return [term_str(t) for t in half_successors(parse_term(m, text), m)]


def test_reckoner_half_steps(trains):
    rk = trains.get("RECKONER")
    assert sorted(succ(rk, "2")) == ["2moving | 2", "lmoving | 2", "rmoving | 2"]
    assert succ(rk, "lmoving | 2") == ["1"]
    assert succ(rk, "rmoving | 2") == ["3"]
    assert succ(rk, "2moving | 2") == ["2"]


def test_transition_forgets_its_origin():
    m = module("""
mod CROSS is
  ops a b c d : -> State .
  op go : -> Trans .
  rl b =[ go ]=> a .
  rl d =[ go ]=> c .
endm""", "CROSS")
    assert succ(m, "b") == ["go"]
    assert succ(m, "go") == ["a", "c"]


def test_conditions_and_matching_conditions():
    cpu = corpus("computer").get("PROCESSOR")
    assert succ(cpu, "ProgCounter: 2 Instr: r(a1) Data: d1") == ["doingR(2, a1)"]
    assert sorted(succ(cpu, "doingR(2, a1)")) == ["ProgCounter: 3 Instr: void Data: d0",
                                                  "ProgCounter: 3 Instr: void Data: d1"]
    counter = corpus("toys").get("COUNTER")
    assert sorted(succ(counter, "2")) == ["reset"]
    assert sorted(succ(counter, "1")) == ["inc(1)", "reset"]


def test_not_a_stage_is_rejected(trains):
    rk = trains.get("RECKONER")
    with pytest.raises(Exception):
        half_successors(parse_term(rk, "true"), rk)


def test_topmost_violation_reported():
    prog = load_text("mod BOX is op s : -> State . op box : Stage -> State . endm")
    rep = check_topmost(prog.get("BOX"))
    assert [d.code for d in rep.diagnostics] == ["E-NOT-TOPMOST"]
    assert check_topmost(corpus("trains").get("RECKONER")).ok


CHOICE = """
mod CHOICE is
  subsort Int < State .
  sort IntSet .
  subsort Int < IntSet .
  op none : -> IntSet .
  op __ : IntSet IntSet -> IntSet [assoc comm id: none] .
  op choices : -> IntSet .
  eq choices = 1 2 3 .
  op read : -> Trans .
  vars N M : Int .
  var Rest : IntSet .
  crl N =[ read ]=> M if M Rest := choices .
endm
"""


def test_admissibility_needs_the_matching_condition():
    m = module(CHOICE, "CHOICE")
    assert check_admissible(m).ok
    assert succ(m, "read") == ["1", "2", "3"]
    bare = CHOICE.replace("crl N =[ read ]=> M if M Rest := choices .", "rl N =[ read ]=> M .")
    prog = load_text(bare)
    rep = check_admissible(prog.get("CHOICE"))
    msgs = [d.message for d in rep.diagnostics]
    assert len(msgs) == 1
    assert "second half" in msgs[0] and "variable M" in msgs[0]
    assert check_admissible(corpus("computer").get("PROCESSOR")).ok


READ = """
mod RD is
  subsort Int < State .
  subsort Int < Trans .
  op a : -> Trans .
  vars X Y Z : Int .
  rl X =[ a ]=> Z .
  rl X =[ X ]=> X .
  crl X =[ Y ]=> Z if X = Z .
  crl X =[ Y ]=> Z if X = Y /\\ X = Z .
  crl X =[ Y ]=> Z if X = Y /\\ Y = Z .
  rl X =[ a ]=> X .
endm
"""


def test_readability_examples():
    rules = module(READ, "RD").rules
    assert [is_readable_syntactic(r) for r in rules] == [True, True, False, True, True, False]


def test_make_readable_keeps_the_half_rewrite_relation():
    from syncrw import prelude
    from syncrw.terms import mk_int
    m = module(READ, "RD")
    dom = {prelude.INT: [mk_int(i) for i in range(-2, 3)]}
    for r in m.rules:
        fixed = make_readable(r)
        assert is_readable_syntactic(fixed)
        before, after = with_rules(m, [r]), with_rules(m, [fixed])
        for s in list(dom[prelude.INT]) + [parse_term(m, "a")]:
            assert before.half_successors(s, dom) == after.half_successors(s, dom)


def semantically_readable(m, rule, values):
    """Brute force over a finite domain: every pair of consecutive half
    rewrites can be produced by one substitution."""
    import itertools
    from syncrw.terms import substitute, vars_of
    vs = vars_of(rule.lhs, rule.label, rule.rhs,
                 *[t for c in rule.conditions for t in (c.left, c.right)])
    valid = []
    for combo in itertools.product(values, repeat=len(vs)):
        th = dict(zip(vs, combo))
        if all(m.normalize(substitute(c.left, th)) is m.normalize(substitute(c.right, th))
               for c in rule.conditions):
            valid.append(tuple(m.normalize(substitute(t, th))
                               for t in (rule.lhs, rule.label, rule.rhs)))
    triples = set(valid)
    for u, v, _ in valid:
        for _, v2, w in valid:
            if v2 is v and (u, v, w) not in triples:
                return False
    return True


def test_syntactic_readability_agrees_with_brute_force():
    from syncrw.terms import mk_int
    m = module(READ, "RD")
    values = [mk_int(i) for i in range(-1, 2)]
    assert [semantically_readable(m, r, values) for r in m.rules] == \
        [True, True, False, True, True, False]
