import pytest

from conftest import corpus, module
from syncrw.errors import SyncrwError
from syncrw.frontend.resolve import parse_term
from syncrw.mel import UNDEFINED
from syncrw.printer import term_str
from syncrw.split import split
from syncrw.terms import mk_int

NAT = """
fmod NATS is
  sorts Zero NzNat Nat Neg .
  subsorts Zero NzNat < Nat .
  op z : -> Zero .
  op s : Nat -> Nat .
  op p : Nat -> Nat .
  op half : Nat -> Nat .
  var N : Nat .
  mb s(N) : NzNat .
  eq p(s(N)) = N .
  eq half(z) = z .
  eq half(s(z)) = z .
  eq half(s(s(N))) = s(half(N)) .
  op big : Nat -> Bool .
  ceq big(N) = true if s(s(z)) := N .
  eq big(N) = false [otherwise] .
endfm
"""


@pytest.fixture(scope="module")
def nats():
    return module(NAT, "NATS")


def nf(m, text):
    return term_str(m.normalize(parse_term(m, text)))


def test_equations_reduce_to_normal_form(nats):
    assert nf(nats, "half(s(s(s(s(z)))))") == "s(s(z))"
    assert nf(nats, "p(s(s(z)))") == "s(z)"


def test_otherwise_equation_only_where_nothing_else_applies(nats):
    assert nf(nats, "big(s(s(z)))") == "true"
    assert nf(nats, "big(s(z))") == "false"


def test_membership_refines_least_sort(nats):
    assert str(nats.sort_of_normal(nats.normalize(parse_term(nats, "s(z)")))) == "NATS.NzNat"
    assert str(nats.sort_of_normal(nats.normalize(parse_term(nats, "z")))) == "NATS.Zero"
    stuck = nats.normalize(parse_term(nats, "p(z)"))
    assert term_str(stuck) == "p(z)"
    assert str(nats.sort_of_normal(stuck)) == "NATS.Nat"


def test_builtin_arithmetic_and_booleans(trains):
    rk = trains.get("RECKONER")
    assert rk.normalize(parse_term(rk, "(2 * 3) - 10")) is mk_int(-4)
    assert nf(rk, "(1 < 2) and not (3 <= 2)") == "true"
    assert nf(rk, "7 quo 2") == "3"
    assert nf(rk, "7 rem 2") == "1"


def test_properties_defined_and_undefined(trains):
    rk = trains.get("RECKONER")
    cons = next(s for s in rk.signature.props if s.name == "areConsec")
    assert term_str(rk.eval_property(cons, mk_int(1))) == "true"
    assert term_str(rk.eval_property(cons, mk_int(4))) == "false"
    assert rk.eval_property(cons, parse_term(rk, "lmoving | 1")) is UNDEFINED
    undefined = rk.normalize(parse_term(rk, "areConsec @ (lmoving | 1)"))
    assert str(rk.sort_of_normal(undefined)) == "[Bool]"


def test_finite_values_of_constant_sorts():
    cpu = corpus("computer").get("PROCESSOR")
    by_name = {str(s): s for s in cpu.signature.sorts}
    assert [term_str(v) for v in cpu.finite_values(by_name["PROCESSOR.Addr"])] == ["a0", "a1"]
    assert [term_str(v) for v in cpu.finite_values(by_name["PROCESSOR.DataReg"])] == \
        ["d0", "d1", "noData"]
    assert cpu.finite_values(by_name["Int"]) is None
    assert cpu.finite_values(by_name["PROCESSOR.Instr"]) is None


def test_ac_collections_with_identity():
    cpu = corpus("computer").get("PROCESSOR")
    assert nf(cpu, "d1 none d0") == "d0 d1"
    assert nf(cpu, "admissible") == "d0 d1"
    assert nf(cpu, "prog(2)") == "r(a1)"
    assert nf(cpu, "prog(7)") == "halt"


def test_split_membership_classifies_tuples(trains):
    pm = split(trains.get("RECKONED-TRAINS"))
    good = pm.normalize(parse_term(pm, "< stopped, stopped, 2 >"))
    bad = pm.normalize(parse_term(pm, "< moving, stopped, 2 >"))
    assert pm.is_state(good)
    assert not pm.is_state(bad)


def test_runaway_equations_hit_the_step_budget():
    loop = module("fmod L is sort X . op x : -> X . op y : -> X . eq x = y . eq y = x . endfm",
                  "L")
    with pytest.raises(SyncrwError) as e:
        loop.normalize(parse_term(loop, "x"))
    assert e.value.code == "E-STEP-BUDGET"
