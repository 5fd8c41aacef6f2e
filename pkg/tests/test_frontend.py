import pytest

from conftest import CORPUS, codes, module
from syncrw.errors import SyncrwError
from syncrw.frontend.resolve import load_paths, load_text, parse_term
from syncrw.printer import term_str
from syncrw.terms import mk_int

PQ = """
mod P is op s : -> State . op t : -> Trans . rl s =[ t ]=> s .
  prop b : Bool [total] . prop n : Int [total] . var G : Stage .
  eq b @ G = true . eq n @ G = 1 . eq init = s . endm
mod Q is op s : -> State . op t : -> Trans . rl s =[ t ]=> s .
  prop b : Bool [total] . prop n : Int [total] . var G : Stage .
  eq b @ G = true . eq n @ G = 1 . eq init = s . endm
"""


@pytest.mark.parametrize("text,code", [
    ("mod M is op s : -> State . rl s => s . endm", "E-LABEL-REQUIRED"),
    ("mod M is op s : -> State . rl [go] : s => s . endm", "E-STANDARD-RULE"),
    ("mod A is pr B . endm mod B is pr A . endm", "E-IMPORT-CYCLE"),
    ("mod A is pr NOPE . endm", "E-UNKNOWN-MODULE"),
    ("mod A is op s : -> State . endm mod A is op s : -> State . endm", "E-DUPLICATE-MODULE"),
    ("mod A is sorts X Y . op c : -> X . op c : -> Y . endm", "E-OVERLOAD"),
    ("mod A is op s : -> State endm", "E-SYNTAX"),
    ("mod A is op s : -> Nope . endm", "E-UNKNOWN-SORT"),
    ("fmod F is sort X . prop p : Bool . endfm", "E-PROP-IN-FMOD"),
    ("fmod F is sort X . op x : -> X . rl x => x . endfm", "E-RULE-IN-FMOD"),
    ("mod A is sorts X Y . subsort X < Y . subsort Y < X . endm", "E-SUBSORT-CYCLE"),
    ("mod A is op s : -> State . op t : -> Trans . rl s =[ t ]=> s s . endm", "E-PARSE-TERM"),
    (PQ + "mod PQ is pr P || Q sync on P.b = Q.n . endm", "E-CRITERION-KIND"),
    (PQ + "mod PQ is pr P || Q sync on P.zz = Q.b . endm", "E-UNKNOWN-PROPERTY"),
])
def test_error_codes(text, code):
    assert code in codes(text)


def test_standard_rule_is_an_error_but_labeled_rule_is_not():
    assert codes("mod M is op s : -> State . op t : -> Trans . rl s =[ t ]=> s . endm") == []


def test_stage_nesting_is_a_warning():
    prog = load_text("mod A is op s : -> State . op box : Stage -> State . endm")
    assert prog.ok
    assert [d.code for d in prog.diagnostics] == ["E-NOT-TOPMOST"]


def test_errors_in_several_modules_are_all_reported():
    prog = load_text("mod A is op s : -> Nope . endm\nmod B is pr NOPE . endm")
    assert not prog.ok
    assert [d.code for d in prog.errors()] == ["E-UNKNOWN-SORT", "E-UNKNOWN-MODULE"]


def test_spans_point_at_the_offending_text():
    text = "mod A is\n  op s : -> State .\n  op t : -> Nope .\nendm\n"
    (d,) = load_text(text, "x.ers").errors()
    assert d.span.path == "x.ers"
    assert d.span.line == 3
    assert "Nope" in text[d.span.start:d.span.end]
    assert str(d).startswith("x.ers:3:")


def test_corpus_loads_cleanly():
    for path in sorted(CORPUS.glob("*.ers")):
        prog = load_paths([path])
        assert prog.ok, (path.name, [str(d) for d in prog.errors()])


def test_mixfix_and_int_literals_round_trip(trains):
    rk = trains.get("RECKONER")
    for text in ["lmoving | 3", "2moving | (-1)", "rmoving | (2 - 1)"]:
        t = parse_term(rk, text)
        assert parse_term(rk, term_str(t)) is t


def test_colon_keywords_are_not_variable_annotations():
    cpu = module((CORPUS / "computer.ers").read_text(), "PROCESSOR")
    t = parse_term(cpu, "ProgCounter: 1 Instr: void Data: noData")
    assert term_str(t) == "ProgCounter: 1 Instr: void Data: noData"
    assert t is cpu.init


def test_inline_variables(trains):
    rk = trains.get("RECKONER")
    t = parse_term(rk, "lmoving | N:Int")
    assert not t.ground


def test_unparenthesized_chain_of_a_non_assoc_operator_is_rejected(trains):
    rk = trains.get("RECKONER")
    with pytest.raises(SyncrwError) as e:
        parse_term(rk, "1 - 2 - 3")
    assert e.value.code == "E-PARSE-TERM"
    assert rk.normalize(parse_term(rk, "(1 - 2) - 3")) is mk_int(-4)
    assert rk.normalize(parse_term(rk, "1 + 2 + 3")) is mk_int(6)
