import os
import subprocess
import sys

import pytest

from syncrw import terms
from syncrw.terms import AcApply, InstantiationError, Symbol, UnsupportedPattern, \
    canonicalize, make, match, mk_app, mk_int, mk_var, substitute, vars_of

NS = "K"
A, B = Symbol("a", 0, NS), Symbol("b", 0, NS)
F = Symbol("f", 2, NS)
G = Symbol("g", 2, NS, comm=True)
U = Symbol("u", 2, NS, assoc=True, comm=True)
E = Symbol("e", 0, NS)
U.identity = make(E, [])
a, b = make(A, []), make(B, [])
X, Y = mk_var("X", "S"), mk_var("Y", "S")
R = mk_var("R", "Bag")


class Anything:
    def sort_ok(self, t, sort):
        return True

    def is_collector(self, v, sym):
        return v.sort == "Bag"


def test_hash_consing_gives_identity():
    assert make(F, [a, b]) is make(F, [a, b])
    assert mk_int(7) is mk_int(7)
    assert mk_var("X", "S") is X
    assert make(F, [a, b]) is not make(F, [b, a])


def test_comm_arguments_are_ordered():
    assert make(G, [a, b]) is make(G, [b, a])


def test_ac_flattening_identity_and_order():
    t = make(U, [make(U, [b, a]), U.identity, a])
    assert type(t) is AcApply
    assert t.args == tuple(sorted((a, a, b), key=lambda x: x.key))
    assert make(U, [U.identity, U.identity]) is U.identity
    assert make(U, [a, U.identity]) is a


def test_ac_without_identity_rejects_empty():
    V = Symbol("v", 2, NS, assoc=True, comm=True)
    with pytest.raises(ValueError):
        make(V, [])


def test_canonicalize_raw_trees():
    raw = mk_app(U, (mk_app(U, (b, a)), mk_app(U, (a, U.identity))))
    assert canonicalize(raw) is make(U, [a, a, b])


def test_substitute_and_strict_mode():
    t = make(F, [X, make(U, [Y, a])])
    assert substitute(t, {X: a, Y: b}) is make(F, [a, make(U, [a, b])])
    assert substitute(t, {Y: U.identity}) is make(F, [X, a])
    with pytest.raises(InstantiationError):
        substitute(t, {X: a}, strict=True)
    assert vars_of(t) == [X, Y]


def _all(p, s):
    return [dict(x) for x in match(p, s, Anything())]


def test_free_match_with_repeated_variable():
    assert _all(make(F, [X, X]), make(F, [a, a])) == [{X: a}]
    assert _all(make(F, [X, X]), make(F, [a, b])) == []


def test_comm_match_tries_both_orders():
    got = _all(make(G, [X, Y]), make(G, [a, b]))
    assert {(s[X], s[Y]) for s in got} == {(a, b), (b, a)}


def test_ac_match_with_collector():
    subj = make(U, [a, a, b])
    got = _all(make(U, [X, R]), subj)
    assert {(s[X], s[R]) for s in got} == {(a, make(U, [a, b])), (b, make(U, [a, a]))}
    assert _all(make(U, [a, a, b, R]), subj) == [{R: U.identity}]


def test_ac_match_without_collector_needs_exact_size():
    assert _all(make(U, [X, Y]), make(U, [a, a, b])) == []


def test_two_collectors_are_unsupported():
    R2 = mk_var("R2", "Bag")
    with pytest.raises(UnsupportedPattern):
        _all(make(U, [R, R2]), make(U, [a, b]))


def test_match_extends_a_given_substitution():
    got = list(match(make(F, [X, Y]), make(F, [a, b]), Anything(), {X: a}))
    assert got == [{X: a, Y: b}]
    assert list(match(make(F, [X, Y]), make(F, [a, b]), Anything(), {X: b})) == []


def test_pure_and_compiled_kernels_agree(tmp_path):
    script = (
        "from syncrw import load_paths, explore, split, emit_plain\n"
        "from syncrw.terms import COMPILED\n"
        "import sys\n"
        "p = load_paths([sys.argv[1]])\n"
        "g = explore(p.get('CONTROLLED-TRAINS'), max_depth=10)\n"
        "print(COMPILED, len(g), len(g.edges))\n"
        "print(emit_plain(split(p.get('RECKONED-TRAINS'), prune=True)))\n"
    )
    corpus = os.path.join(os.path.dirname(__file__), "..", "corpus", "trains.ers")
    outs = {}
    for pure in (True, False):
        env = dict(os.environ)
        env.pop("SYNCRW_PURE", None)
        if pure:
            env["SYNCRW_PURE"] = "1"
        r = subprocess.run([sys.executable, "-c", script, corpus], env=env,
                           capture_output=True, text=True, check=True)
        first, rest = r.stdout.split("\n", 1)
        flag, nodes, edges = first.split()
        outs[pure] = (flag, nodes, edges, rest)
    assert outs[True][0] == "False"
    assert outs[True][1:] == outs[False][1:]
    assert outs[False][0] == str(terms.COMPILED)
