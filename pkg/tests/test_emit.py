import pytest

from conftest import corpus, corpus_systems
from syncrw.emit import emit_plain
from syncrw.explorer import explore, graphs_equal
from syncrw.frontend.resolve import load_text
from syncrw.split import split


@pytest.mark.parametrize("prune", [False, True])
@pytest.mark.parametrize("stem,name", corpus_systems())
def test_emitted_module_reads_back(stem, name, prune):
    pm = split(corpus(stem).get(name), prune)
    prog = load_text(emit_plain(pm), "<emitted>")
    assert prog.ok, [str(d) for d in prog.errors()]
    back = prog.get(name)
    assert len(back.rules) == len(pm.rules)
    ok, why = graphs_equal(explore(pm, max_depth=5), explore(back, max_depth=5))
    assert ok, why


def test_header_describes_the_split(trains):
    text = emit_plain(split(trains.get("RECKONED-TRAINS")))
    head = text.splitlines()[:5]
    assert head[0] == "--- split of RECKONED-TRAINS"
    assert head[1].startswith("--- criteria: ")
    assert head[2].startswith("--- rule combinations before subset expansion: ")
    assert head[4] == "--- not pruned"


def test_header_can_be_left_out(trains):
    text = emit_plain(split(trains.get("TRAIN")), header=False)
    assert text.startswith("pmod TRAIN is")
    assert text.rstrip().endswith("endpm")
