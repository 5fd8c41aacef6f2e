import functools
from pathlib import Path

import pytest

from syncrw.frontend.resolve import load_paths, load_text

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
GOLDEN = Path(__file__).resolve().parent / "golden"


@functools.lru_cache(maxsize=None)
def corpus(name: str):
    prog = load_paths([CORPUS / f"{name}.ers"])
    assert prog.ok, [str(d) for d in prog.errors()]
    return prog


def corpus_systems() -> list:
    """``(file stem, system name)`` for every corpus system with an init."""
    out = []
    for path in sorted(CORPUS.glob("*.ers")):
        prog = corpus(path.stem)
        for name in prog.systems:
            sysm = prog.get(name)
            if hasattr(sysm, "rules") or hasattr(sysm, "components"):
                if sysm.init is not None:
                    out.append((path.stem, name))
    return out


def module(text: str, name: str):
    prog = load_text(text)
    assert prog.ok, [str(d) for d in prog.errors()]
    return prog.get(name)


def codes(text: str) -> list:
    return [d.code for d in load_text(text).diagnostics]


@pytest.fixture(scope="session")
def trains():
    return corpus("trains")


@pytest.fixture(scope="session")
def mutex():
    return corpus("mutex")


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion, failing if any of its cases failed."""
    verdicts: dict = {}
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            props = dict(getattr(rep, "user_properties", ()))
            name = props.get("criterion")
            if name is None:
                continue
            ok = key == "passed" and verdicts.get(name, True)
            verdicts[name] = ok if key == "passed" else False
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(verdicts, key=_CRITERIA_ORDER.index):
        terminalreporter.write_line(f"{'PASS' if verdicts[name] else 'FAIL'}  {name}")


_CRITERIA_ORDER = [
    "mutex",
    "controlled trains",
    "split commutation",
    "split counts",
    "readability",
    "half-rewrite tables",
    "connector patterns",
    "algebra laws",
    "property-based suites",
]


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion a test belongs to")


def pytest_runtest_setup(item):
    m = item.get_closest_marker("criterion")
    if m is not None:
        item.user_properties.append(("criterion", m.args[0]))
