"""Command-line interface.

Exit codes: 0 success (invariant holds, goal found), 1 negative answer
(invariant violated, goal not found), 2 diagnostics or usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .diagnostics import Diagnostic
from .emit import emit_plain
from .errors import SyncrwError
from .explorer import DEFAULT_MAX_NODES, SCHEMA, as_view, check_invariant, explore, \
    export_dot, export_json, search, to_json
from .frontend.resolve import engine_of, load_paths, load_units, parse_term
from .frontend.syntax import parse_file
from .printer import term_str
from .split import split


class _Fail(Exception):
    def __init__(self, diagnostics):
        self.diagnostics = diagnostics


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="syncrw",
                                description="Egalitarian rewrite systems with synchronized "
                                            "composition.")
    p.add_argument("--format", choices=("text", "json"), default="text",
                   help="output format (default: text)")
    sub = p.add_subparsers(dest="command", required=True)

    def with_module(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("file", type=Path)
        sp.add_argument("-m", "--module", required=True)
        sp.add_argument("--format", choices=("text", "json"), default=argparse.SUPPRESS)
        return sp

    def with_bounds(sp):
        sp.add_argument("--max-nodes", type=int, default=DEFAULT_MAX_NODES)
        sp.add_argument("--max-depth", type=int, default=None)

    c = sub.add_parser("check", help="parse and resolve sources, print diagnostics")
    c.add_argument("files", type=Path, nargs="+")
    c.add_argument("--format", choices=("text", "json"), default=argparse.SUPPRESS)

    r = with_module("reduce", "normalize a term and print its least sort")
    r.add_argument("term")

    s = with_module("step", "print the successors of a stage")
    s.add_argument("term", help="a stage term, or init")

    e = with_module("explore", "explore the reachable stages")
    with_bounds(e)
    out = e.add_mutually_exclusive_group()
    out.add_argument("--dot", type=Path, help="write the graph in Graphviz format")
    out.add_argument("--json", type=Path, help="write the graph as JSON")

    i = with_module("invariant", "check that a formula holds at every reachable stage")
    i.add_argument("-f", "--formula", required=True)
    with_bounds(i)

    g = with_module("search", "find a shortest trace to a stage satisfying a goal")
    g.add_argument("-g", "--goal", required=True)
    with_bounds(g)

    sp = with_module("split", "emit the split plain module")
    sp.add_argument("--prune", action="store_true")
    sp.add_argument("-o", "--output", type=Path)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    js = args.format == "json"
    try:
        code, payload, text = _COMMANDS[args.command](args)
    except _Fail as f:
        code, text = 2, "\n".join(str(d) for d in f.diagnostics)
        payload = {"ok": False, "diagnostics": [d.to_json() for d in f.diagnostics]}
    except SyncrwError as e:
        d = Diagnostic("error", e.code, str(e), e.span)
        code, text = 2, str(d)
        payload = {"ok": False, "diagnostics": [d.to_json()]}
    except OSError as e:
        code, text = 2, f"error E-IO: {e}"
        payload = {"ok": False, "diagnostics": [{"severity": "error", "code": "E-IO",
                                                 "message": str(e)}]}
    if js:
        print(json.dumps({"schema": SCHEMA, "command": args.command, **payload}, indent=2,
                         sort_keys=True))
    elif text:
        print(text, file=sys.stderr if code == 2 else sys.stdout)
    return code


# -- subcommands ------------------------------------------------------------------------


def _load(args):
    prog = load_paths([args.file])
    if not prog.ok:
        raise _Fail(prog.errors())
    return prog, prog.get(args.module)


def cmd_check(args):
    units = [parse_file(f.read_text(encoding="utf-8"), str(f)) for f in args.files]
    prog = load_units(units)
    diags = prog.diagnostics
    ok = prog.ok
    lines = [str(d) for d in diags]
    mods = sorted(n for n in prog.syntax if n in prog)
    if ok:
        lines.append(f"ok: {len(mods)} modules")
    payload = {"ok": ok, "diagnostics": [d.to_json() for d in diags], "modules": mods}
    return (0 if ok else 2), payload, "\n".join(lines)


def cmd_reduce(args):
    _, system = _load(args)
    eng = engine_of(system)
    t = parse_term(system, args.term)
    nf = eng.normalize(t)
    sort = eng.sort_of_normal(nf)
    text = f"{term_str(nf)} : {sort}"
    return 0, {"ok": True, "term": term_str(nf), "sort": str(sort)}, text


def _stage(system, text):
    view = as_view(system)
    if text == "init":
        return view, view.init()
    return view, engine_of(system).normalize(parse_term(system, text))


def cmd_step(args):
    _, system = _load(args)
    view, t = _stage(system, args.term)
    succ = [view.render(u) for u in view.successors(t)]
    payload = {"ok": True, "stage": view.render(t), "successors": succ}
    return 0, payload, "\n".join(succ) if succ else "(no successors)"


def cmd_explore(args):
    _, system = _load(args)
    g = explore(system, args.max_nodes, args.max_depth)
    if args.dot:
        args.dot.write_text(export_dot(g), encoding="utf-8")
    if args.json:
        args.json.write_text(export_json(g), encoding="utf-8")
    dead = g.deadlocks()
    text = (f"{len(g)} stages, {len(g.edges)} edges, {len(dead)} deadlocks"
            + (f", truncated (frontier {g.frontier})" if g.truncated else ", exhaustive"))
    payload = {"ok": True, "nodes": len(g), "edges": len(g.edges), "deadlocks": len(dead),
               "truncated": g.truncated}
    if not args.dot and not args.json:
        payload["graph"] = to_json(g)
    return 0, payload, text


def _trace_lines(trace):
    return [f"  {i}: {s}" for i, s in enumerate(trace)]


def cmd_invariant(args):
    _, system = _load(args)
    v = check_invariant(system, args.formula, args.max_nodes, args.max_depth)
    lines = [f"{v.status}: {v.formula} ({len(v.graph)} stages explored)"]
    if v.trace:
        lines.append(f"counterexample, {len(v.trace) - 1} half-steps:")
        lines += _trace_lines(v.trace)
    return (0 if v.holds else 1), {"ok": True, **v.to_json()}, "\n".join(lines)


def cmd_search(args):
    _, system = _load(args)
    r = search(system, args.goal, args.max_nodes, args.max_depth)
    if r.found:
        lines = [f"found in {len(r.trace) - 1} half-steps:"] + _trace_lines(r.trace)
    else:
        lines = [f"not found ({len(r.graph)} stages explored"
                 + (", bounds reached)" if r.truncated else ", exhaustive)")]
    return (0 if r.found else 1), {"ok": True, **r.to_json()}, "\n".join(lines)


def cmd_split(args):
    _, system = _load(args)
    pm = split(system, prune=args.prune)
    text = emit_plain(pm)
    st = pm.stats
    payload = {"ok": True, "rules": len(pm.rules), "combinations": st.combinations,
               "generated": st.generated, "deleted": st.deleted,
               "conditions_removed": st.conditions_removed, "warnings": pm.warnings}
    if args.output:
        args.output.write_text(text, encoding="utf-8")
        msg = f"wrote {args.output}: {len(pm.rules)} rules"
        if not pm.atomic:
            msg += f" ({st.combinations} rule combinations, {st.generated} generated"
            msg += f", {st.deleted} deleted, {st.conditions_removed} conditions removed)"
        return 0, payload, "\n".join([*(f"warning: {w}" for w in pm.warnings), msg])
    payload["module"] = text
    return 0, payload, text.rstrip("\n")


_COMMANDS = {"check": cmd_check, "reduce": cmd_reduce, "step": cmd_step,
             "explore": cmd_explore, "invariant": cmd_invariant, "search": cmd_search,
             "split": cmd_split}


if __name__ == "__main__":
    sys.exit(main())
