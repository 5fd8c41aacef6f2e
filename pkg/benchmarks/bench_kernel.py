"""Compare the compiled and pure-Python term kernels.

Each workload runs in a fresh interpreter so the kernel is chosen at
import time.  Usage: python3 benchmarks/bench_kernel.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

WORKLOADS = {
    "explore-addition": (
        "from syncrw import load_paths, explore\n"
        "p = load_paths([{corpus!r} + '/connectors.ers'])\n"
        "g = explore(p.get('ADDITION'))\n"
        "assert len(g) == 208\n"),
    "split-controlled-trains": (
        "from syncrw import load_paths, explore, split\n"
        "p = load_paths([{corpus!r} + '/trains.ers'])\n"
        "pm = split(p.get('CONTROLLED-TRAINS'))\n"
        "g = explore(pm, max_depth=14)\n"),
    "ac-matching": (
        "from syncrw.terms import Symbol, make, mk_var, mk_int, match\n"
        "s = Symbol('__', 2, 'B', assoc=True, comm=True, parts=[None, None])\n"
        "subj = make(s, [mk_int(i % 7) for i in range(12)])\n"
        "pat = make(s, [mk_var('X', 'Int'), mk_var('Y', 'Int'), mk_var('R', 'Int')])\n"
        "class O:\n"
        "    def sort_ok(self, t, s):\n"
        "        return True\n"
        "    def is_collector(self, v, sym):\n"
        "        return v.name == 'R'\n"
        "n = 0\n"
        "for _ in range(200):\n"
        "    n += sum(1 for _ in match(pat, subj, O()))\n"),
}

TIMER = (
    "import time\n"
    "t0 = time.perf_counter()\n"
    "{body}"
    "import syncrw.terms\n"
    "print(time.perf_counter() - t0, syncrw.terms.COMPILED)\n")


def run(body: str, pure: bool) -> tuple[float, bool]:
    env = dict(os.environ)
    env.pop("SYNCRW_PURE", None)
    if pure:
        env["SYNCRW_PURE"] = "1"
    code = TIMER.format(body=body.format(corpus=str(CORPUS)))
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    secs, compiled = out.stdout.split()
    return float(secs), compiled == "True"


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    rows = []
    for name, body in WORKLOADS.items():
        pure = min(run(body, True)[0] for _ in range(args.repeat))
        results = [run(body, False) for _ in range(args.repeat)]
        fast = min(r[0] for r in results)
        rows.append({"workload": name, "pure_s": round(pure, 4), "default_s": round(fast, 4),
                     "compiled": results[0][1], "speedup": round(pure / fast, 2)})
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    print(f"{'workload':28} {'pure (s)':>10} {'default (s)':>12} {'compiled':>9} {'speedup':>8}")
    for r in rows:
        print(f"{r['workload']:28} {r['pure_s']:>10} {r['default_s']:>12} "
              f"{str(r['compiled']):>9} {r['speedup']:>8}")


if __name__ == "__main__":
    main()
