"""Egalitarian rewrite systems: half-rewrite semantics, synchronized
composition through property criteria, split into plain rewrite systems,
and bounded exploration."""

from .compose import ComposedSystem, SyncCriterion
from .egrw import AtomicModule, EgRule, check_admissible, check_topmost, half_successors, \
    is_readable_syntactic, make_readable
from .emit import emit_plain
from .explorer import check_invariant, explore, graphs_equal, search
from .frontend.resolve import load_paths, load_text, parse_term
from .split import PlainModule, prune_rules, split, split_atomic, split_composed
from .terms import COMPILED

__version__ = "0.1.0"

__all__ = ["AtomicModule", "ComposedSystem", "EgRule", "PlainModule", "SyncCriterion",
           "check_admissible", "check_invariant", "check_topmost", "emit_plain", "explore",
           "graphs_equal", "half_successors", "is_readable_syntactic", "load_paths", "load_text",
           "make_readable", "parse_term", "prune_rules", "search", "split", "split_atomic",
           "split_composed", "COMPILED"]
