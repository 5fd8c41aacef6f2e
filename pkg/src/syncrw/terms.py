"""Term kernel facade.

Loads the Cython build of the kernel when it is importable and falls back
to the pure-Python source otherwise.  Set ``SYNCRW_PURE=1`` to force the
fallback (the benchmark uses this to compare both).
"""

import os

if os.environ.get("SYNCRW_PURE"):
    from . import _kernel as _impl
else:
    try:
        from . import _ckernel as _impl
    except ImportError:
        from . import _kernel as _impl

COMPILED = _impl.__name__.endswith("_ckernel")

Symbol = _impl.Symbol
Term = _impl.Term
Var = _impl.Var
IntLit = _impl.IntLit
Apply = _impl.Apply
AcApply = _impl.AcApply
mk_var = _impl.mk_var
mk_int = _impl.mk_int
mk_app = _impl.mk_app
mk_ac = _impl.mk_ac
make = _impl.make
canonicalize = _impl.canonicalize
substitute = _impl.substitute
match = _impl.match
term_vars = _impl.term_vars
UnsupportedPattern = _impl.UnsupportedPattern
InstantiationError = _impl.InstantiationError


def apply(subst, term):
    """Instantiate ``term`` with ``subst``; unbound variables are kept."""
    return substitute(term, subst)


def vars_of(*terms):
    acc = {}
    for t in terms:
        term_vars(t, acc)
    return list(acc)


def is_app(t):
    return type(t) is Apply or type(t) is AcApply


def head(t):
    """Head symbol of an application, else None."""
    return t.sym if (type(t) is Apply or type(t) is AcApply) else None


def subterms(t):
    yield t
    if type(t) is Apply or type(t) is AcApply:
        for a in t.args:
            yield from subterms(a)
