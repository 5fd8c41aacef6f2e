"""Term kernel: symbols, hash-consed terms, canonical forms, substitution, matching.

This file is plain Python and is also compiled unchanged by Cython into
``syncrw._ckernel`` when a C compiler is available.  ``syncrw.terms``
picks one of the two at import time, so nothing outside that module should
import from here directly.

Terms are interned: two structurally equal terms are the same object, so
equality is identity and hashing is by ``id``.  Every constructor goes
through the interning factories below.
"""

__all__ = [
    "Symbol", "Term", "Var", "IntLit", "Apply", "AcApply",
    "mk_var", "mk_int", "mk_app", "mk_ac", "make",
    "canonicalize", "substitute", "match", "term_vars",
    "UnsupportedPattern", "InstantiationError",
]


class UnsupportedPattern(Exception):
    """An AC pattern outside the elements-plus-one-collector fragment."""


class InstantiationError(Exception):
    """A variable was left unbound where a ground term is required."""


class Symbol:
    """An operator symbol, identified by namespace, name and arity.

    ``parts`` is the mixfix pattern split into keywords and ``None`` holes;
    it is only used by the parser and printer.  ``builtin`` is an optional
    callable evaluating the symbol on normalized arguments.
    """

    __slots__ = ("name", "arity", "ns", "assoc", "comm", "identity", "prec",
                 "parts", "builtin", "role", "_key")

    def __init__(self, name, arity, ns="", assoc=False, comm=False, prec=0,
                 parts=None, role=None):
        self.name = name
        self.arity = arity
        self.ns = ns
        self.assoc = assoc
        self.comm = comm
        self.identity = None
        self.prec = prec
        self.parts = parts
        self.builtin = None
        self.role = role
        self._key = (name, arity, ns)

    @property
    def ac(self):
        return self.assoc and self.comm

    @property
    def qname(self):
        return self.ns + "." + self.name if self.ns else self.name

    def __repr__(self):
        return "Symbol(%s/%d)" % (self.qname, self.arity)


class Term:
    """Base class of interned terms.

    ``key`` is the canonical order key; ``ground`` is true when the term has
    no variables.
    """

    __slots__ = ("key", "ground")

    def __lt__(self, other):
        return self.key < other.key


class Var(Term):
    __slots__ = ("name", "sort")

    def __repr__(self):
        return "%s:%s" % (self.name, self.sort)


class IntLit(Term):
    __slots__ = ("value",)

    def __repr__(self):
        return str(self.value)


class Apply(Term):
    __slots__ = ("sym", "args")

    def __repr__(self):
        if not self.args:
            return self.sym.name
        return "%s(%s)" % (self.sym.name, ", ".join(repr(a) for a in self.args))


class AcApply(Term):
    """Flattened application of an assoc-comm symbol; children sorted by key."""

    __slots__ = ("sym", "args")

    def __repr__(self):
        return "%s{%s}" % (self.sym.name, ", ".join(repr(a) for a in self.args))


_VARS = {}
_INTS = {}
_APPS = {}
_ACS = {}


def mk_var(name, sort):
    k = (name, sort)
    t = _VARS.get(k)
    if t is None:
        t = Var()
        t.name = name
        t.sort = sort
        t.ground = False
        t.key = (2, name, str(sort))
        _VARS[k] = t
    return t


def mk_int(value):
    t = _INTS.get(value)
    if t is None:
        t = IntLit()
        t.value = value
        t.ground = True
        t.key = (0, value)
        _INTS[value] = t
    return t


def mk_app(sym, args):
    """Raw interned application; the caller guarantees canonical arguments."""
    args = tuple(args)
    k = (sym, args)
    t = _APPS.get(k)
    if t is None:
        t = Apply()
        t.sym = sym
        t.args = args
        g = True
        for a in args:
            if not a.ground:
                g = False
                break
        t.ground = g
        t.key = (1, sym.name, sym.arity, tuple([a.key for a in args]), sym.ns)
        _APPS[k] = t
    return t


def mk_ac(sym, children):
    """Raw interned AC node; ``children`` must be flat and sorted."""
    children = tuple(children)
    k = (sym, children)
    t = _ACS.get(k)
    if t is None:
        t = AcApply()
        t.sym = sym
        t.args = children
        g = True
        for a in children:
            if not a.ground:
                g = False
                break
        t.ground = g
        t.key = (1, sym.name, sym.arity, tuple([a.key for a in children]), sym.ns)
        _ACS[k] = t
    return t


def _sort_key(t):
    return t.key


def make(sym, args):
    """Canonicalizing constructor, assuming the arguments are canonical."""
    if sym.assoc and sym.comm:
        ident = sym.identity
        flat = []
        for a in args:
            if type(a) is AcApply and a.sym is sym:
                flat.extend(a.args)
            elif a is ident:
                continue
            else:
                flat.append(a)
        if not flat:
            if ident is None:
                raise ValueError("empty %s collection without identity" % sym.name)
            return ident
        if len(flat) == 1:
            return flat[0]
        flat.sort(key=_sort_key)
        return mk_ac(sym, flat)
    if sym.comm and len(args) == 2:
        a, b = args
        if b.key < a.key:
            return mk_app(sym, (b, a))
        return mk_app(sym, (a, b))
    return mk_app(sym, args)


def canonicalize(t):
    """Rebuild ``t`` bottom-up so AC nodes are flat, identity-free and sorted."""
    tp = type(t)
    if tp is Apply or tp is AcApply:
        return make(t.sym, [canonicalize(a) for a in t.args])
    return t


def substitute(t, subst, strict=False):
    """Simultaneous replacement followed by canonicalization.

    With ``strict`` an unbound variable raises InstantiationError.
    """
    if t.ground:
        return t
    tp = type(t)
    if tp is Var:
        r = subst.get(t)
        if r is None:
            if strict:
                raise InstantiationError(t.name)
            return t
        return r
    return make(t.sym, [substitute(a, subst, strict) for a in t.args])


def term_vars(t, acc=None):
    """Variables of ``t`` in left-to-right first-occurrence order."""
    if acc is None:
        acc = {}
    if not t.ground:
        tp = type(t)
        if tp is Var:
            acc[t] = None
        else:
            for a in t.args:
                term_vars(a, acc)
    return acc


def match(pattern, subject, oracle, subst=None):
    """Yield every substitution extending ``subst`` that maps pattern to subject.

    ``oracle`` supplies ``sort_ok(term, sort)`` for binding checks and
    ``is_collector(var, sym)`` to tell the collector variable of an AC
    pattern from element variables.  Results are deduplicated.
    """
    if subst is None:
        subst = {}
    if pattern.ground:
        if pattern is subject:
            yield subst
        return
    seen = set()
    for s in _match(pattern, subject, oracle, subst):
        k = frozenset(s.items())
        if k not in seen:
            seen.add(k)
            yield s


def _match(p, s, oracle, subst):
    if p.ground:
        if p is s:
            yield subst
        return
    tp = type(p)
    if tp is Var:
        bound = subst.get(p)
        if bound is not None:
            if bound is s:
                yield subst
        elif oracle.sort_ok(s, p.sort):
            ext = dict(subst)
            ext[p] = s
            yield ext
        return
    if tp is AcApply:
        yield from _match_ac(p, s, oracle, subst)
        return
    if type(s) is not Apply or s.sym is not p.sym:
        return
    sym = p.sym
    if sym.comm and len(p.args) == 2:
        yield from _match_args(p.args, s.args, 0, oracle, subst)
        if s.args[0] is not s.args[1]:
            yield from _match_args(p.args, (s.args[1], s.args[0]), 0, oracle, subst)
        return
    yield from _match_args(p.args, s.args, 0, oracle, subst)


def _match_args(ps, ss, i, oracle, subst):
    if i == len(ps):
        yield subst
        return
    for s1 in _match(ps[i], ss[i], oracle, subst):
        yield from _match_args(ps, ss, i + 1, oracle, s1)


def _match_ac(p, s, oracle, subst):
    sym = p.sym
    if type(s) is AcApply and s.sym is sym:
        children = s.args
    elif s is sym.identity:
        children = ()
    else:
        children = (s,)
    elems = []
    collector = None
    for c in p.args:
        if type(c) is Var and oracle.is_collector(c, sym):
            if collector is not None:
                raise UnsupportedPattern(
                    "more than one collector variable under %s" % sym.name)
            collector = c
        else:
            elems.append(c)
    n = len(children)
    if len(elems) > n or (collector is None and len(elems) != n):
        return
    # Constrained element patterns first so variables see fewer candidates.
    elems.sort(key=lambda e: type(e) is Var)
    used = [False] * n
    yield from _assign(elems, 0, children, used, collector, sym, oracle, subst)


def _assign(elems, i, children, used, collector, sym, oracle, subst):
    n = len(children)
    if i == len(elems):
        if collector is None:
            yield subst
            return
        rest = [children[j] for j in range(n) if not used[j]]
        if not rest:
            if sym.identity is None:
                return
            value = sym.identity
        elif len(rest) == 1:
            value = rest[0]
        else:
            value = mk_ac(sym, rest)
        bound = subst.get(collector)
        if bound is not None:
            if bound is value:
                yield subst
        elif oracle.sort_ok(value, collector.sort):
            ext = dict(subst)
            ext[collector] = value
            yield ext
        return
    tried = set()
    for j in range(n):
        if used[j]:
            continue
        c = children[j]
        # Identical unused children give identical assignments.
        if c in tried:
            continue
        tried.add(c)
        used[j] = True
        for s1 in _match(elems[i], c, oracle, subst):
            yield from _assign(elems, i + 1, children, used, collector, sym, oracle, s1)
        used[j] = False
