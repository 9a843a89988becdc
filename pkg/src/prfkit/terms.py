"""Term AST, arity checking and bases.

Terms are immutable and hash-consed lazily: each node caches its hash and
arity on first use, so they are cheap to use as memo keys even when large.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator

from . import oracle


class TermError(Exception):
    pass


class ArityMismatch(TermError):
    def __init__(self, path: tuple, message: str):
        where = "/".join(str(p) for p in path) or "<root>"
        super().__init__(f"{message} at {where}")
        self.path = path


class InfeasibleExpansion(TermError):
    """A derived node whose basis expansion cannot be materialized."""


class Term:
    """Base class for all nodes."""

    kind = "Term"
    _fields: tuple[str, ...] = ()

    def _key(self) -> tuple:
        return tuple(getattr(self, f) for f in self._fields)

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if type(self) is not type(other):
            return False
        return hash(self) == hash(other) and self._key() == other._key()

    def __ne__(self, other: object) -> bool:
        return not self.__eq__(other)

    def __hash__(self) -> int:
        try:
            return self.__dict__["_h"]
        except KeyError:
            h = hash((self.kind,) + self._key())
            object.__setattr__(self, "_h", h)
            return h

    def children(self) -> tuple[Term, ...]:
        return ()

    def __str__(self) -> str:
        from .parser import render

        return render(self)


def _node(cls):
    cls = dataclass(frozen=True, eq=False)(cls)
    cls.kind = cls.__name__
    cls._fields = tuple(f.name for f in cls.__dataclass_fields__.values() if f.compare)
    return cls


@_node
class Const(Term):
    n: int


@_node
class Succ(Term):
    pass


@_node
class Proj(Term):
    n: int
    k: int


@_node
class Atom(Term):
    name: str


@_node
class Subst(Term):
    f: Term
    gs: tuple[Term, ...]

    def children(self):
        return (self.f,) + self.gs


@_node
class Compose(Term):
    f: Term
    g: Term

    def children(self):
        return (self.f, self.g)


@_node
class PrimRec(Term):
    f: Term
    g: Term

    def children(self):
        return (self.f, self.g)


@_node
class MixedIter(Term):
    h: Term

    def children(self):
        return (self.h,)


@_node
class MixedIterA(Term):
    h: Term
    a: int

    def children(self):
        return (self.h,)


@_node
class PureIter(Term):
    f: Term

    def children(self):
        return (self.f,)


@_node
class PureIterA(Term):
    f: Term
    a: int

    def children(self):
        return (self.f,)


@_node
class Power(Term):
    f: Term
    n: int

    def children(self):
        return (self.f,)


class _Binary(Term):
    f: Term
    g: Term

    def children(self):
        return (self.f, self.g)


@_node
class OpAdd(_Binary):
    f: Term
    g: Term


@_node
class OpMonus(_Binary):
    f: Term
    g: Term


@_node
class OpDist(_Binary):
    f: Term
    g: Term


@_node
class OpAmbMinus(_Binary):
    f: Term
    g: Term


@_node
class OpPairJ(_Binary):
    f: Term
    g: Term


@_node
class OpPlus(Term):
    f: Term

    def children(self):
        return (self.f,)


MACRO_OPS = {"minus": 1, "oplus": 2, "ominus": 2, "otimes": 2, "cond": 2}


@_node
class Macro(Term):
    """A derived operator applied to unary operands, evaluated from its
    arithmetic definition.  Not part of any basis; the constructions module
    lowers macros to :class:`Derived` nodes."""

    op: str
    args: tuple[Term, ...]

    def children(self):
        return self.args


@dataclass(frozen=True, eq=False)
class Derived(Term):
    """A node with two faces: ``shallow`` (direct arithmetic meaning) and a
    lazily built expansion into some basis.

    Equality is by ``label`` and ``operands`` only; builders are required to
    be deterministic in those.
    """

    label: str
    operands: tuple[Term, ...]
    shallow: Term = field(compare=False)
    expander: Callable[[], Term] = field(compare=False, repr=False)
    intro: frozenset = field(compare=False, default=frozenset())

    kind = "Derived"
    _fields = ("label", "operands")

    def children(self):
        return self.operands

    def expand(self) -> Term:
        cached = self.__dict__.get("_expansion")
        if cached is not None:
            return cached
        err = self.__dict__.get("_failure")
        if err is not None:
            raise InfeasibleExpansion(err)
        try:
            t = self.expander()
        except InfeasibleExpansion as e:
            object.__setattr__(self, "_failure", str(e))
            raise
        object.__setattr__(self, "_expansion", t)
        return t

    def try_expand(self) -> Term | None:
        try:
            return self.expand()
        except InfeasibleExpansion:
            return None


BINARY_OPS = (OpAdd, OpMonus, OpDist, OpAmbMinus, OpPairJ)
NODE_KINDS = (
    "Subst",
    "Compose",
    "PrimRec",
    "MixedIter",
    "MixedIterA",
    "PureIter",
    "PureIterA",
    "Power",
    "OpAdd",
    "OpMonus",
    "OpDist",
    "OpAmbMinus",
    "OpPairJ",
    "OpPlus",
)

I = PureIter(Succ())  # identity via successor iteration


def unfold(t: Term) -> Term:
    """Peel top-level derived nodes, exposing the construction beneath."""
    while isinstance(t, Derived):
        t = t.expand()
    return t


# -- arity ----------------------------------------------------------------------


def atom_arity(name: str) -> int:
    try:
        return oracle.lookup(name).arity
    except oracle.UnknownName:
        raise TermError(f"unregistered atom {name!r}") from None


def arity(t: Term) -> int:
    """Number of arguments of the function ``t`` denotes."""
    cached = t.__dict__.get("_arity")
    if cached is not None:
        return cached
    a = _arity(t, ())
    return a


def _set(t: Term, a: int) -> int:
    object.__setattr__(t, "_arity", a)
    return a


def _arity(t: Term, path: tuple) -> int:
    cached = t.__dict__.get("_arity")
    if cached is not None:
        return cached
    k = t.kind
    if k in ("Const", "Succ"):
        if k == "Const" and t.n < 0:
            raise ArityMismatch(path, "negative constant")
        return _set(t, 1)
    if k == "Proj":
        if not (1 <= t.k <= t.n):
            raise ArityMismatch(path, f"projection pr[{t.n},{t.k}] needs 1 <= k <= n")
        return _set(t, t.n)
    if k == "Atom":
        return _set(t, atom_arity(t.name))
    if k == "Subst":
        if not t.gs:
            raise ArityMismatch(path, "substitution needs at least one argument")
        af = _arity(t.f, path + ("f",))
        if af != len(t.gs):
            raise ArityMismatch(path, f"function of arity {af} given {len(t.gs)} arguments")
        ags = {_arity(g, path + (i,)) for i, g in enumerate(t.gs)}
        if len(ags) != 1:
            raise ArityMismatch(path, f"substituted functions disagree on arity {sorted(ags)}")
        return _set(t, ags.pop())
    if k == "Compose":
        if _arity(t.f, path + ("f",)) != 1:
            raise ArityMismatch(path, "composition needs a unary outer function")
        return _set(t, _arity(t.g, path + ("g",)))
    if k == "PrimRec":
        af = _arity(t.f, path + ("f",))
        ag = _arity(t.g, path + ("g",))
        if ag != af + 2:
            raise ArityMismatch(path, f"recursion step has arity {ag}, expected {af + 2}")
        return _set(t, af + 1)
    if k in ("MixedIter", "MixedIterA"):
        if _arity(t.h, path + ("h",)) != 2:
            raise ArityMismatch(path, "mixed iteration needs a binary step")
        if k == "MixedIterA" and t.a < 0:
            raise ArityMismatch(path, "negative base value")
        return _set(t, 1)
    if k in ("PureIter", "PureIterA", "Power", "OpPlus"):
        if _arity(t.f, path + ("f",)) != 1:
            raise ArityMismatch(path, f"{k} needs a unary operand")
        if k == "PureIterA" and t.a < 0 or k == "Power" and t.n < 0:
            raise ArityMismatch(path, "negative literal")
        return _set(t, 1)
    if k in ("OpAdd", "OpMonus", "OpDist", "OpAmbMinus", "OpPairJ"):
        if _arity(t.f, path + ("f",)) != 1 or _arity(t.g, path + ("g",)) != 1:
            raise ArityMismatch(path, f"{k} needs unary operands")
        return _set(t, 1)
    if k == "Macro":
        if MACRO_OPS.get(t.op) != len(t.args):
            raise ArityMismatch(path, f"bad macro {t.op}/{len(t.args)}")
        for i, a in enumerate(t.args):
            if _arity(a, path + (i,)) != 1:
                raise ArityMismatch(path, f"{t.op} needs unary operands")
        return _set(t, 1)
    if k == "Derived":
        return _set(t, _arity(t.shallow, path + (t.label,)))
    raise TermError(f"unknown node {t!r}")


# -- bases ------------------------------------------------------------------------


@dataclass(frozen=True)
class Basis:
    """Allowed leaves and node kinds.

    ``atoms`` holds atom names plus the pseudo-atoms ``"S"`` (successor),
    ``"pr"`` (all projections), ``"c<n>"`` (one constant) and ``"c*"`` (any
    constant).  ``offsets`` restricts the base value of the offset iteration
    nodes when not None.
    """

    name: str
    atoms: frozenset
    kinds: frozenset
    notes: str = ""
    offsets: frozenset | None = None

    def extended(self, name: str, atoms=(), kinds=()) -> "Basis":
        return Basis(name, self.atoms | set(atoms), self.kinds | set(kinds), self.notes, self.offsets)

    def without(self, name: str, atoms=()) -> "Basis":
        return Basis(name, self.atoms - set(atoms), self.kinds, self.notes, self.offsets)

    def allows_leaf(self, t: Term) -> bool:
        k = t.kind
        if k == "Succ":
            return "S" in self.atoms
        if k == "Proj":
            return "pr" in self.atoms
        if k == "Const":
            return "c*" in self.atoms or f"c{t.n}" in self.atoms
        if k == "Atom":
            return t.name in self.atoms
        return False


def _b(name, atoms, kinds, notes, offsets=None):
    return Basis(name, frozenset(atoms), frozenset(kinds), notes, offsets)


_UNARY = ("Compose", "Power")
_MULTI = ("Subst", "Compose", "Power")

BASES: dict[str, Basis] = {}


def _register(*bs: Basis) -> None:
    for b in bs:
        BASES[b.name] = b


_sec4 = _b("sec4", ["S", "pr", "O", "add2"], _MULTI + ("MixedIter",), "<S, I^n_k, O, +, subst, M[F]>")
_sec5d = _b("sec5-dist", ["S"], _UNARY + ("OpDist", "PureIter"), "<S, |F-G|, FG, F^#>")
_sec5m = _b("sec5-monus", ["S"], _UNARY + ("OpMonus", "PureIter"), "<S, F-.G, FG, F^#>")
_sec6e = _b("sec6-E", ["c1", "E"], _UNARY + ("OpPlus", "PureIter"), "<1, E, F^+, FG, F^#>")

_register(
    _b("prim", ["c0", "S", "pr"], ("Subst", "Compose", "PrimRec"), "<0, S, I^n_k, subst, R[F,G]>"),
    _b(
        "robinson-multi",
        ["S", "pr", "Sq", "O", "Hf", "Rt", "add2", "monus2", "dist2", "minus2"],
        _MULTI + ("MixedIter", "MixedIterA", "PureIter", "PureIterA"),
        "<S, I^n_k, Sq, O, Hf, Rt, +, -, subst, rec_5..rec_8>",
    ),
    _b(
        "robinson-unary",
        ["S", "Sq", "O", "Hf", "Rt"],
        _UNARY + ("OpAdd", "OpAmbMinus", "OpMonus", "OpDist", "PureIter"),
        "<S, Sq, O, Hf, Rt, F+G, F-G, FG, F^#>",
    ),
    _sec4,
    _sec4.without("sec4-noO", ["O"]),
    _b("sec4-Ma", ["S", "pr", "add2"], _MULTI + ("MixedIterA",), "<S, I^n_k, +, subst, M_a[F]>"),
    _sec5d,
    _sec5m,
    _b("sec5-dist-rec6", ["S"], _UNARY + ("OpDist", "PureIterA"), "<S, |F-G|, FG, F^#(a)>"),
    _b("sec5-monus-rec6", ["S"], _UNARY + ("OpMonus", "PureIterA"), "<S, F-.G, FG, F^#(a)>"),
    _sec6e,
    _b("sec6-K", ["c1", "K"], _sec6e.kinds, "<1, K, F^+, FG, F^#>"),
    _b("sec6-L", ["c1", "L"], _sec6e.kinds, "<1, L, F^+, FG, F^#>"),
    _b("sec6-E-a1", ["E"], _UNARY + ("OpPlus", "PureIterA"), "<E, F^+, FG, F^#(1)>", frozenset({1})),
    _b("sec6-K-a1", ["K"], _UNARY + ("OpPlus", "PureIterA"), "<K, F^+, FG, F^#(1)>", frozenset({1})),
    _b("sec6-L-a1", ["L"], _UNARY + ("OpPlus", "PureIterA"), "<L, F^+, FG, F^#(1)>", frozenset({1})),
    _b(
        "sec2",
        sorted(oracle.ATOMS) + ["S", "pr", "c*"],
        NODE_KINDS,
        "notation examples: any named function and operator",
    ),
)


def get_basis(name: str) -> Basis:
    try:
        return BASES[name]
    except KeyError:
        raise TermError(f"unknown basis {name!r}") from None


def find_violation(t: Term, b: Basis) -> tuple[tuple, Term] | None:
    """First node (as a path) of ``t`` not permitted by ``b``, or None."""
    seen: set[int] = set()
    stack: list[tuple[Term, tuple]] = [(t, ())]
    while stack:
        node, path = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        k = node.kind
        if k in ("Succ", "Proj", "Const", "Atom"):
            if not b.allows_leaf(node):
                return path, node
            continue
        if k == "Derived":
            exp = node.try_expand()
            if exp is not None:
                stack.append((exp, path + (node.label,)))
            else:
                bad = [x for x in node.intro if x not in b.kinds and x not in b.atoms]
                if bad:
                    return path, node
                for i, c in enumerate(node.operands):
                    stack.append((c, path + (node.label, i)))
            continue
        if k not in b.kinds:
            return path, node
        if k in ("PureIterA", "MixedIterA") and b.offsets is not None and node.a not in b.offsets:
            return path, node
        for i, c in reversed(list(enumerate(node.children()))):
            stack.append((c, path + (i,)))
    return None


def in_basis(t: Term, b: Basis | str) -> bool:
    if isinstance(b, str):
        b = get_basis(b)
    return find_violation(t, b) is None


def walk(t: Term) -> Iterator[Term]:
    """Pre-order traversal of syntactic children (derived nodes not expanded)."""
    stack = [t]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.children()))


def rebuild(t: Term, kids: tuple) -> Term:
    """A node of the same kind as ``t`` with children replaced by ``kids``."""
    k = t.kind
    if k == "Subst":
        return Subst(kids[0], tuple(kids[1:]))
    if k in ("Compose", "PrimRec", "OpAdd", "OpMonus", "OpDist", "OpAmbMinus", "OpPairJ"):
        return type(t)(kids[0], kids[1])
    if k in ("MixedIter", "PureIter", "OpPlus"):
        return type(t)(kids[0])
    if k in ("MixedIterA", "PureIterA"):
        return type(t)(kids[0], t.a)
    if k == "Power":
        return Power(kids[0], t.n)
    if k == "Macro":
        return Macro(t.op, tuple(kids))
    if not kids:
        return t
    raise TermError(f"cannot rebuild {k}")


def transform(t: Term, fn: Callable[[Term, tuple], Term | None]) -> Term:
    """Bottom-up rewrite.  ``fn(node, new_kids)`` returns a replacement or None
    to keep the node (rebuilt over the new children).  Derived nodes are
    handed to ``fn`` with empty kids and are never entered."""
    memo: dict[int, Term] = {}

    def go(n: Term) -> Term:
        hit = memo.get(id(n))
        if hit is not None:
            return hit
        if isinstance(n, Derived):
            out = fn(n, ())
            out = n if out is None else out
        else:
            kids = tuple(go(c) for c in n.children())
            out = fn(n, kids)
            if out is None:
                out = n if all(a is b for a, b in zip(kids, n.children())) else rebuild(n, kids)
        memo[id(n)] = out
        return out

    return go(t)


def inline(t: Term, labels) -> Term:
    """Replace derived nodes whose label is in ``labels`` by their expansion
    (one level: references inside the expansion stay)."""
    labels = set(labels)
    return transform(t, lambda n, kids: n.expand() if isinstance(n, Derived) and n.label in labels else None)


def fully_expandable(t: Term) -> bool:
    """Whether every derived node reachable from ``t`` can be expanded."""
    seen: set[int] = set()
    stack = [t]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        if isinstance(n, Derived):
            exp = n.try_expand()
            if exp is None:
                return False
            stack.append(exp)
        stack.extend(n.children())
    return True
