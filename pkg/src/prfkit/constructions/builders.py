"""Builders that synthesize derived constructions.

Each builder returns a :class:`~prfkit.terms.Derived` node: its shallow face is
the operator's arithmetic meaning, its expansion is the construction inside
the section's basis.  Expansions refer to catalog entries by reference and are
built lazily, so nested builders cost nothing until evaluated deeply.
"""

from __future__ import annotations

from typing import Callable

from .. import oracle
from ..terms import (
    Atom,
    Compose,
    Derived,
    InfeasibleExpansion,
    Macro,
    MixedIter,
    MixedIterA,
    OpAdd,
    OpAmbMinus,
    OpDist,
    OpMonus,
    Power,
    Proj,
    PureIter,
    PureIterA,
    Subst,
    Succ,
    Term,
    arity,
)


class BuildError(Exception):
    pass


class UnsupportedNode(BuildError):
    def __init__(self, kind: str):
        super().__init__(f"Ackermann index undefined for node {kind}")
        self.kind = kind


class BadIndex(BuildError):
    pass


class NotDecreasingWitness(BuildError):
    pass


FLAVORS = ("dist", "monus")
VARIANTS = ("E", "K", "L")

_interned: dict[tuple, Derived] = {}


def _derived(label: str, operands: tuple, shallow: Term, expander: Callable[[], Term], intro=()) -> Derived:
    key = (label, operands)
    d = _interned.get(key)
    if d is None:
        d = Derived(label, operands, shallow, expander, frozenset(intro))
        _interned[key] = d
    return d


def _check_flavor(flavor: str) -> None:
    if flavor not in FLAVORS:
        raise BuildError(f"flavor must be one of {FLAVORS}, got {flavor!r}")


def diff(flavor: str, f: Term, g: Term) -> Term:
    """The section's difference operator."""
    return OpDist(f, g) if flavor == "dist" else OpMonus(f, g)


def compose(*ts: Term) -> Term:
    """Right-nested composition of unary terms, f1 f2 ... fn."""
    t = ts[-1]
    for f in reversed(ts[:-1]):
        t = Compose(f, t)
    return t


def _ref(section: str, name: str) -> Term:
    from . import catalog

    return catalog.reference(section, name)


# -- Ackermann index ---------------------------------------------------------------

_acker: dict[Term, int] = {}


def ackermann_index(t: Term) -> int:
    """Growth index over S, |F-G|, F-.G, FG, F^#; derived nodes are expanded.

    ``F^n`` counts as the right-nested chain F F ... F (``F^0`` as the
    identity S^#).  Raises :class:`InfeasibleExpansion` when some expansion
    on the way cannot be built.
    """
    hit = _acker.get(t)
    if hit is not None:
        return hit
    k = t.kind
    if k == "Derived":
        v = ackermann_index(t.expand())
    elif k == "Succ":
        v = 0
    elif k == "OpDist":
        v = max(ackermann_index(t.f), ackermann_index(t.g))
    elif k == "OpMonus":
        v = ackermann_index(t.f)
    elif k == "Compose":
        v = max(ackermann_index(t.f), ackermann_index(t.g)) + 2
    elif k == "PureIter":
        v = ackermann_index(t.f) + 1
    elif k == "Power":
        if t.n == 0:
            v = 1
        else:
            v = ackermann_index(t.f) + 2 * (t.n - 1)
    else:
        raise UnsupportedNode(k)
    _acker[t] = v
    return v


# -- sec5 ----------------------------------------------------------------------------


def _sec5(flavor: str) -> str:
    _check_flavor(flavor)
    return f"sec5-{flavor}"


def b_term(n: int, flavor: str) -> Term:
    """B_0 = S, B_{n+1} = (S^{f_n(1)} B_n)^#; later B's are references."""
    if n < 0:
        raise BadIndex(f"B_{n}")
    if n == 0:
        return Succ()
    try:
        lift = oracle.fn_value(n - 1, 1)
    except oracle.InfeasibleIndex as e:
        raise InfeasibleExpansion(f"B_{n} needs f_{n - 1}(1): {e}") from None
    return PureIter(Compose(Power(Succ(), lift), family_ref("B", n - 1, flavor)))


def f_term(n: int, flavor: str) -> Term:
    """f_0 = S, f_{n+1} = f_n^#(f_n(1))."""
    if n < 0:
        raise BadIndex(f"f_{n}")
    if n == 0:
        return Succ()
    try:
        start = oracle.fn_value(n - 1, 1)
    except oracle.InfeasibleIndex as e:
        raise InfeasibleExpansion(str(e)) from None
    return PureIterA(family_ref("f", n - 1, flavor), start)


def build_addition(f: Term, g: Term, flavor: str) -> Derived:
    """F + G = D B_k S - ((D B_k S - F) - G), k = max(A(F), A(G))."""
    section = _sec5(flavor)

    def expand() -> Term:
        k = max(ackermann_index(f), ackermann_index(g))
        top = compose(_ref(section, "D"), family_ref("B", k, flavor), Succ())
        return diff(flavor, top, diff(flavor, diff(flavor, top, f), g))

    kinds = ("Compose", "PureIter", "Power", "OpDist" if flavor == "dist" else "OpMonus")
    return _derived(f"{section}:add", (f, g), OpAdd(f, g), expand, kinds + ("S",))


def build_conditional(f: Term, g: Term, flavor: str, experimental: bool = False) -> Term:
    """(F -> G) = Div4 beta (D G + Sgn F).

    With ``experimental`` the result is instead the unproven candidate
    Div2 (Sq (O F + G) - Sq O F - Sq G) written with the ambiguous minus.  It
    is a plain term outside the section's basis, offered for exploration
    only; nothing in the catalog or the suites relies on it.
    """
    section = _sec5(flavor)
    if experimental:
        sq, o = _ref(section, "Sq"), _ref(section, "O")
        of = Compose(o, f)
        whole = Compose(sq, build_addition(of, g, flavor))
        return Compose(family_ref("Div", 2, flavor), OpAmbMinus(OpAmbMinus(whole, Compose(sq, of)), Compose(sq, g)))

    def expand() -> Term:
        inner = build_addition(Compose(_ref(section, "D"), g), Compose(_ref(section, "Sgn"), f), flavor)
        return compose(family_ref("Div", 4, flavor), _ref(section, "beta"), inner)

    return _derived(f"{section}:cond", (f, g), Macro("cond", (f, g)), expand, ("Compose",))


_FAMILY_MIN = {"O": 0, "M": 0, "C": 2, "Mod": 2, "Div": 2, "f": 0, "B": 0}


def build_family(family: str, n: int, flavor: str) -> Term:
    """The construction of a family member; smaller members appear as references."""
    section = _sec5(flavor)
    if family not in _FAMILY_MIN:
        raise BadIndex(f"unknown family {family!r}")
    if n < _FAMILY_MIN[family]:
        raise BadIndex(f"{family}_{n}: index must be >= {_FAMILY_MIN[family]}")
    ref = lambda name: _ref(section, name)  # noqa: E731
    fam = lambda p, m: family_ref(p, m, flavor)  # noqa: E731
    if family == "O":
        if n == 0:
            return ref("O")
        if n == 1:
            return Compose(ref("O"), build_addition(ref("O"), ref("P"), flavor))
        return Compose(fam("O", n - 1), ref("P"))
    if family == "M":
        return PureIter(Power(Succ(), n))
    if family == "C":
        if n == 2:
            return ref("O")
        return build_addition(fam("C", n - 1), Compose(fam("M", n - 1), fam("O", n - 2)), flavor)
    if family == "Mod":
        return PureIter(fam("C", n))
    if family == "Div":
        step = build_addition(Succ(), compose(ref("O"), fam("Mod", n + 1), Succ(), Succ()), flavor)
        return diff(flavor, PureIter(step), ref("I"))
    if family == "f":
        return f_term(n, flavor)
    return b_term(n, flavor)


def family_ref(family: str, n: int, flavor: str) -> Derived:
    """Reference node for a family member: oracle-valued when shallow.

    f_n and B_n have no oracle beyond n = 3; for n = 4 the shallow face is the
    construction itself, and from n = 5 on (which needs f_4(1)) the member
    cannot be built at all.
    """
    section = _sec5(flavor)
    name = f"{family}{n}"
    if n < _FAMILY_MIN.get(family, 0):
        raise BadIndex(name)
    if family in ("f", "B") and n > 3:
        face = build_family(family, n, flavor)
        return _derived(f"ref:{section}/{name}", (), face, lambda: face)
    return _derived(f"ref:{section}/{name}", (), Atom(name), lambda: build_family(family, n, flavor))


# -- sec4 ----------------------------------------------------------------------------


def _pred_mixed() -> Term:
    return MixedIter(Proj(2, 1))


def _sgn_mixed() -> Term:
    # Sgn = M[1] with the binary constant 1 = S M[pr[2,2]] pr[2,1]
    return MixedIter(compose(Succ(), MixedIter(Proj(2, 2)), Proj(2, 1)))


def cosignum_witness(fhat: Term, search_bound: int = 64) -> int | None:
    """Least a <= search_bound with F^(a) > F^(a + 1), or None."""
    from ..evaluator import EvalConfig, Session

    s = Session(EvalConfig(budget=10**7, mode="shallow"))
    prev = s.value(fhat, 0)
    for a in range(search_bound + 1):
        nxt = s.value(fhat, a + 1)
        if prev > nxt:
            return a
        prev = nxt
    return None


def build_cosignum_from(fhat: Term, search_bound: int = 64) -> Term:
    """O = Sgn H Sgn with G = F^ S^a and H = P^{G(1)} G."""
    from ..evaluator import evaluate

    if arity(fhat) != 1:
        raise BuildError("fhat must be unary")
    a = cosignum_witness(fhat, search_bound)
    if a is None:
        raise NotDecreasingWitness(f"no a <= {search_bound} with F(a) > F(a + 1)")
    g = Compose(fhat, Power(Succ(), a)) if a else fhat
    g1 = evaluate(fhat, (a + 1,)).value
    h = Compose(Power(_pred_mixed(), g1), g) if g1 else g
    sgn = _sgn_mixed()
    return compose(sgn, h, sgn)


def translate_offset(scheme: str, inner: Term, a: int, flavor: str = "monus") -> Term:
    """Rewrite M[inner] (mixed) or inner^# (pure) using only offset-a iteration."""
    if a < 1:
        raise BuildError("offset must be >= 1")
    if scheme == "mixed":
        if arity(inner) != 2:
            raise BuildError("mixed scheme needs a binary step")
        ph = Power(MixedIterA(Proj(2, 1), a), a)
        step = Compose(Power(Succ(), a), Subst(inner, (Proj(2, 1), Compose(ph, Proj(2, 2)))))
        return Compose(ph, MixedIterA(step, a))
    if scheme == "pure":
        _check_flavor(flavor)
        if arity(inner) != 1:
            raise BuildError("pure scheme needs a unary step")
        two = compose(Succ(), Succ(), diff(flavor, Succ(), Succ()))
        ph = Power(diff(flavor, Succ(), two), a)
        return Compose(ph, PureIterA(compose(Power(Succ(), a), inner, ph), a))
    raise BuildError(f"unknown scheme {scheme!r}")


# -- sec6 ----------------------------------------------------------------------------

SEC6_OPS = ("plus_arg_minus", "oplus", "ominus", "otimes", "add", "sub", "i_minus", "d_minus")

_SEC6_TEMPLATES = {
    "plus_arg_minus": "E S (M3 F E)^+ (Sq F^+)^+",
    "oplus": "(F^- E)^+ (Sq G)^+",
    "ominus": "(F^+ E)^- (Sq G)^+",
    "otimes": "Rt ((Hf Hf (Sq Ph ((Sq S Sq F (+) G) (-) Sq F) (-) Sq G)) (-) Sq F)",
    "add": "((Rt ((D (F^+ (x) G^+) (+) F^+) (+) G^+))^-)^-",
    "sub": "E S (Sq (F + G) + M3 F + G)",
    "i_minus": "K S S S ((Z F^+)^+)^+",
    "d_minus": "K S S S ((((Z (F^+)^+)^+)^+)^+)^+",
}

# predecessor used inside the product: x^2 + 3x minus (x + 1)^2
_SEC6_PHAT = "((Sq^+)^+)^+ (-) S"


def _sec6_shallow(op: str, f: Term, g: Term | None, variant: str) -> Term:
    if op == "plus_arg_minus":
        return Macro("minus", (f,))
    if op in ("oplus", "ominus", "otimes"):
        return Macro(op, (f, g))
    if op == "add":
        return OpAdd(f, g)
    if op == "sub":
        return OpAmbMinus(f, g)
    if op == "i_minus":
        return OpAmbMinus(Atom("I"), f)
    return OpAmbMinus(_ref(f"sec6-{variant}", "D"), f)


def build_sec6(op: str, f: Term, g: Term | None = None, variant: str = "E") -> Derived:
    """Derived operator of the F^+ algebra in the E, K or L basis."""
    if variant not in VARIANTS:
        raise BuildError(f"variant must be one of {VARIANTS}")
    if op not in SEC6_OPS:
        raise BuildError(f"unknown operator {op!r}")
    binary = op in ("oplus", "ominus", "otimes", "add", "sub")
    if binary == (g is None):
        raise BuildError(f"{op} takes {2 if binary else 1} operand(s)")
    if op in ("i_minus", "d_minus") and variant == "E":
        raise BuildError(f"{op} is a K/L template")
    section = f"sec6-{variant}"
    operands = (f, g) if binary else (f,)

    def expand() -> Term:
        from . import catalog
        from ..parser import parse

        env = dict(catalog.scope(section))
        env["F"] = f
        if g is not None:
            env["G"] = g
        if op == "otimes":
            env["Ph"] = catalog.lower(parse(_SEC6_PHAT, env), section)
        return catalog.lower(parse(_SEC6_TEMPLATES[op], env), section)

    return _derived(f"{section}:{op}", operands, _sec6_shallow(op, f, g, variant), expand, ("Compose", "OpPlus"))
