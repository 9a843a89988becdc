"""The construction catalog: named, section-tagged terms with oracle references.

Definitions live in the ``lets/`` files.  Loading a group parses its let-file,
lowers the surface operators to the group's builders and wraps every binding
in a reference node (label ``ref:<group>/<name>``).  A reference evaluates
shallowly through its oracle when the oracle is exact on the whole domain and
expands to the lowered body otherwise, so a wide-range check of one entry
trusts the entries it mentions while deep mode still sees the full basis term.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Iterable

from .. import oracle
from ..parser import LetBinding, parse_lets, render
from ..terms import Atom, Const, Derived, Succ, Term, arity, transform
from . import builders
from .builders import BuildError, family_ref


class UnknownId(KeyError):
    def __str__(self) -> str:
        return f"unknown catalog id {self.args[0]!r}"


class LoweringError(BuildError):
    pass


SECTIONS = ("sec2", "sec3", "sec4", "sec5-dist", "sec5-monus", "sec6-E", "sec6-K", "sec6-L", "remark-a")


def _ge(args) -> bool:
    return args[0] >= args[1]


@dataclass(frozen=True)
class Meta:
    oracle: str | None = None
    max_x: int = 256
    lo: int = 0
    where: Callable | None = None
    deep_x: int = 8
    budget: int = 2_000_000
    memo: int = 65_536


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    section: str
    name: str
    term: Term
    basis: str
    oracle_ref: str | None
    feasible_range: tuple[int, int]
    domain_lo: int = 0
    where: Callable | None = field(default=None, compare=False, repr=False)
    deep_x: int = 8
    memo_capacity: int = 65_536
    source: str | None = None
    group: str = ""
    ref: Derived | None = field(default=None, compare=False, repr=False)

    @property
    def arity(self) -> int:
        return arity(self.term)

    @property
    def max_x(self) -> int:
        return self.feasible_range[0]

    @property
    def budget(self) -> int:
        return self.feasible_range[1]

    @property
    def exact(self) -> bool:
        """The oracle describes the entry on its whole domain."""
        return self.oracle_ref is not None and self.domain_lo == 0 and self.where is None


@dataclass(frozen=True)
class Group:
    name: str
    section: str
    basis: str
    files: tuple[str, ...]
    lowering: str | None = None  # sec5 | sec6 | diff
    flavor: str = "monus"
    variant: str = "E"
    a: int = 0


# -- metadata -------------------------------------------------------------------------

_SEC2 = {n: Meta(n, 255, deep_x=255) for n in ("D", "O", "Pw", "V")}
_SEC2.update(zero=Meta("c0", 255, deep_x=255), ident=Meta("I", 255, deep_x=255))

_SEC4 = {n: Meta(n, 512, deep_x=64) for n in ("P", "N", "D", "Sq", "Hf")}
_SEC4.update(
    Pw=Meta("Pw", 512, deep_x=12),
    z=Meta(None, 64),
    e1=Meta(None, 16),
    e2=Meta(None, 16),
    fp=Meta(None, 64),
    g=Meta("pow2", 1 << 17, deep_x=8, budget=50_000_000, memo=0),
    delta=Meta("delta2", 16, deep_x=4, budget=20_000_000),
    Rt=Meta("Rt", 512, deep_x=32, budget=20_000_000),
    H=Meta("Hexc", 2048, deep_x=16, budget=20_000_000),
    minus=Meta("minus2", 64, where=_ge, deep_x=4, budget=20_000_000),
)

_SEC5 = {n: Meta(n, 256) for n in ("I", "D", "Pw", "Sgn", "P", "O", "alpha", "beta")}
_SEC5.update(zero=Meta("c0"), one=Meta("c1"))
_SEC5.update({f"W{i}": Meta(None, 64) for i in range(1, 6)})
_SEC5.update({n: Meta(n, 400) for n in ("W", "Q", "R", "Sq", "Rt", "Hf")})

_SEC6 = {n: Meta(n, 256) for n in ("S", "Sgn", "Mod3", "D", "M3", "O", "Q", "R", "Sq", "Hf", "Rt", "Y", "Z", "E", "K")}
_SEC6["zero"] = Meta("c0")

_A1 = {n: Meta(n, 64) for n in ("O", "S", "D", "Q", "K")}
_A1.update(
    zero=Meta("c0", 64),
    one=Meta("c1", 64),
    G=Meta("Gsq", 64),
    H=Meta("Hprod", 64),
    Ph=Meta("P", 64, lo=1),
    IterS=Meta("I", 64),
    IterOne=Meta("I", 64),
)


def _ma_meta(a: int) -> dict[str, Meta]:
    return {
        "Ph": Meta(f"Ph{a}", 64),
        "abar": Meta(f"c{a}", 64),
        "zero": Meta("c0", 64),
        "Oh": Meta(f"Oh{a}", 64),
    }


_REC6 = {"two": Meta("c2", 64), "Ph": Meta("P", 64, lo=1)}


def _family_meta(family: str, n: int) -> Meta:
    if family in ("f", "B"):
        if n > 3:
            return Meta(None, 2)
        if family == "B" and n == 3:
            return Meta("B3", 3, deep_x=1)
        return Meta(f"{family}{n}", 64 if n == 3 else 256, deep_x=4)
    return Meta(f"{family}{n}", 200, deep_x=6)


# -- groups ---------------------------------------------------------------------------

GROUPS: list[Group] = [
    Group("sec2", "sec2", "sec2", ("sec2.lets",)),
    Group("sec4", "sec4", "sec4", ("sec4.lets",)),
]
for _fl in builders.FLAVORS:
    GROUPS.append(
        Group(f"sec5-{_fl}", f"sec5-{_fl}", f"sec5-{_fl}", ("sec5.lets", f"sec5_{_fl}.lets", "sec5_tail.lets"), "sec5", _fl)
    )
for _v in builders.VARIANTS:
    GROUPS.append(Group(f"sec6-{_v}", f"sec6-{_v}", f"sec6-{_v}", (f"sec6_{_v}.lets",), "sec6", variant=_v))
for _v in builders.VARIANTS:
    GROUPS.append(Group(f"remark-a/{_v}1", "remark-a", f"sec6-{_v}-a1", (f"remark_{_v}1.lets",)))
for _a in (1, 2, 3):
    GROUPS.append(Group(f"remark-a/Ma{_a}", "remark-a", "sec4-Ma", ("remark_Ma.lets",), a=_a))
for _fl in builders.FLAVORS:
    GROUPS.append(Group(f"remark-a/rec6-{_fl}", "remark-a", f"sec5-{_fl}-rec6", ("remark_rec6.lets",), "diff", _fl))

_GROUPS = {g.name: g for g in GROUPS}


def _meta_table(g: Group) -> dict[str, Meta]:
    if g.name == "sec2":
        return _SEC2
    if g.name == "sec4":
        return _SEC4
    if g.lowering == "sec5":
        return _SEC5
    if g.lowering == "sec6":
        return _SEC6
    if g.name.startswith("remark-a/Ma"):
        return _ma_meta(g.a)
    if g.lowering == "diff":
        return _REC6
    return _A1


def _text(g: Group) -> str:
    base = resources.files("prfkit.constructions") / "lets"
    text = "\n".join((base / f).read_text() for f in g.files)
    return text.replace("{a}", str(g.a)) if g.a else text


# -- lowering -------------------------------------------------------------------------

_FAMILY_NAME = re.compile(r"^(O|M|C|Mod|Div|f|B)(\d+)$")


def lower(t: Term, section: str) -> Term:
    """Replace surface operators by the group's derived constructions.

    References (and other derived nodes) are left untouched.
    """
    g = _GROUPS.get(section)
    if g is None:
        raise UnknownId(section)
    if g.lowering is None:
        return t
    if g.lowering == "diff":
        fn = lambda n, k: builders.diff(g.flavor, *k) if n.kind == "OpAmbMinus" else None  # noqa: E731
        return transform(t, fn)
    if g.lowering == "sec5":
        return transform(t, lambda n, k: _lower5(n, k, g.flavor))
    return transform(t, lambda n, k: _lower6(n, k, g))


def _lower5(n: Term, kids: tuple, flavor: str) -> Term | None:
    k = n.kind
    if k == "Atom":
        m = _FAMILY_NAME.match(n.name)
        return family_ref(m.group(1), int(m.group(2)), flavor) if m else None
    if k == "OpAdd":
        return builders.build_addition(kids[0], kids[1], flavor)
    if k == "OpAmbMinus":
        return builders.diff(flavor, kids[0], kids[1])
    if k == "Macro":
        if n.op == "cond":
            return builders.build_conditional(kids[0], kids[1], flavor)
        raise LoweringError(f"operator {n.op!r} has no construction in the difference bases")
    return None


def _lower6(n: Term, kids: tuple, g: Group) -> Term | None:
    k, v = n.kind, g.variant
    if k == "OpAdd":
        return builders.build_sec6("add", kids[0], kids[1], v)
    if k == "OpAmbMinus":
        if v != "E" and n.f == Atom("I"):
            return builders.build_sec6("i_minus", kids[1], None, v)
        if v != "E" and isinstance(n.f, Derived) and n.f.label == f"ref:{g.name}/D":
            return builders.build_sec6("d_minus", kids[1], None, v)
        return builders.build_sec6("sub", kids[0], kids[1], v)
    if k == "Macro":
        if n.op == "minus":
            return builders.build_sec6("plus_arg_minus", kids[0], None, v)
        if n.op in ("oplus", "ominus", "otimes"):
            return builders.build_sec6(n.op, kids[0], kids[1], v)
        raise LoweringError(f"operator {n.op!r} has no construction in the F^+ bases")
    return None


# -- registry -------------------------------------------------------------------------


def _oracle_face(name: str) -> Term:
    if name == "S":
        return Succ()
    m = re.fullmatch(r"c(\d+)", name)
    if m:
        return Const(int(m.group(1)))
    return Atom(name)


class _Registry:
    def __init__(self):
        self.entries: dict[str, CatalogEntry] = {}
        self.scopes: dict[str, dict[str, Derived]] = {}
        self.bindings: dict[str, list[LetBinding]] = {}

    def load_all(self) -> None:
        for g in GROUPS:
            self._load(g)

    def _load(self, g: Group) -> None:
        table = _meta_table(g)
        scope: dict[str, Derived] = {}
        self.scopes[g.name] = scope
        used: set[tuple[str, int]] = set()

        pending: list[tuple[str, Term, Meta, Derived]] = []

        def resolve(name: str, body: Term) -> Term:
            lowered = lower(body, g.name)
            if g.lowering == "sec5":
                for node in _iter_refs(lowered):
                    m = re.match(rf"ref:{re.escape(g.name)}/(O|M|C|Mod|Div|f|B)(\d+)$", node.label)
                    if m:
                        used.add((m.group(1), int(m.group(2))))
            meta = table.get(name, Meta())
            ref = self._ref(g, name, lowered, meta)
            scope[name] = ref
            pending.append((name, lowered, meta, ref))
            return ref

        bindings = parse_lets(_text(g), resolve=resolve)
        self.bindings[g.name] = bindings
        for b, (name, lowered, meta, ref) in zip(bindings, pending):
            self._add(g, name, lowered, meta, ref, b.source)

        if g.lowering == "sec5":
            fams = {("O", n) for n in range(8)} | {("M", n) for n in range(8)}
            fams |= {(f, n) for f in ("C", "Mod", "Div") for n in range(2, 8)}
            fams |= {(f, n) for f in ("f", "B") for n in range(4)}
            for fam, n in sorted(fams | used, key=lambda p: (p[0], p[1])):
                ref = family_ref(fam, n, g.flavor)
                term = builders.build_family(fam, n, g.flavor)
                name = f"{fam}{n}"
                basis = f"{g.basis}-rec6" if fam == "f" else g.basis
                self._add(g, name, term, _family_meta(fam, n), ref, None, basis)

    def _ref(self, g: Group, name: str, body: Term, meta: Meta) -> Derived:
        exact = meta.oracle is not None and meta.lo == 0 and meta.where is None
        face = _oracle_face(meta.oracle) if exact else body
        return Derived(f"ref:{g.name}/{name}", (), face, lambda: body)

    def _add(self, g, name, term, meta: Meta, ref, source, basis=None) -> None:
        eid = f"{g.name}/{name}"
        self.entries[eid] = CatalogEntry(
            id=eid,
            section=g.section,
            name=name,
            term=term,
            basis=basis or g.basis,
            oracle_ref=meta.oracle,
            feasible_range=(meta.max_x, meta.budget),
            domain_lo=meta.lo,
            where=meta.where,
            deep_x=meta.deep_x,
            memo_capacity=meta.memo,
            source=source,
            group=g.name,
            ref=ref,
        )


def _iter_refs(t: Term) -> Iterable[Derived]:
    out: list[Derived] = []

    def visit(n, kids):
        if isinstance(n, Derived):
            if n.label.startswith("ref:"):
                out.append(n)
            else:
                for c in n.operands:
                    out.extend(_iter_refs(c))
        return None

    transform(t, visit)
    return out


_registry: _Registry | None = None


def _reg() -> _Registry:
    # published before loading: builders invoked while a group loads may
    # refer to the groups (and the part of the current group) already loaded
    global _registry
    if _registry is None:
        _registry = _Registry()
        try:
            _registry.load_all()
        except BaseException:
            _registry = None
            raise
    return _registry


# -- public API -----------------------------------------------------------------------


def catalog_get(eid: str) -> CatalogEntry:
    try:
        return _reg().entries[eid]
    except KeyError:
        raise UnknownId(eid) from None


def catalog_list(section: str | None = None) -> list[CatalogEntry]:
    """Entries in registration order, optionally restricted to a section tag
    or a group name."""
    es = _reg().entries.values()
    if section is None:
        return list(es)
    return [e for e in es if e.section == section or e.group == section]


def group_names() -> list[str]:
    return [g.name for g in GROUPS]


def reference(section: str, name: str) -> Derived:
    try:
        return scope(section)[name]
    except KeyError:
        raise UnknownId(f"{section}/{name}") from None


def scope(section: str) -> dict[str, Derived]:
    """Name -> reference for every let-binding of a group."""
    s = _reg().scopes.get(section)
    if s is None:
        raise UnknownId(section)
    return s


def source_env(entry: CatalogEntry) -> dict[str, Derived]:
    """The names visible to ``entry``'s let-body."""
    out: dict[str, Derived] = {}
    for name, ref in scope(entry.group).items():
        if name == entry.name:
            break
        out[name] = ref
    return out


def oracle_fn(entry: CatalogEntry) -> Callable[..., int] | None:
    return oracle.lookup(entry.oracle_ref).fn if entry.oracle_ref else None


def export_lets(section: str) -> str:
    """A let-file for a section tag or group, with family members included."""
    names = [g.name for g in GROUPS if g.section == section or g.name == section]
    if not names:
        raise UnknownId(section)
    chunks = []
    for gname in names:
        lines = [f"# {gname}"]
        seen: dict[str, Term] = {}
        for e in catalog_list(gname):
            lines.append(f"let {e.name} = {render(e.term, seen)};")
            if e.ref is not None:
                seen[e.name] = e.ref
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n"
