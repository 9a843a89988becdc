import pytest

from prfkit.constructions import catalog
from prfkit.terms import (
    ArityMismatch,
    Atom,
    Compose,
    Const,
    MixedIter,
    OpAdd,
    OpPlus,
    PrimRec,
    Proj,
    PureIter,
    Subst,
    Succ,
    arity,
    get_basis,
    in_basis,
    inline,
    transform,
    walk,
)


def test_arity_basic():
    assert arity(Succ()) == 1
    assert arity(Subst(Atom("add2"), (Proj(2, 2), Compose(Atom("O"), Proj(2, 1))))) == 2
    assert arity(MixedIter(Compose(Succ(), Compose(Succ(), Proj(2, 2))))) == 1


def test_arity_primrec():
    assert arity(PrimRec(Proj(1, 1), Proj(3, 3))) == 2


def test_arity_mismatch():
    with pytest.raises(ArityMismatch):
        arity(OpAdd(Succ(), Proj(2, 1)))
    with pytest.raises(ArityMismatch):
        arity(Compose(Proj(2, 1), Succ()))


def test_in_basis_examples():
    assert in_basis(PureIter(Succ()), "sec5-monus")
    assert not in_basis(Atom("O"), "sec4-noO")
    assert in_basis(OpPlus(Const(1)), "sec6-E")


def test_basis_registry_has_sections():
    for name in ("sec4", "sec4-noO", "sec5-dist", "sec5-monus", "sec6-E", "sec6-K", "sec6-L"):
        assert get_basis(name).name == name


def test_terms_hash_structurally():
    a = Compose(Succ(), PureIter(Succ()))
    b = Compose(Succ(), PureIter(Succ()))
    assert a == b and hash(a) == hash(b)
    assert len({a, b}) == 1


def test_transform_rewrites_bottom_up():
    t = Compose(Succ(), Compose(Succ(), Proj(1, 1)))
    out = transform(t, lambda node, kids: Const(0) if node.kind == "Succ" else None)
    assert out == Compose(Const(0), Compose(Const(0), Proj(1, 1)))


def test_inline_one_level():
    d = catalog.reference("sec5-monus", "D")
    t = Compose(Succ(), d)
    got = inline(t, {d.label})
    assert all(n.kind != "Derived" or n.label != d.label for n in walk(got))
