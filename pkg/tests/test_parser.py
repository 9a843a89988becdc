import random

import pytest

from prfkit.constructions import catalog
from prfkit.parser import ParseError, parse, parse_lets, render
from prfkit.terms import Atom, Compose, Const, MixedIter, OpAdd, OpMonus, Proj, PureIter, Succ
from termgen import random_term


def test_parse_examples():
    assert parse("M[S S pr[2,2]]") == MixedIter(Compose(Succ(), Compose(Succ(), Proj(2, 2))))
    i = PureIter(Succ())
    assert parse("S (I + I + c1)^#", {"I": i}) == Compose(Succ(), PureIter(OpAdd(OpAdd(i, i), Const(1))))
    assert parse("c0") == Const(0)


def test_render_examples():
    assert render(PureIter(Succ())) == "S^#"
    assert render(OpMonus(OpAdd(Succ(), Succ()), Const(2))) == "S + S -. c2"


def test_render_with_names():
    e = catalog.catalog_get("sec2/V")
    assert render(e.term, catalog.source_env(e)) == "Hf P Rt S D D D"


def test_juxtaposition_binds_tighter_than_plus():
    t = parse("S + S S")
    assert t == OpAdd(Succ(), Compose(Succ(), Succ()))
    assert render(t) == "S + S S"


@pytest.mark.parametrize("bad", ["", "S +", "M[S", "pr[2,3]", "c", "S )", "let x = S;", "foo"])
def test_parse_errors(bad):
    with pytest.raises((ParseError, Exception)):
        parse(bad)


def test_parse_error_has_position():
    with pytest.raises(ParseError) as ei:
        parse("S + + S")
    assert "at 4" in str(ei.value)


def test_atoms():
    assert parse("Sq") == Atom("Sq")


def test_parse_lets():
    binds = parse_lets("let two = S S;\nlet four = two two;")
    names = [b.name for b in binds]
    assert names == ["two", "four"]


def test_roundtrip_random():
    rng = random.Random(11)
    for _ in range(300):
        t = random_term(rng, 1, 6)
        assert parse(render(t)) == t


def test_roundtrip_binary_terms():
    rng = random.Random(12)
    for _ in range(100):
        t = random_term(rng, 2, 5)
        assert parse(render(t)) == t
