"""Random arity-consistent terms for round-trip and property tests."""

from __future__ import annotations

import random

from prfkit.terms import (
    Atom,
    Compose,
    Const,
    Macro,
    MixedIter,
    MixedIterA,
    OpAdd,
    OpAmbMinus,
    OpDist,
    OpMonus,
    OpPairJ,
    OpPlus,
    Power,
    PrimRec,
    Proj,
    PureIter,
    PureIterA,
    Subst,
    Succ,
    Term,
)

UNARY_ATOMS = ("I", "P", "D", "Sq", "Hf", "Pw", "Rt", "A", "V", "K", "L", "O", "Sgn", "N", "E", "Q", "Y", "Z", "Mod3", "Div2")
BINARY_ATOMS = ("add2", "monus2", "dist2", "J2", "delta2")
_BIN = (OpAdd, OpMonus, OpDist, OpAmbMinus, OpPairJ)


def random_term(rng: random.Random, n: int = 1, depth: int = 6) -> Term:
    if depth <= 1 or rng.random() < 0.2:
        return _leaf(rng, n)
    d = depth - 1
    if n > 1:
        if rng.random() < 0.5:
            return PrimRec(random_term(rng, n - 1, d), random_term(rng, n + 1, d))
        return _subst(rng, n, d)
    k = rng.randrange(12)
    if k == 0:
        return Compose(random_term(rng, 1, d), random_term(rng, 1, d))
    if k == 1:
        return PureIter(random_term(rng, 1, d))
    if k == 2:
        return PureIterA(random_term(rng, 1, d), rng.randint(0, 5))
    if k == 3:
        return Power(random_term(rng, 1, d), rng.randint(0, 4))
    if k == 4:
        return OpPlus(random_term(rng, 1, d))
    if k == 5:
        return rng.choice(_BIN)(random_term(rng, 1, d), random_term(rng, 1, d))
    if k == 6:
        return Macro("minus", (random_term(rng, 1, d),))
    if k == 7:
        op = rng.choice(("oplus", "ominus", "otimes", "cond"))
        return Macro(op, (random_term(rng, 1, d), random_term(rng, 1, d)))
    if k == 8:
        return MixedIter(random_term(rng, 2, d))
    if k == 9:
        return MixedIterA(random_term(rng, 2, d), rng.randint(0, 5))
    return _subst(rng, 1, d)


def _subst(rng: random.Random, n: int, d: int) -> Term:
    m = rng.randint(1, 3)
    return Subst(random_term(rng, m, d), tuple(random_term(rng, n, d) for _ in range(m)))


def _leaf(rng: random.Random, n: int) -> Term:
    if n == 1:
        k = rng.randrange(4)
        if k == 0:
            return Succ()
        if k == 1:
            return Const(rng.randint(0, 9))
        if k == 2:
            return Atom(rng.choice(UNARY_ATOMS))
    elif n == 2 and rng.random() < 0.4:
        return Atom(rng.choice(BINARY_ATOMS))
    return Proj(n, rng.randint(1, n))
