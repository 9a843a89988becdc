import random

import pytest

from prfkit.constructions import catalog, catalog_get
from prfkit.evaluator import BudgetExceeded, EvalConfig, Session, eval_unary_range, evaluate, with_big_stack
from prfkit.parser import parse
from prfkit.terms import Atom, OpAmbMinus, Power, PureIter, Succ


def values(outs):
    return [o.value for o in outs]


def test_predecessor():
    assert evaluate(parse("M[pr[2,1]]"), [5]).value == 4


def test_catalog_pw():
    assert evaluate(catalog_get("sec2/Pw").term, [6]).value == 64


def test_power_zero():
    assert evaluate(Power(Succ(), 0), [7]).value == 7


def test_b3_budget():
    t = catalog_get("sec5-monus/B3").term
    with pytest.raises(BudgetExceeded):
        with_big_stack(lambda: evaluate(t, [3], EvalConfig(budget=10**4)))


def test_unary_range_examples():
    assert values(eval_unary_range(PureIter(Succ()), 0, 3)) == [0, 1, 2, 3]
    assert values(eval_unary_range(catalog_get("sec5-monus/Sgn").term, 0, 2)) == [0, 1, 1]
    assert values(eval_unary_range(catalog_get("sec4/Sq").term, 0, 4)) == [0, 1, 4, 9, 16]


def test_unary_range_partial_on_exhaustion():
    t = PureIter(Succ())
    with pytest.raises(BudgetExceeded) as ei:
        eval_unary_range(t, 0, 100, EvalConfig(budget=20, memo_capacity=0))
    e = ei.value
    assert e.x is not None and len(e.partial) == e.x


def test_budget_error_names_frame():
    with pytest.raises(BudgetExceeded) as ei:
        evaluate(PureIter(Succ()), [1000], EvalConfig(budget=50))
    assert ei.value.frame in ("S", "S^#")
    assert ei.value.steps == 50


def test_arity_and_sign_checked():
    with pytest.raises(ValueError):
        evaluate(Succ(), [1, 2])
    with pytest.raises(ValueError):
        evaluate(Succ(), [-1])


def test_ambiguous_minus_counts():
    out = evaluate(OpAmbMinus(Atom("I"), Atom("D")), [3])
    assert out.value == 0 and out.ambiguous_minus_hits == 1
    out = evaluate(OpAmbMinus(Atom("I"), Atom("D")), [3], EvalConfig(flag_ambiguous_minus=False))
    assert out.ambiguous_minus_hits == 0


def test_shallow_vs_deep_agree():
    e = catalog_get("sec5-monus/D")
    for x in range(10):
        deep = evaluate(e.term, [x], EvalConfig(mode="deep")).value
        shallow = evaluate(e.term, [x], EvalConfig(mode="shallow")).value
        assert deep == shallow == 2 * x


def test_big_iteration_does_not_overflow_stack():
    assert evaluate(PureIter(Succ()), [200_000], EvalConfig(budget=10**6)).value == 200_000


def test_session_shares_trails():
    s = Session(EvalConfig())
    t = PureIter(Succ())
    first = s.evaluate(t, [500]).steps_used
    again = s.evaluate(t, [501]).steps_used
    assert again < first


def _sample(n, seed):
    rng = random.Random(seed)
    entries = [e for e in catalog.catalog_list() if e.arity == 1 and e.oracle_ref]
    out = []
    while len(out) < n:
        e = rng.choice(entries)
        x = rng.randint(e.domain_lo, min(e.max_x, 24))
        if e.where is None or e.where((x,)):
            out.append((e, x))
    return out


@pytest.mark.parametrize("e,x", _sample(20, 5), ids=lambda v: getattr(v, "id", str(v)))
def test_memo_transparency(e, x):
    def run(cap):
        return evaluate(e.term, [x], EvalConfig(budget=10**7, memo_capacity=cap, mode="shallow")).value

    assert with_big_stack(lambda: run(0)) == with_big_stack(lambda: run(65_536))


@pytest.mark.parametrize("e,x", _sample(20, 6), ids=lambda v: getattr(v, "id", str(v)))
def test_budget_monotone(e, x):
    def run(b):
        return evaluate(e.term, [x], EvalConfig(budget=b, mode="shallow"))

    out = with_big_stack(lambda: run(10**7))
    assert with_big_stack(lambda: run(out.steps_used)).value == out.value
    if out.steps_used > 1:
        with pytest.raises(BudgetExceeded):
            with_big_stack(lambda: run(out.steps_used - 1))
