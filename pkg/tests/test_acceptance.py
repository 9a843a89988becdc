"""Acceptance criteria 1-11, each run at its stated tolerance and time limit.

Runs under pytest (one test per criterion) or directly:
``python3 tests/test_acceptance.py``.  Either way one PASS/FAIL line is
printed per criterion.
"""

from __future__ import annotations

import os
import random
import sys
import time

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from prfkit.constructions import catalog  # noqa: E402
from prfkit.evaluator import BudgetExceeded, EvalConfig, Session, with_big_stack  # noqa: E402
from prfkit.harness import suites  # noqa: E402
from prfkit.harness.checks import run_check  # noqa: E402
from prfkit.parser import parse, render  # noqa: E402
from termgen import random_term  # noqa: E402

SEED = 20260415


def _run(suite, keep=None):
    specs = [s for s in suites.suite_specs(suite) if keep is None or keep(s.id)]
    reports = [run_check(s) for s in specs]
    bad = [f"{r.id}: {r.status} {r.first_mismatch or ''}" for r in reports if not r.ok]
    return len(reports), bad


def _entry_ids(group, names, kinds=(":oracle", ":deep", ":basis")):
    want = {f"{group}/{n}{k}" for n in names for k in kinds}
    return lambda sid: sid in want


def _suites(*jobs):
    total, bad = 0, []
    for suite, keep in jobs:
        n, b = _run(suite, keep)
        total += n
        bad += b
    return total, bad


# -- criteria ---------------------------------------------------------------------------


def crit1():
    keep = lambda sid: sid.startswith(("oracle/pairing", "oracle/triangular"))  # noqa: E731
    return _suites(("oracle-self", keep))


def crit2():
    return _suites(("sec2", _entry_ids("sec2", ("D", "O", "Pw", "V"))))


def crit3():
    names = ("P", "N", "D", "Sq", "Hf", "Pw", "delta", "g", "Rt", "minus")
    return _suites(("sec4", _entry_ids("sec4", names)))


def crit4():
    keep = lambda sid: sid.startswith("sec4/monotone:")  # noqa: E731
    n, bad = _suites(("sec4", keep))
    randoms = sum(1 for s in suites.suite_specs("sec4") if s.id.startswith("sec4/monotone:random-"))
    if randoms != 100:
        bad.append(f"expected 100 random terms, found {randoms}")
    return n, bad


def crit5():
    keep = lambda sid: sid.startswith("sec4/cosignum:")  # noqa: E731
    return _suites(("sec4", keep))


def crit6():
    keep = lambda sid: not sid.endswith(":abound")  # noqa: E731
    return _suites(("sec5-dist", keep), ("sec5-monus", keep))


def crit7():
    keep = lambda sid: sid.endswith(":abound")  # noqa: E731
    return _suites(("sec5-dist", keep), ("sec5-monus", keep))


def crit8():
    keep = lambda sid: sid.startswith("remark-a/offset:")  # noqa: E731
    n, bad = _suites(("remarks", keep))
    if n != 15:
        bad.append(f"expected 15 offset checks, found {n}")
    return n, bad


def crit9():
    keep = lambda sid: not sid.startswith("remark-a/offset:")  # noqa: E731
    return _suites(("sec6-E", None), ("sec6-K", None), ("sec6-L", None), ("remarks", keep))


def crit10():
    rng = random.Random(SEED)
    bad = []
    n = 0
    for i in range(1000):
        t = random_term(rng, 1, 6)
        n += 1
        src = render(t)
        try:
            back = parse(src)
        except Exception as e:  # reported, not raised
            bad.append(f"random-{i}: {src!r}: {e}")
            continue
        if back != t:
            bad.append(f"random-{i}: {src!r} re-renders as {render(back)!r}")
    for e in catalog.catalog_list():
        if not e.source:
            continue
        n += 1
        env = catalog.source_env(e)
        t = parse(e.source, env)
        canon = render(t, env)
        t2 = parse(canon, env)
        if t2 != t or render(t2, env) != canon:
            bad.append(f"{e.id}: {e.source!r} -> {canon!r} is not a fixed point")
    return n, bad


SAMPLE_BUDGET = 2_000_000


def _sample_pairs(k):
    """k (entry, x) pairs, deep mode, that finish within SAMPLE_BUDGET without memo."""
    rng = random.Random(SEED)
    entries = [e for e in catalog.catalog_list() if e.arity == 1]
    out, tries = [], 0
    while len(out) < k and tries < 50 * k:
        tries += 1
        e = rng.choice(entries)
        x = rng.randint(e.domain_lo, min(e.max_x, 32))
        if e.where is not None and not e.where((x,)):
            continue
        try:
            Session(EvalConfig(budget=SAMPLE_BUDGET, memo_capacity=0)).value(e.term, x)
        except BudgetExceeded:
            continue
        out.append((e, x))
    return out


def crit11():
    bad = []
    pairs = _sample_pairs(50)
    if len(pairs) < 50:
        bad.append(f"only {len(pairs)} sampled pairs")
    for e, x in pairs:
        cfg = dict(budget=SAMPLE_BUDGET, mode="deep")
        plain = Session(EvalConfig(memo_capacity=0, **cfg)).evaluate(e.term, [x])
        memo = Session(EvalConfig(memo_capacity=65_536, **cfg)).evaluate(e.term, [x])
        if plain.value != memo.value:
            bad.append(f"{e.id}({x}): memo {memo.value} != plain {plain.value}")
        used = memo.steps_used
        again = Session(EvalConfig(budget=used, mode="deep")).evaluate(e.term, [x])
        if again.value != memo.value:
            bad.append(f"{e.id}({x}): budget=steps_used changed the value")
        if used > 1:
            try:
                Session(EvalConfig(budget=used - 1, mode="deep")).evaluate(e.term, [x])
                bad.append(f"{e.id}({x}): finished under steps_used-1")
            except BudgetExceeded:
                pass
    b3 = catalog.catalog_get("sec5-monus/B3").term
    try:
        v = Session(EvalConfig(budget=10**4, mode="deep")).value(b3, 3)
        bad.append(f"B3(3) returned {v} under budget 10^4")
    except BudgetExceeded:
        pass
    return len(pairs) + 1, bad


# id -> (runner, time limit in seconds or None, summary)
CRITERIA = {
    1: (crit1, 5, "oracle self-consistency"),
    2: (crit2, 5, "sec2 examples vs oracle"),
    3: (crit3, 60, "sec4 constructions"),
    4: (crit4, 30, "monotonicity"),
    5: (crit5, None, "cosignum bootstrap"),
    6: (crit6, 180, "sec5 suites, both flavors"),
    7: (crit7, None, "Ackermann-index bound"),
    8: (crit8, None, "offset translation"),
    9: (crit9, 180, "sec6 suites and a=1 variants"),
    10: (crit10, None, "parser round trips"),
    11: (crit11, None, "evaluator contracts"),
}


def evaluate_criterion(n):
    fn, limit, title = CRITERIA[n]
    # build check lists inside the timed region
    suites._cache.clear()
    suites.sec6_pairs.cache_clear()
    t0 = time.perf_counter()
    checks, bad = with_big_stack(fn)
    dt = time.perf_counter() - t0
    if limit is not None and dt >= limit:
        bad = bad + [f"took {dt:.1f}s, limit {limit}s"]
    verdict = "PASS" if not bad else "FAIL"
    lim = f" (limit {limit}s)" if limit else ""
    line = f"criterion {n:2d} {verdict}  {title}: {checks} checks in {dt:.1f}s{lim}"
    return not bad, line, bad


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n, capsys):
    ok, line, bad = evaluate_criterion(n)
    with capsys.disabled():
        print("\n" + line)
        for b in bad[:10]:
            print("    " + b)
    assert ok, "\n".join(bad[:10])


if __name__ == "__main__":
    failed = 0
    for n in sorted(CRITERIA):
        ok, line, bad = evaluate_criterion(n)
        print(line, flush=True)
        for b in bad[:10]:
            print("    " + b)
        failed += not ok
    sys.exit(1 if failed else 0)
