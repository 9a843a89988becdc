"""Check specifications and the runner that turns them into reports."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Sequence, Union

from .. import oracle
from ..evaluator import BudgetExceeded, EvalConfig, Session, with_big_stack
from ..terms import Term, arity

PASS = "pass"
FAIL = "fail"
BUDGET = "budget-exceeded"
PRECONDITION = "precondition-violated"

EXPECTS = ("equal", "monotone", "bound", "bijection")

TermLike = Union[Term, Callable[..., int]]


@dataclass(frozen=True)
class CheckSpec:
    """One verification unit.

    ``term`` is a term (evaluated with ``mode`` and ``budget``) or a plain
    callable.  ``reference`` is an oracle name, a second term (always evaluated
    shallowly) or a callable; for ``bijection`` it is the decoder, mapping the
    term's value back to the argument tuple.  ``expect="bound"`` asks for
    got <= want.  With ``skip_budget`` (spot checks) exhausting the budget ends
    the check early instead of failing it; at least ``min_points`` must have
    been tested by then.
    """

    id: str
    term: TermLike
    reference: str | TermLike | None = None
    domain: tuple[tuple[int, int], ...] = ((0, 0),)
    mode: str = "shallow"
    budget: int = 2_000_000
    expect: str = "equal"
    where: Callable[[tuple], bool] | None = field(default=None, compare=False)
    precondition: Callable[[tuple], bool] | None = field(default=None, compare=False)
    memo_capacity: int = 65_536
    skip_budget: bool = False
    min_points: int = 1

    def __post_init__(self):
        if any(lo > hi for lo, hi in self.domain):
            raise ValueError(f"{self.id}: empty range")
        if self.budget <= 0:
            raise ValueError(f"{self.id}: budget must be positive")
        if self.expect not in EXPECTS:
            raise ValueError(f"{self.id}: unknown expectation {self.expect!r}")

    def points(self) -> Iterator[tuple]:
        for args in itertools.product(*(range(lo, hi + 1) for lo, hi in self.domain)):
            if self.where is None or self.where(args):
                yield args


@dataclass
class CheckReport:
    id: str
    status: str
    tested_points: int = 0
    first_mismatch: dict | None = None
    steps_total: int = 0
    ambiguous_minus_hits: int = 0
    elapsed: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "status": self.status,
            "tested_points": self.tested_points,
            "first_mismatch": self.first_mismatch,
            "steps_total": self.steps_total,
            "ambiguous_minus_hits": self.ambiguous_minus_hits,
        }

    @property
    def ok(self) -> bool:
        return self.status == PASS


def apply_overrides(spec: CheckSpec, max_x: int | None = None, budget: int | None = None) -> CheckSpec:
    if max_x is not None:
        dom = tuple((lo, min(hi, max_x)) for lo, hi in spec.domain)
        if all(lo <= hi for lo, hi in dom):
            spec = replace(spec, domain=dom)
    if budget is not None:
        spec = replace(spec, budget=budget)
    return spec


class _Evaluator:
    """Evaluates the checked term, accumulating steps and ambiguity hits."""

    def __init__(self, spec: CheckSpec):
        self.spec = spec
        self.steps = 0
        self.ambiguous = 0
        self._session: Session | None = None

    def _config(self) -> EvalConfig:
        s = self.spec
        return EvalConfig(budget=s.budget, memo_capacity=s.memo_capacity, mode=s.mode)

    def __call__(self, args: tuple) -> int:
        t = self.spec.term
        if not isinstance(t, Term):
            return t(*args)
        if self._session is None:
            self._session = Session(self._config())
        s = self._session
        s0, a0 = s.steps, s.ambiguous
        try:
            return s.value(t, *args)
        finally:
            self.steps += s.steps - s0
            self.ambiguous += s.ambiguous - a0


def _reference(spec: CheckSpec) -> Callable[[tuple], object] | None:
    ref = spec.reference
    if ref is None:
        return None
    if isinstance(ref, str):
        fn = oracle.lookup(ref).fn
        return lambda args: fn(*args)
    if isinstance(ref, Term):
        s = Session(EvalConfig(budget=10**12, mode="shallow", flag_ambiguous_minus=False))
        return lambda args: s.value(ref, *args)
    return lambda args: ref(*args)


def _mismatch(args: Sequence[int], got, want) -> dict:
    return {"args": list(args), "got": got, "want": want}


def run_check(spec: CheckSpec, max_x: int | None = None, budget: int | None = None) -> CheckReport:
    spec = apply_overrides(spec, max_x, budget)
    return with_big_stack(lambda: _run(spec))


def _run(spec: CheckSpec) -> CheckReport:
    import time

    t0 = time.perf_counter()
    rep = CheckReport(spec.id, PASS)
    try:
        _run_into(spec, rep)
    finally:
        rep.elapsed = time.perf_counter() - t0
    return rep


def _run_into(spec: CheckSpec, rep: CheckReport) -> None:
    if isinstance(spec.term, Term) and spec.expect != "bijection":
        n = arity(spec.term)
        if n != len(spec.domain):
            raise ValueError(f"{spec.id}: term has arity {n}, range has {len(spec.domain)} dimension(s)")

    if spec.precondition is not None:
        for args in spec.points():
            if not spec.precondition(args):
                rep.status = PRECONDITION
                rep.first_mismatch = _mismatch(args, None, None)
                return

    ev = _Evaluator(spec)
    want_of = _reference(spec)
    prev: tuple | None = None
    seen: dict[int, tuple] = {}
    skipped = 0
    try:
        for args in spec.points():
            try:
                got = ev(args)
            except BudgetExceeded:
                if spec.skip_budget:
                    skipped += 1
                    break
                rep.status = BUDGET
                rep.first_mismatch = None
                return
            rep.tested_points += 1
            bad = None
            if spec.expect == "equal":
                want = want_of(args)
                if got != want:
                    bad = _mismatch(args, got, want)
            elif spec.expect == "bound":
                want = want_of(args)
                if not got <= want:
                    bad = _mismatch(args, got, want)
            elif spec.expect == "monotone":
                if prev is not None and prev[1] > got:
                    bad = _mismatch(prev[0], prev[1], f"<= {got} = F{tuple(args)}")
                prev = (args, got)
            else:  # bijection: decode(encode(args)) == args and encode injective
                back = tuple(want_of((got,)))
                if back != tuple(args):
                    bad = _mismatch(args, got, list(back))
                elif got in seen:
                    bad = _mismatch(args, got, f"distinct from F{seen[got]}")
                seen[got] = tuple(args)
            if bad is not None:
                rep.status = FAIL
                rep.first_mismatch = bad
                return
        if rep.tested_points < spec.min_points:
            rep.status = BUDGET if skipped else FAIL
            if not skipped:
                rep.first_mismatch = _mismatch([], None, f">= {spec.min_points} points")
    finally:
        rep.steps_total = ev.steps
        rep.ambiguous_minus_hits = ev.ambiguous
