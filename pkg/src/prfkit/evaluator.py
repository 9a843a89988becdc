"""Budgeted evaluation of terms over Python ints.

Cost model: one step per node application that is not served from the memo,
plus one step per unrolled iteration (``F^#``, ``M[F]``, ``R[F,G]``, ``F^n``).

Iterations are unrolled in loops, never by recursion.  Each iteration node
keeps a *trail*: its furthest computed position plus a checkpoint every
``TRAIL_STRIDE`` steps, so evaluating ``F^#`` at 0, 1, 2, ... costs one unroll
per point, and a query behind the trail head costs at most a stride.
"""

from __future__ import annotations

import sys
import threading
from bisect import bisect_right
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar

from . import oracle
from .terms import Derived, InfeasibleExpansion, Term, arity

TRAIL_STRIDE = 256

DEEP = "deep"
SHALLOW = "shallow"


@dataclass(frozen=True)
class EvalConfig:
    budget: int = 1_000_000
    memo_capacity: int = 65_536
    mode: str = DEEP
    flag_ambiguous_minus: bool = True

    def __post_init__(self):
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        if self.mode not in (DEEP, SHALLOW):
            raise ValueError(f"mode must be {DEEP!r} or {SHALLOW!r}")


@dataclass(frozen=True)
class EvalOutcome:
    value: int
    steps_used: int
    ambiguous_minus_hits: int = 0
    memo_hits: int = 0


class BudgetExceeded(Exception):
    def __init__(self, steps: int, frame: str, reason: str = "step budget exhausted"):
        super().__init__(f"{reason} after {steps} steps in {frame}")
        self.steps = steps
        self.frame = frame
        self.reason = reason
        self.x: int | None = None
        self.partial: list[EvalOutcome] = []


def _frame(t: Term) -> str:
    from .parser import render

    try:
        s = render(t)
    except Exception:  # rendering is best effort for diagnostics
        s = t.kind
    return s if len(s) <= 80 else s[:77] + "..."


class _Trail:
    __slots__ = ("pos", "val", "marks", "vals")

    def __init__(self, base: int):
        self.pos = 0
        self.val = base
        self.marks = [0]
        self.vals = [base]

    def start(self, x: int) -> tuple[int, int]:
        if x >= self.pos:
            return self.pos, self.val
        i = bisect_right(self.marks, x) - 1
        return self.marks[i], self.vals[i]

    def record(self, p: int, v: int) -> None:
        if p > self.pos:
            self.pos, self.val = p, v
        if p % TRAIL_STRIDE == 0 and p > self.marks[-1]:
            self.marks.append(p)
            self.vals.append(v)


_MEMO_KINDS = frozenset(
    {"Subst", "Compose", "Power", "OpAdd", "OpMonus", "OpDist", "OpAmbMinus", "OpPairJ", "OpPlus", "Macro", "Derived"}
)


class Session:
    """One evaluation context: a memo table, iteration trails and a step
    budget shared by every call made through it.  Not thread-safe."""

    def __init__(self, config: EvalConfig | None = None):
        self.config = config or EvalConfig()
        self.steps = 0
        self.ambiguous = 0
        self.memo_hits = 0
        self._cap = self.config.memo_capacity
        self._deep = self.config.mode == DEEP
        self._flag = self.config.flag_ambiguous_minus
        self._memo: OrderedDict = OrderedDict()
        self._trails: dict = {}
        self._atoms: dict[str, Callable[..., int]] = {}
        self._h = {
            "Const": self._const,
            "Succ": self._succ,
            "Proj": self._proj,
            "Atom": self._atom,
            "Subst": self._subst,
            "Compose": self._compose,
            "PrimRec": self._primrec,
            "MixedIter": self._mixed,
            "MixedIterA": self._mixed,
            "PureIter": self._pure,
            "PureIterA": self._pure,
            "Power": self._power,
            "OpAdd": self._add,
            "OpMonus": self._monus,
            "OpDist": self._dist,
            "OpAmbMinus": self._amb,
            "OpPairJ": self._pairj,
            "OpPlus": self._plus,
            "Macro": self._macro,
            "Derived": self._derived,
        }

    # public -------------------------------------------------------------------

    def evaluate(self, t: Term, args: Sequence[int]) -> EvalOutcome:
        args = tuple(int(a) for a in args)
        if any(a < 0 for a in args):
            raise ValueError("arguments must be natural numbers")
        n = arity(t)
        if n != len(args):
            raise ValueError(f"term has arity {n}, got {len(args)} argument(s)")
        s0, a0, m0 = self.steps, self.ambiguous, self.memo_hits
        if sys.getrecursionlimit() < 20_000:
            sys.setrecursionlimit(20_000)
        v = self._ev(t, args)
        return EvalOutcome(v, self.steps - s0, self.ambiguous - a0, self.memo_hits - m0)

    def value(self, t: Term, *args: int) -> int:
        return self.evaluate(t, args).value

    # core ---------------------------------------------------------------------

    def _charge(self, t: Term) -> None:
        self.steps += 1
        if self.steps > self.config.budget:
            raise BudgetExceeded(self.steps - 1, _frame(t))

    def _ev(self, t: Term, args: tuple) -> int:
        k = t.kind
        memo = self._cap and k in _MEMO_KINDS
        if memo:
            key = (t, args)
            hit = self._memo.get(key)
            if hit is not None:
                self._memo.move_to_end(key)
                self.memo_hits += 1
                return hit
        self.steps += 1
        if self.steps > self.config.budget:
            raise BudgetExceeded(self.steps - 1, _frame(t))
        v = self._h[k](t, args)
        if memo:
            self._memo[key] = v
            if len(self._memo) > self._cap:
                self._memo.popitem(last=False)
        return v

    def _iterate(self, t: Term, key, base: Callable[[], int], step: Callable[[int, int], int], x: int) -> int:
        trail = self._trails.get(key)
        if trail is None:
            trail = self._trails[key] = _Trail(base())
        pos, val = trail.start(x)
        budget = self.config.budget
        while pos < x:
            self.steps += 1
            if self.steps > budget:
                raise BudgetExceeded(self.steps - 1, _frame(t))
            val = step(pos, val)
            pos += 1
            trail.record(pos, val)
        return val

    # node handlers --------------------------------------------------------------

    def _const(self, t, args):
        return t.n

    def _succ(self, t, args):
        return args[0] + 1

    def _proj(self, t, args):
        return args[t.k - 1]

    def _atom(self, t, args):
        f = self._atoms.get(t.name)
        if f is None:
            f = self._atoms[t.name] = oracle.lookup(t.name).fn
        return f(*args)

    def _subst(self, t, args):
        ev = self._ev
        return ev(t.f, tuple(ev(g, args) for g in t.gs))

    def _compose(self, t, args):
        return self._ev(t.f, (self._ev(t.g, args),))

    def _primrec(self, t, args):
        xs, y = args[:-1], args[-1]
        ev, g = self._ev, t.g
        return self._iterate(t, (t, xs), lambda: ev(t.f, xs), lambda i, v: ev(g, xs + (i, v)), y)

    def _mixed(self, t, args):
        ev, h = self._ev, t.h
        a = getattr(t, "a", 0)
        return self._iterate(t, t, lambda: a, lambda i, v: ev(h, (i, v)), args[0])

    def _pure(self, t, args):
        ev, f = self._ev, t.f
        a = getattr(t, "a", 0)
        return self._iterate(t, t, lambda: a, lambda i, v: ev(f, (v,)), args[0])

    def _power(self, t, args):
        v = args[0]
        ev, f = self._ev, t.f
        for _ in range(t.n):
            self._charge(t)
            v = ev(f, (v,))
        return v

    def _add(self, t, args):
        return self._ev(t.f, args) + self._ev(t.g, args)

    def _monus(self, t, args):
        d = self._ev(t.f, args) - self._ev(t.g, args)
        return d if d > 0 else 0

    def _dist(self, t, args):
        return abs(self._ev(t.f, args) - self._ev(t.g, args))

    def _amb(self, t, args):
        d = self._ev(t.f, args) - self._ev(t.g, args)
        if d < 0:
            if self._flag:
                self.ambiguous += 1
            return 0
        return d

    def _pairj(self, t, args):
        return oracle.pair(self._ev(t.f, args), self._ev(t.g, args))

    def _plus(self, t, args):
        return self._ev(t.f, args) + args[0]

    def _macro(self, t, args):
        ev = self._ev
        op = t.op
        if op == "cond":
            return ev(t.args[1], args) if ev(t.args[0], args) == 0 else 0
        f = ev(t.args[0], args)
        if op == "minus":
            return self._guarded(f - args[0])
        g = ev(t.args[1], args)
        if op == "oplus":
            return f + g * g
        if op == "ominus":
            return self._guarded(f - g * g)
        if op == "otimes":
            return f * g
        raise ValueError(f"unknown macro {op!r}")

    def _guarded(self, d: int) -> int:
        if d < 0:
            if self._flag:
                self.ambiguous += 1
            return 0
        return d

    def _derived(self, t: Derived, args):
        if not self._deep:
            return self._ev(t.shallow, args)
        try:
            body = t.expand()
        except InfeasibleExpansion as e:
            raise BudgetExceeded(self.steps, _frame(t), f"expansion infeasible: {e}") from None
        return self._ev(body, args)


def evaluate(t: Term, args: Sequence[int], config: EvalConfig | None = None) -> EvalOutcome:
    return Session(config).evaluate(t, args)


def eval_unary_range(t: Term, lo: int, hi: int, config: EvalConfig | None = None) -> list[EvalOutcome]:
    """Evaluate a unary term at lo..hi in one session (shared memo and trails).

    On exhaustion the raised :class:`BudgetExceeded` carries ``x`` (the point
    being evaluated) and ``partial`` (outcomes for the points before it).
    """
    if arity(t) != 1:
        raise ValueError("eval_unary_range needs a unary term")
    if lo > hi:
        raise ValueError("empty range")
    s = Session(config)
    out: list[EvalOutcome] = []
    for x in range(lo, hi + 1):
        try:
            out.append(s.evaluate(t, (x,)))
        except BudgetExceeded as e:
            e.x = x
            e.partial = out
            raise
    return out


T = TypeVar("T")


def with_big_stack(fn: Callable[[], T], stack_mb: int = 512) -> T:
    """Run ``fn`` in a helper thread with a large C stack.

    Deeply nested expansions recurse once per term level; CPython 3.10 runs
    that recursion on the C stack.
    """
    result: list = []
    error: list = []

    def target():
        try:
            result.append(fn())
        except BaseException as e:  # re-raised in the caller
            error.append(e)

    old = threading.stack_size()
    threading.stack_size(stack_mb * 1024 * 1024)
    try:
        th = threading.Thread(target=target)
        th.start()
    finally:
        threading.stack_size(old)
    th.join()
    if error:
        raise error[0]
    return result[0]
