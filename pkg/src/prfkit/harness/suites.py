"""Verification suites.

Each suite is a deterministic list of :class:`CheckSpec`, sorted by id.  The
lists are rebuilt from scratch in every process (workers of ``--jobs`` call
:func:`spec_by_id`), so nothing here needs to be picklable.
"""

from __future__ import annotations

import random
from functools import lru_cache
from math import isqrt
from typing import Callable, Iterable

from .. import oracle
from ..constructions import builders, catalog
from ..constructions.builders import InfeasibleExpansion, UnsupportedNode
from ..evaluator import BudgetExceeded, EvalConfig, Session, with_big_stack
from ..terms import (
    Atom,
    Compose,
    Macro,
    MixedIter,
    OpAdd,
    Power,
    Proj,
    PureIter,
    Subst,
    Succ,
    Term,
    fully_expandable,
    get_basis,
    in_basis,
    inline,
    unfold,
)
from .checks import CheckSpec

SUITES = ("sec2", "sec4", "sec5-dist", "sec5-monus", "sec6-E", "sec6-K", "sec6-L", "remarks", "oracle-self")
ALL = "all"

DEEP_BUDGET = 500_000
SEC6_DEEP_BUDGET = 2_500_000
RANDOM_SEED = 20260415
RANDOM_TERMS = 100


class UnknownSuite(KeyError):
    pass


def _shallow(budget: int = 10**9) -> Session:
    return Session(EvalConfig(budget=budget, mode="shallow", flag_ambiguous_minus=False))


# -- catalog entry checks ---------------------------------------------------------------


def entry_checks(e: catalog.CatalogEntry) -> list[CheckSpec]:
    """Oracle agreement (refs trusted, full range), a deep spot check, and
    basis membership."""
    out = [
        CheckSpec(
            f"{e.id}:basis",
            (lambda e=e: 1 if in_basis(e.term, e.basis) else 0),
            (lambda: 1),
            domain=(),
        )
    ]
    if e.oracle_ref is None:
        return out
    dom = tuple((e.domain_lo, e.max_x) for _ in range(e.arity))
    out.append(
        CheckSpec(
            f"{e.id}:oracle",
            e.term,
            e.oracle_ref,
            dom,
            mode="shallow",
            budget=e.budget,
            where=e.where,
            memo_capacity=e.memo_capacity,
        )
    )
    if _deep_feasible(e):
        ddom = tuple((e.domain_lo, max(e.domain_lo, min(e.max_x, e.deep_x))) for _ in range(e.arity))
        out.append(
            CheckSpec(
                f"{e.id}:deep",
                e.term,
                e.oracle_ref,
                ddom,
                mode="deep",
                budget=DEEP_BUDGET,
                where=e.where,
                skip_budget=True,
            )
        )
    return out


def _deep_feasible(e: catalog.CatalogEntry) -> bool:
    """Deep spot checks are omitted for entries whose expansion needs an
    unbuildable B_k already at the first point."""
    if fully_expandable(e.term):
        return True
    try:
        Session(EvalConfig(budget=DEEP_BUDGET)).value(e.term, *(e.domain_lo,) * e.arity)
    except BudgetExceeded:
        return False
    return True


# -- sec2 / sec4 ----------------------------------------------------------------------------


def _random_sec4(rng: random.Random, n: int, depth: int) -> Term:
    """Arity-``n`` term over S, projections, +, subst, composition, powers and M."""
    if depth <= 1 or rng.random() < 0.25:
        choices = [lambda: Proj(n, rng.randint(1, n))]
        if n == 1:
            choices.append(Succ)
        if n == 2:
            choices.append(lambda: Atom("add2"))
        return rng.choice(choices)()
    kinds = ["subst"]
    if n == 1:
        kinds += ["compose", "compose", "mixed", "mixed", "power"]
    k = rng.choice(kinds)
    if k == "compose":
        return Compose(_random_sec4(rng, 1, depth - 1), _random_sec4(rng, 1, depth - 1))
    if k == "mixed":
        return MixedIter(_random_sec4(rng, 2, depth - 1))
    if k == "power":
        return Power(_random_sec4(rng, 1, depth - 1), rng.randint(0, 3))
    m = rng.randint(1, 2)
    return Subst(_random_sec4(rng, m, depth - 1), tuple(_random_sec4(rng, n, depth - 1) for _ in range(m)))


def random_monotone_terms(count: int = RANDOM_TERMS, seed: int = RANDOM_SEED, hi: int = 129) -> list[Term]:
    """Seeded random unary sec4-noO terms of depth <= 5, redrawn until each
    evaluates on 0..hi within a modest budget."""
    rng = random.Random(seed)
    out: list[Term] = []
    seen: set[Term] = set()
    while len(out) < count:
        t = _random_sec4(rng, 1, 5)
        if t in seen:
            continue
        try:
            s = Session(EvalConfig(budget=200_000))
            for x in range(hi + 1):
                s.value(t, x)
        except BudgetExceeded:
            continue
        seen.add(t)
        out.append(t)
    return out


def _sec4_checks() -> list[CheckSpec]:
    out: list[CheckSpec] = []
    noO = get_basis("sec4-noO")
    for e in catalog.catalog_list("sec4"):
        out += entry_checks(e)
        if e.arity == 1 and in_basis(e.term, noO):
            # references are trusted through their (verified) oracles
            out.append(CheckSpec(f"sec4/monotone:{e.name}", e.term, None, ((0, 129),), expect="monotone"))
    for i, t in enumerate(random_monotone_terms()):
        out.append(CheckSpec(f"sec4/monotone:random-{i:03d}", t, None, ((0, 129),), mode="deep", budget=200_000, expect="monotone"))
    for name in ("N", "E"):
        out += cosignum_checks(name)
    return out


def cosignum_checks(name: str) -> list[CheckSpec]:
    fhat = Atom(name)
    built = builders.build_cosignum_from(fhat)
    basis = get_basis("sec4-noO").extended(f"sec4-noO+{name}", atoms=[name])
    return [
        CheckSpec(f"sec4/cosignum:{name}", built, "O", ((0, 256),), mode="deep"),
        CheckSpec(f"sec4/cosignum:{name}:basis", lambda: int(in_basis(built, basis)), lambda: 1, domain=()),
    ]


# -- sec5 ---------------------------------------------------------------------------------

ADD_DEEP_K1 = (("S", "S"), ("S", "I"), ("I", "S"), ("I", "I"))
ADD_DEEP_K2 = (("SS", "S"), ("SS", "I"), ("one", "S"), ("I", "one"))
COND_NAMES = ("O", "Sgn", "Mod3", "S", "D")
COND_PW_LIMIT = 24


def sec5_operand(section: str, name: str) -> Term:
    if name == "S":
        return Succ()
    if name == "SS":
        return Compose(Succ(), Succ())
    if name.startswith("Mod"):
        return builders.family_ref("Mod", int(name[3:]), section.split("-")[1])
    return catalog.reference(section, name)


def _sec5_checks(flavor: str) -> list[CheckSpec]:
    section = f"sec5-{flavor}"
    out: list[CheckSpec] = []
    for e in catalog.catalog_list(section):
        out += entry_checks(e)
    out += addition_checks(flavor)
    out += conditional_checks(flavor)
    # squares via the iterated W map
    w_iter = PureIter(catalog.reference(section, "W"))
    sq_test = Compose(catalog.reference(section, "Sgn"), Compose(builders.family_ref("Mod", 3, flavor), w_iter))
    out.append(CheckSpec(f"{section}/W-squares", sq_test, "Q", ((1, 400),)))
    out += growth_checks(flavor)
    out += abound_checks(flavor)
    return out


def addition_checks(flavor: str) -> list[CheckSpec]:
    section = f"sec5-{flavor}"
    out = []
    for pairs, hi in ((ADD_DEEP_K1, 16), (ADD_DEEP_K2, 6)):
        for a, b in pairs:
            f, g = sec5_operand(section, a), sec5_operand(section, b)
            t = builders.build_addition(f, g, flavor)
            out.append(CheckSpec(f"{section}/add:{a},{b}:deep", t, OpAdd(f, g), ((0, hi),), mode="deep", budget=20_000_000))
    for a, b in ADD_DEEP_K1 + ADD_DEEP_K2:
        f, g = sec5_operand(section, a), sec5_operand(section, b)
        t = unfold(builders.build_addition(f, g, flavor))
        out.append(CheckSpec(f"{section}/add:{a},{b}:shallow", t, OpAdd(f, g), ((0, 256),)))
    return out


def conditional_checks(flavor: str) -> list[CheckSpec]:
    """F -> G through its construction, with alpha and beta inlined so that the
    power-of-two step is exercised; points keep the Pw argument <= 24."""
    section = f"sec5-{flavor}"
    labels = {f"ref:{section}/alpha", f"ref:{section}/beta"}
    out = []
    for a in COND_NAMES:
        for b in COND_NAMES:
            f, g = sec5_operand(section, a), sec5_operand(section, b)
            t = inline(unfold(builders.build_conditional(f, g, flavor)), labels)
            s = _shallow()

            def where(args, f=f, g=g, s=s):
                x = args[0]
                return 2 * s.value(g, x) + oracle.sgn(s.value(f, x)) + 2 <= COND_PW_LIMIT

            out.append(CheckSpec(f"{section}/cond:{a},{b}", t, Macro("cond", (f, g)), ((0, 256),), where=where))
    return out


def growth_checks(flavor: str) -> list[CheckSpec]:
    section = f"sec5-{flavor}"
    out = []
    for n, hi in ((0, 30), (1, 30), (2, 30), (3, 4)):
        out.append(
            CheckSpec(
                f"{section}/growth:B{n}",
                (lambda x, n=n: oracle.fn_value(n, x)),
                (lambda x, n=n: oracle.bn_value(n, x + 1, cap=oracle.fn_value(n, x) + 1)),
                ((0, hi),),
                expect="bound",
            )
        )
    return out


def abound_checks(flavor: str) -> list[CheckSpec]:
    """T(x) <= f_A(T)(x) for unary entries with A(T) <= 3."""
    section = f"sec5-{flavor}"
    out = []
    for e in catalog.catalog_list(section):
        if e.arity != 1:
            continue
        a = index_of(e.term)
        if a is None or a > 3:
            continue
        out.append(CheckSpec(f"{e.id}:abound", e.term, f"f{a}", ((0, 10),), expect="bound"))
    return out


def index_of(t: Term) -> int | None:
    try:
        return with_big_stack(lambda: builders.ackermann_index(t))
    except (UnsupportedNode, InfeasibleExpansion, RecursionError):
        return None


# -- sec6 ---------------------------------------------------------------------------------

SEC6_CANDIDATES = ("S", "D", "Sq", "SqS", "SqD", "M3", "Sgn", "zero", "R")
# operands for the deep spot check; + and - nest squares of sums, so only
# near-zero operands expand within budget
SEC6_DEEP = {"add": ("zero", "S"), "sub": ("zero", "zero"), "ominus": ("SqS", "S")}
SEC6_PAIRS_PER_OP = 4
SEC6_RANGE = 64


def sec6_operand(section: str, name: str) -> Term:
    if name in ("SqS", "SqD"):
        return Compose(catalog.reference(section, "Sq"), catalog.reference(section, name[2:]))
    return catalog.reference(section, name)


def _side_condition(op: str) -> Callable[[int, int, int | None], bool]:
    return {
        "plus_arg_minus": lambda x, f, g: f >= x,
        "oplus": lambda x, f, g: f >= x and g >= x,
        "otimes": lambda x, f, g: f >= x and g >= x,
        "ominus": lambda x, f, g: f >= x and g >= x and f >= g * g,
        "sub": lambda x, f, g: f >= g,
        "add": lambda x, f, g: True,
        "i_minus": lambda x, f, g: x >= f,
        "d_minus": lambda x, f, g: 2 * x >= f,
    }[op]


def _precondition(op: str, f: Term, g: Term | None) -> Callable[[tuple], bool]:
    cond = _side_condition(op)
    s = _shallow()

    def check(args, s=s):
        x = args[0]
        return cond(x, s.value(f, x), s.value(g, x) if g is not None else None)

    return check


def sec6_ops(variant: str) -> tuple[str, ...]:
    return tuple(op for op in builders.SEC6_OPS if variant != "E" or op not in ("i_minus", "d_minus"))


@lru_cache(maxsize=None)
def sec6_pairs(variant: str, op: str) -> tuple[tuple[str, ...], ...]:
    """Candidate operands whose side condition holds on 0..64 (oracle pre-scan)."""
    section = f"sec6-{variant}"
    binary = op in ("oplus", "ominus", "otimes", "add", "sub")
    combos: Iterable[tuple[str, ...]]
    if binary:
        combos = ((a, b) for a in SEC6_CANDIDATES for b in SEC6_CANDIDATES)
    else:
        combos = ((a,) for a in SEC6_CANDIDATES)
    out = []
    for names in combos:
        ts = [sec6_operand(section, n) for n in names]
        pre = _precondition(op, ts[0], ts[1] if binary else None)
        if all(pre((x,)) for x in range(SEC6_RANGE + 1)):
            out.append(names)
        if len(out) == SEC6_PAIRS_PER_OP:
            break
    return tuple(out)


def _sec6_checks(variant: str) -> list[CheckSpec]:
    section = f"sec6-{variant}"
    out: list[CheckSpec] = []
    for e in catalog.catalog_list(section):
        out += entry_checks(e)
    for op in sec6_ops(variant):
        pairs = sec6_pairs(variant, op)
        deep = SEC6_DEEP.get(op, pairs[0] if pairs else None)
        if deep is not None and deep not in pairs:
            pairs += (deep,)
        for names in pairs:
            ts = [sec6_operand(section, n) for n in names]
            f, g = ts[0], (ts[1] if len(ts) > 1 else None)
            d = builders.build_sec6(op, f, g, variant)
            label = ",".join(names)
            pre = _precondition(op, f, g)
            # one level: the builder's template, with inner operators trusted
            out.append(CheckSpec(f"{section}/{op}:{label}", d.expand(), d.shallow, ((0, SEC6_RANGE),), precondition=pre))
            if names == deep:
                out.append(
                    CheckSpec(
                        f"{section}/{op}:{label}:deep",
                        d,
                        d.shallow,
                        ((0, 8),),
                        mode="deep",
                        budget=SEC6_DEEP_BUDGET,
                        precondition=pre,
                        skip_budget=True,
                    )
                )
    return out


# -- remarks ------------------------------------------------------------------------------


def translation_checks() -> list[CheckSpec]:
    out = []
    for a in (1, 2, 3):
        m = builders.translate_offset("mixed", Proj(2, 1), a)
        out.append(CheckSpec(f"remark-a/offset:mixed:pr21:a{a}", m, MixedIter(Proj(2, 1)), ((0, 64),), mode="deep"))
        for flavor in builders.FLAVORS:
            sgn = catalog.reference(f"sec5-{flavor}", "Sgn")
            for name, inner in (("S", Succ()), ("Sgn", sgn)):
                t = builders.translate_offset("pure", inner, a, flavor)
                out.append(
                    CheckSpec(f"remark-a/offset:pure-{flavor}:{name}:a{a}", t, PureIter(inner), ((0, 64),), mode="deep")
                )
    return out


def _remark_checks() -> list[CheckSpec]:
    out: list[CheckSpec] = []
    for e in catalog.catalog_list("remark-a"):
        out += entry_checks(e)
    return out + translation_checks()


# -- oracle self-consistency ----------------------------------------------------------------


def _hexc_recurrence(hi: int) -> list[int]:
    vals = [0]
    for x in range(hi):
        vals.append(oracle.monus(vals[-1] + 2 * (isqrt(x) % 2), 1))
    return vals


def _oracle_checks() -> list[CheckSpec]:
    Z = 10**4
    hx = _hexc_recurrence(Z)
    out = [
        CheckSpec("oracle/pairing:KL", lambda z: oracle.pair(oracle.unpair_k(z), oracle.unpair_l(z)), lambda z: z, ((0, Z),)),
        CheckSpec(
            "oracle/pairing:J",
            oracle.pair,
            lambda z: (oracle.unpair_k(z), oracle.unpair_l(z)),
            ((0, 100), (0, 100)),
            expect="bijection",
        ),
        CheckSpec(
            "oracle/triangular:V",
            lambda z: int(oracle.tri(oracle.tri_inv(z)) <= z < oracle.tri(oracle.tri_inv(z) + 1)),
            lambda z: 1,
            ((0, Z),),
        ),
        CheckSpec("oracle/E-Q", lambda x: int(oracle.excess(x) == 0), "Q", ((0, Z),)),
        CheckSpec("oracle/Hexc:recurrence", oracle.hexc, lambda x: hx[x], ((0, Z),)),
        CheckSpec(
            "oracle/Hexc:odd-root",
            lambda x: oracle.hexc(x) if isqrt(x) % 2 else oracle.excess(x),
            "E",
            ((0, Z),),
        ),
        CheckSpec("oracle/Witer-squares", lambda x: int(oracle.w_iter(x) % 3 != 0), "Q", ((1, 400),)),
        CheckSpec("oracle/f-recurrence", lambda n, x: oracle.fn_value(n + 1, x), _f_by_iteration, ((0, 2), (0, 12))),
        CheckSpec("oracle/B-recurrence", lambda n, x: oracle.bn_value(n + 1, x), _b_by_iteration, ((0, 1), (0, 12))),
    ]
    for n in range(2, 10):
        out.append(CheckSpec(f"oracle/divmod:{n}", lambda x, n=n: oracle.mod_n(n)(x) + n * oracle.div_n(n)(x), lambda x: x, ((0, 1000),)))
        out.append(CheckSpec(f"oracle/Mod-via-C:{n}", _iterate_oracle(oracle.cycle_n(n)), f"Mod{n}", ((0, 200),)))
    for n in range(8):
        out.append(CheckSpec(f"oracle/M:{n}", _iterate_oracle(lambda v, n=n: v + n), f"M{n}", ((0, 200),)))
    return out


def _iterate_oracle(step: Callable[[int], int]) -> Callable[[int], int]:
    def it(x: int) -> int:
        v = 0
        for _ in range(x):
            v = step(v)
        return v

    return it


def _f_by_iteration(n: int, x: int) -> int:
    # f_{n+1} = f_n^#(f_n(1))
    v = oracle.fn_value(n, 1)
    for _ in range(x):
        v = oracle.fn_value(n, v)
    return v


def _b_by_iteration(n: int, x: int) -> int:
    # B_{n+1} = (S^{f_n(1)} B_n)^#
    lift = oracle.fn_value(n, 1)
    v = 0
    for _ in range(x):
        v = oracle.bn_value(n, v) + lift
    return v


# -- registry -------------------------------------------------------------------------------

_BUILDERS: dict[str, Callable[[], list[CheckSpec]]] = {
    "sec2": lambda: [c for e in catalog.catalog_list("sec2") for c in entry_checks(e)],
    "sec4": _sec4_checks,
    "sec5-dist": lambda: _sec5_checks("dist"),
    "sec5-monus": lambda: _sec5_checks("monus"),
    "sec6-E": lambda: _sec6_checks("E"),
    "sec6-K": lambda: _sec6_checks("K"),
    "sec6-L": lambda: _sec6_checks("L"),
    "remarks": _remark_checks,
    "oracle-self": _oracle_checks,
}

_cache: dict[str, list[CheckSpec]] = {}


def suite_specs(name: str) -> list[CheckSpec]:
    if name == ALL:
        return [s for n in SUITES for s in suite_specs(n)]
    if name not in _BUILDERS:
        raise UnknownSuite(name)
    if name not in _cache:
        specs = with_big_stack(_BUILDERS[name])
        ids = [s.id for s in specs]
        if len(set(ids)) != len(ids):
            raise RuntimeError(f"duplicate check ids in suite {name}")
        _cache[name] = sorted(specs, key=lambda s: s.id)
    return _cache[name]


def spec_by_id(suite: str, check_id: str) -> CheckSpec:
    for s in suite_specs(suite):
        if s.id == check_id:
            return s
    raise KeyError(check_id)
