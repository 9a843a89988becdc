"""Direct integer-arithmetic reference implementations.

Nothing in here evaluates a term: every function is computed straight from
its arithmetic definition, so the oracle can serve as ground truth for the
evaluator.  Atoms (initial functions with a name) are looked up through
:data:`ATOMS`; parametric families such as ``Mod5`` or ``B2`` are resolved by
:func:`lookup`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from math import isqrt
from typing import Callable, Sequence


class OracleError(Exception):
    pass


class UnknownName(OracleError):
    def __init__(self, name: str):
        super().__init__(f"no oracle for {name!r}")
        self.name = name


class InfeasibleIndex(OracleError):
    def __init__(self, n: int):
        super().__init__(f"index {n} is beyond the feasible range (n <= 3)")
        self.n = n


# -- named functions ----------------------------------------------------------


def monus(x: int, y: int) -> int:
    return x - y if x >= y else 0


def dist(x: int, y: int) -> int:
    return x - y if x >= y else y - x


def rt(x: int) -> int:
    # math.isqrt is exact floor on arbitrary-precision ints
    return isqrt(x)


def tri(x: int) -> int:
    """The x-th triangular number."""
    return (x * x + x) // 2


def tri_inv(x: int) -> int:
    return (isqrt(8 * x + 1) - 1) // 2


def pair(x: int, y: int) -> int:
    return tri(x + y) + x


def unpair_k(z: int) -> int:
    return z - tri(tri_inv(z))


def unpair_l(z: int) -> int:
    return tri(tri_inv(z) + 1) - z - 1


def excess(x: int) -> int:
    r = isqrt(x)
    return x - r * r


def is_square(x: int) -> int:
    r = isqrt(x)
    return 1 if r * r == x else 0


def cosg(x: int) -> int:
    return 1 if x == 0 else 0


def sgn(x: int) -> int:
    return 0 if x == 0 else 1


def w_step(x: int) -> int:
    """Five-case map whose iterates detect squares modulo 3."""
    if x == 0:
        return 2
    if x % 10 == 0:
        return 3 * x // 2
    if x % 2 != 0 and x % 5 == 0:
        return 2 * x // 5
    if x % 3 == 0 and x % 5 != 0:
        return 2 * x // 3
    # x % 3 != 0 and x % 5 != 0
    return 15 * x // 2


def w_iter(x: int) -> int:
    v = 0
    for _ in range(x):
        v = w_step(v)
    return v


def hexc(x: int) -> int:
    """H(0)=0, H(x+1) = H(x) + 2N(Rt x) -. 1, in closed form.

    Inside a block x = n^2 + e (0 <= e <= 2n) the value is e when n is odd and
    2n - 1 - e (clamped at 0) when n is even.
    """
    n = isqrt(x)
    e = x - n * n
    if n % 2:
        return e
    return max(2 * n - 1 - e, 0)


def is_pow2(x: int) -> int:
    """1 when x = 2^k with k >= 1, else 0."""
    return 1 if x >= 2 and x & (x - 1) == 0 else 0


def ceil_sqrt_excess(x: int) -> int:
    return 2 * x - isqrt(x)


def cond_alpha(x: int) -> int:
    """2^(x+1) for odd x, 0 for even x."""
    return 1 << (x + 1) if x % 2 else 0


def cond_beta(x: int) -> int:
    """2x for even x, 0 for odd x."""
    return 0 if x % 2 else 2 * x


# -- the f_n / B_n sequences --------------------------------------------------


def _check_index(n: int) -> None:
    if n < 0 or n > 3:
        raise InfeasibleIndex(n)


def fn_value(n: int, x: int) -> int:
    _check_index(n)
    if n == 0:
        return x + 1
    if n == 1:
        return x + 2
    if n == 2:
        return 2 * x + 3
    return 8 * 2**x - 3


def _b2_capped(x: int, cap: int | None) -> int:
    if cap is not None and x > cap.bit_length():
        # 3^(x+1) outgrows 2^x, so (3^(x+1) - 3) / 2 >= 2^x > cap here
        return cap
    v = (3 ** (x + 1) - 3) // 2
    return v if cap is None else min(v, cap)


def bn_value(n: int, x: int, cap: int | None = None) -> int:
    """B_n(x); with ``cap`` the result is min(B_n(x), cap), computed with
    saturation so that comparisons against small values stay exact even when
    B_n(x) itself is astronomically large."""
    _check_index(n)
    if n == 0:
        v = x + 1
    elif n == 1:
        v = 3 * x
    elif n == 2:
        return _b2_capped(x, cap)
    else:
        if cap is None and x >= 4:
            # B_3(4) = 5 + B_2(B_3(3)) has ~10^175 digits
            raise OracleError(f"B3({x}) is too large to represent; pass cap=")
        v = 0
        for _ in range(x):
            v = 5 + _b2_capped(v, cap)
            if cap is not None and v >= cap:
                return cap
        return v
    return v if cap is None else min(v, cap)


def fn_seq(kind: str, n: int, x: int, cap: int | None = None) -> int:
    if kind == "f":
        v = fn_value(n, x)
        return v if cap is None else min(v, cap)
    if kind == "B":
        return bn_value(n, x, cap)
    raise UnknownName(kind)


# -- families ------------------------------------------------------------------


def char_n(n: int) -> Callable[[int], int]:
    return lambda x: 1 if x == n else 0


def mult_n(n: int) -> Callable[[int], int]:
    return lambda x: n * x


def cycle_n(n: int) -> Callable[[int], int]:
    # C_n(x) = x + 1 for x <= n - 2, else 0
    return lambda x: x + 1 if x <= n - 2 else 0


def mod_n(n: int) -> Callable[[int], int]:
    return lambda x: x % n


def div_n(n: int) -> Callable[[int], int]:
    return lambda x: x // n


def pred_hat(a: int) -> Callable[[int], int]:
    # a at 0, x - 1 elsewhere
    return lambda x: a if x == 0 else x - 1


def cosg_hat(a: int) -> Callable[[int], int]:
    return lambda x: a if x == 0 else 0


# -- registry -------------------------------------------------------------------


@dataclass(frozen=True)
class OracleFn:
    name: str
    arity: int
    fn: Callable[..., int]

    def __call__(self, *args: int) -> int:
        return self.fn(*args)


def _u(name: str, fn: Callable[[int], int]) -> OracleFn:
    return OracleFn(name, 1, fn)


ATOMS: dict[str, OracleFn] = {
    f.name: f
    for f in [
        _u("I", lambda x: x),
        _u("S", lambda x: x + 1),
        _u("P", lambda x: monus(x, 1)),
        _u("D", lambda x: 2 * x),
        _u("Sq", lambda x: x * x),
        _u("Hf", lambda x: x // 2),
        _u("Pw", lambda x: 1 << x),
        _u("Rt", rt),
        _u("A", tri),
        _u("V", tri_inv),
        _u("K", unpair_k),
        _u("L", unpair_l),
        _u("O", cosg),
        _u("Sgn", sgn),
        _u("N", lambda x: x % 2),
        _u("E", excess),
        _u("Q", is_square),
        _u("R", lambda x: x + 2 * isqrt(x)),
        _u("W", w_step),
        _u("Witer", w_iter),
        _u("Y", ceil_sqrt_excess),
        _u("Z", lambda x: x * (x + 3) // 2),
        _u("Gsq", lambda x: (x + 1) ** 2),
        _u("Hprod", lambda x: (x + 1) * (x + 4) // 2),
        _u("Hexc", hexc),
        _u("pow2", is_pow2),
        _u("alpha", cond_alpha),
        _u("beta", cond_beta),
        OracleFn("add2", 2, lambda x, y: x + y),
        OracleFn("monus2", 2, monus),
        OracleFn("dist2", 2, dist),
        OracleFn("J2", 2, pair),
        OracleFn("delta2", 2, lambda x, y: 1 if x == y else 0),
        OracleFn("minus2", 2, monus),
    ]
}

_FAMILY = re.compile(r"^(O|M|C|Mod|Div|f|B|Ph|Oh)(\d+)$")

_FAMILY_MIN = {"O": 0, "M": 0, "C": 2, "Mod": 2, "Div": 2, "f": 0, "B": 0, "Ph": 0, "Oh": 0}


def _family(prefix: str, n: int) -> OracleFn | None:
    if n < _FAMILY_MIN[prefix]:
        return None
    name = f"{prefix}{n}"
    if prefix == "O":
        return _u(name, char_n(n))
    if prefix == "M":
        return _u(name, mult_n(n))
    if prefix == "C":
        return _u(name, cycle_n(n))
    if prefix == "Mod":
        return _u(name, mod_n(n))
    if prefix == "Div":
        return _u(name, div_n(n))
    if prefix == "Ph":
        return _u(name, pred_hat(n))
    if prefix == "Oh":
        return _u(name, cosg_hat(n))
    if n > 3:
        return None
    if prefix == "f":
        return _u(name, lambda x: fn_value(n, x))
    return _u(name, lambda x: bn_value(n, x))


_family_cache: dict[str, OracleFn] = {}


def lookup(name: str) -> OracleFn:
    """Resolve a named function or family member, e.g. ``"Mod5"``."""
    f = ATOMS.get(name)
    if f is not None:
        return f
    f = _family_cache.get(name)
    if f is not None:
        return f
    m = _FAMILY.match(name)
    if m:
        f = _family(m.group(1), int(m.group(2)))
        if f is not None:
            _family_cache[name] = f
            return f
    if re.fullmatch(r"c\d+", name):
        n = int(name[1:])
        return _u(name, lambda x: n)
    raise UnknownName(name)


def is_known(name: str) -> bool:
    try:
        lookup(name)
    except UnknownName:
        return False
    return True


def oracle_eval(name: str, args: Sequence[int]) -> int:
    f = lookup(name)
    if len(args) != f.arity:
        raise OracleError(f"{name} takes {f.arity} argument(s), got {len(args)}")
    return f.fn(*args)
