import pytest

from prfkit import oracle
from prfkit.oracle import OracleError, bn_value, fn_seq, fn_value, oracle_eval


def test_pairing_example():
    assert oracle_eval("J2", [1, 2]) == 7
    assert oracle_eval("K", [7]) == 1
    assert oracle_eval("L", [7]) == 2


def test_small_values():
    assert oracle_eval("E", [0]) == 0
    assert oracle.w_step(10) == 15


def test_fn_seq_examples():
    assert fn_seq("f", 2, 4) == 11
    assert fn_seq("B", 1, 5) == 15
    assert fn_seq("B", 0, 0) == 1


def test_b2_closed_form():
    for x in range(10):
        assert bn_value(2, x) == (3 ** (x + 1) - 3) // 2


def test_f_recurrence_brute():
    # f_{n+1}(x) = f_n^x applied to f_n(1), checked by unrolling
    for n in range(2):
        for x in range(6):
            v = fn_value(n, 1)
            for _ in range(x):
                v = fn_value(n, v)
            assert fn_value(n + 1, x) == v


def test_pairing_bijection_small():
    seen = set()
    for x in range(40):
        for y in range(40):
            z = oracle.pair(x, y)
            assert (oracle.unpair_k(z), oracle.unpair_l(z)) == (x, y)
            seen.add(z)
    assert len(seen) == 1600


def test_bignum_power():
    assert oracle_eval("Pw", [255]) == 2**255


def test_unknown_name():
    with pytest.raises(OracleError):
        oracle_eval("NoSuchThing", [1])


def test_family_names():
    assert oracle_eval("Mod3", [7]) == 1
    assert oracle_eval("Div2", [7]) == 3


def test_infeasible_index():
    with pytest.raises(OracleError):
        fn_value(6, 3)
