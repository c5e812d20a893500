from fractions import Fraction as F
from math import factorial

import pytest

from seqconv.errors import OrderTooSmall
from seqconv.exact import Poly, RatFun
from seqconv.hyperexp import HyperExpRate, hyperexp_factor, hyperexp_steps, reduce_padded
from seqconv.ore import DiffOp, ShiftOp
from seqconv.seqrep import TruncatedSeries

n = Poly.x()
D = DiffOp.D()
X = DiffOp({0: RatFun.x()})
L4 = ShiftOp({3: RatFun(n + 3), 2: RatFun(-(n * n + 6 * n + 10)), 1: RatFun(2 * n + 5), 0: -1})


def zero_extended_ok(L, vals, N):
    """L applied to vals extended by zeros to negative indices vanishes on -ord..N."""
    op = L.normalized_support()
    for m in range(-op.hi, N + 1):
        total = F(0)
        for k, c in op.terms.items():
            j = m + k
            if 0 <= j < len(vals):
                total += c(m) * vals[j]
        if total:
            return False
    return True


def test_steps_of_worked_example():
    st = hyperexp_steps(L4, 1)
    # M = -x^-2 (x^2 D^2 - (x-1)(2x-1) D + (x-2)(x-1))
    M = X * X * D * D - DiffOp({0: RatFun((n - 1) * (2 * n - 1))}) * D + DiffOp({0: RatFun((n - 2) * (n - 1))})
    assert st.M.equivalent(M)
    assert st.M_gauged.equivalent(X * X * D * D + (3 * X - 1) * D + 1)
    assert st.result == ShiftOp({3: RatFun(n + 3), 2: RatFun(-(n + 3) ** 2)})


def test_rate_object_and_zero_rate():
    assert hyperexp_factor(L4, HyperExpRate(1)) == hyperexp_factor(L4, 1)
    assert hyperexp_factor(L4, 0) == L4.canonical()


def test_zero_rate_drops_content_on_series_side():
    # R(E^2 + 1) = (x^2 + 1) x^-2: both E^2 + 1 and E^2 kill only zero on zero-extended sequences
    assert hyperexp_factor(ShiftOp({2: 1, 0: 1}), 0) == ShiftOp({2: 1})


def test_order_too_small():
    with pytest.raises(OrderTooSmall):
        hyperexp_factor(ShiftOp({1: 1, 0: -1}), 1)


def test_reduce_worked_example():
    red = reduce_padded(ShiftOp({3: RatFun(n + 3), 2: RatFun(-(n + 3) ** 2)}))
    assert red.e_power == 2
    assert red.content == n + 3
    assert red.operator == ShiftOp({1: 1, 0: RatFun(-(n + 1))})
    assert red.affected == ()


def test_reduce_constant_content_and_affected_index():
    red = reduce_padded(ShiftOp({1: 2, 0: -2}))
    assert red.operator == ShiftOp({1: 1, 0: -1})
    assert red.e_power == 0
    red = reduce_padded(ShiftOp({1: RatFun(n - 2), 0: RatFun(-(n - 2) * (n + 1))}))
    assert red.affected == (2,)
    unchanged = ShiftOp({2: 1, 1: RatFun(n), 0: 1})
    assert reduce_padded(unchanged).operator == unchanged


def test_factorial_solutions_of_reduced_operator():
    red = reduce_padded(hyperexp_factor(L4, 1))
    b = [3 * factorial(k) for k in range(40)]
    assert all(red.operator.apply(lambda k: b[k], m) == 0 for m in range(31))


def test_equivalence_on_truncations():
    # a = 1/n! has rate 1; b = n! is a cofactor, 2^n is not
    a = [F(1, factorial(k)) for k in range(40)]
    Lp = hyperexp_factor(L4, 1)
    for b, expected in [([F(factorial(k)) for k in range(40)], True), ([F(2**k) for k in range(40)], False)]:
        ab = [sum(a[i] * b[m - i] for i in range(m + 1)) for m in range(40)]
        assert zero_extended_ok(L4, ab, 30) is expected
        assert zero_extended_ok(Lp, b, 30) is expected


def test_rate_series_matches_exponential():
    s = TruncatedSeries.from_rate(RatFun.const(2), 6)
    assert s.coeffs[:6] == tuple(F(2**k, factorial(k)) for k in range(6))
