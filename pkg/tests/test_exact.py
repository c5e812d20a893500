from fractions import Fraction as F

import pytest

from seqconv.errors import ZeroPolynomial
from seqconv.exact import (
    ONE,
    Poly,
    RatFun,
    falling_power,
    max_nonneg_root,
    nonneg_integer_roots,
    partial_fractions,
    rational_roots,
)

n = Poly.x()


def test_poly_arithmetic_and_eval():
    p = (n + 1) * (n - 2)
    assert p.coeffs == (F(-2), F(-1), F(1))
    assert p(3) == 4
    assert p.shift(1) == (n + 2) * (n - 1)
    assert p.derivative() == 2 * n - 1


def test_poly_divmod_and_gcd():
    a = (n - 1) * (n + 3) * (2 * n + 1)
    b = (n + 3) * (n - 5)
    q, r = divmod(a, b)
    assert q * b + r == a
    assert r.degree < b.degree
    assert a.gcd(b) == n + 3
    assert a.gcd(Poly()) == a.monic()
    assert Poly.const(7).gcd(a) == ONE


def test_gcd_with_large_rational_coefficients():
    f = Poly.from_roots([F(1, 3), F(-7, 2), 11]) * F(5, 9)
    g = Poly.from_roots([F(1, 3), F(-7, 2), 4, 4]) * F(-3, 13)
    assert f.gcd(g) == Poly.from_roots([F(1, 3), F(-7, 2)])


def test_falling_power():
    assert falling_power(5, 3) == 60
    assert falling_power(F(1, 2), 2) == F(-1, 4)
    assert falling_power(7, 0) == 1


def test_rational_roots_with_multiplicity():
    p = Poly.from_roots([F(1, 3), F(1, 3), -7, 0, F(-5, 2)]) * (n * n + 1)
    assert rational_roots(p) == [(F(-7), 1), (F(-5, 2), 1), (F(0), 1), (F(1, 3), 2)]


def test_rational_roots_huge_root():
    big = 10**30 + 7
    p = (n - big) * (3 * n + 1)
    assert rational_roots(p) == [(F(-1, 3), 1), (F(big), 1)]


def test_rational_roots_zero_polynomial():
    with pytest.raises(ZeroPolynomial):
        rational_roots(Poly())


def test_nonneg_roots():
    p = (n - 4) * (n + 2) * (n - F(1, 2)) * n
    assert nonneg_integer_roots(p) == [0, 4]
    assert max_nonneg_root(p) == 4
    assert max_nonneg_root(n + 1) == -1


def test_ratfun_normalizes():
    r = RatFun((n + 1) * (n - 2), (n - 2) * (2 * n))
    assert r == RatFun(n + 1, 2 * n)
    assert r(1) == 1
    with pytest.raises(ZeroDivisionError):
        r(0)


def test_ratfun_arithmetic():
    a = RatFun(ONE, n)
    b = RatFun(ONE, n + 1)
    assert a - b == RatFun(ONE, n * (n + 1))
    assert (a * b).inverse() == RatFun(n * (n + 1))
    assert a.shift(1) == b


def test_partial_fractions_recombine():
    # 1/(n^2 (n+1/2)) = 4/(n+1/2) - 4/n + 2/n^2
    r = RatFun(ONE, n * n * (n + F(1, 2)))
    pf = partial_fractions(r)
    terms = {(beta, j): c for beta, j, c in pf.pole_terms}
    assert terms == {(F(0), 1): F(-4), (F(0), 2): F(2), (F(-1, 2), 1): F(4)}
    assert pf.recombine() == r


def test_partial_fractions_polynomial_part():
    r = RatFun(n**3 + 1, n - 1)
    pf = partial_fractions(r)
    assert pf.poly_part == n * n + n + 1
    assert pf.recombine() == r
