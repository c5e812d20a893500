from fractions import Fraction as F
from math import factorial

import pytest

from seqconv.closure import conv_annihilator_via_gf, first_failure
from seqconv.conv import (
    conv_dalembert,
    conv_liouvillian,
    solve_first_order,
    theorem_main_step,
    unshift_conv,
)
from seqconv.errors import IrregularInput, NotRationallyDAlembertian
from seqconv.exact import ONE, Poly, RatFun
from seqconv.ore import ShiftOp
from seqconv.seqrep import (
    Conv,
    Delta,
    Hypergeom,
    Interlace,
    NestedSum,
    PolePower,
    PolyPower,
    QuasiAtom,
    RationalSeq,
    Shift,
    const,
    factorial as fact_seq,
    geometric,
    inv_factorial,
    terms,
)

n = Poly.x()
HARMONIC = NestedSum((const(1), RationalSeq(RatFun(ONE, n), (0,))))


def brute(a, b, count):
    x, y = terms(a, count), terms(b, count)
    return [sum(x[k] * y[i - k] for k in range(i + 1)) for i in range(count)]


def kills(L, expr, stop=40):
    vals = terms(expr, stop + L.hi + 1)
    return first_failure(L, vals, 0, stop) is None


def check_conv(a, b, count=30):
    res = conv_dalembert(a, b)
    assert terms(res.expr, count) == brute(a, b, count)
    assert all(f.order == 1 for f in res.annihilator)
    assert kills(res.annihilator.expand(), Conv(a, b), count)
    return res


def test_example_hypergeometric_times_rational():
    a = Hypergeom(2 * n + 2, ONE, (F(1, 2),))
    b = RationalSeq(RatFun(ONE, n + F(1, 2)))
    res = check_conv(a, b, 41)
    step = res.steps[0]
    assert step.L0 == ShiftOp({1: 1, 0: RatFun(-(2 * n + 3))})
    dfact_even = [2**k * factorial(k) for k in range(41)]
    assert terms(step.rhs, 41) == [F(1, 2 * m + 3) - sum(dfact_even[: m + 1]) for m in range(41)]
    first = ShiftOp({1: 1, 0: -RatFun((2 * n + 3) * (2 * n + 7) ** 2, (2 * n + 5) ** 2 * (2 * n + 9))})
    want = [first, ShiftOp({1: 1, 0: RatFun(-(2 * n + 4))}), ShiftOp({1: 1, 0: -1}),
            ShiftOp({1: 1, 0: RatFun(-(2 * n + 3))})]
    assert len(res.annihilator) == 4
    for got, w in zip(res.annihilator, want):
        assert got.equivalent(w)


def test_harmonic_squared():
    res = check_conv(HARMONIC, HARMONIC, 40)
    known = ShiftOp.compose([ShiftOp({1: RatFun(n + 3), 0: RatFun(-(n + 2))})] * 2
                            + [ShiftOp({1: 1, 0: -1})] * 2)
    assert kills(known, res.expr, 60)


def test_factorial_times_harmonic():
    res = check_conv(fact_seq(), HARMONIC, 30)
    e1 = ShiftOp({1: 1, 0: -1})
    e2 = ShiftOp({1: 1, 0: RatFun(-(n + 2))})
    known = ShiftOp.compose([ShiftOp({1: RatFun(n + 5), 0: RatFun(-(n + 4))}), e2, e1, e2, e1])
    assert kills(known, res.expr, 60)


def test_irregular_prefix_on_right():
    check_conv(fact_seq(), RationalSeq(RatFun(ONE, n - 2), (5, 7, 11)), 25)


def test_quasi_rational_right_operands():
    check_conv(fact_seq(), QuasiAtom(3, PolePower(F(-1, 3), 2)), 25)
    check_conv(NestedSum((inv_factorial(), geometric(-1))), QuasiAtom(2, PolyPower(2)), 25)


def test_finitely_supported_operands():
    check_conv(Delta(), HARMONIC, 20)
    check_conv(HARMONIC, Delta(), 20)


def test_gf_oracle_agrees():
    LH = ShiftOp({2: RatFun(n + 2), 1: RatFun(-(2 * n + 3)), 0: RatFun(n + 1)})
    LF = ShiftOp({1: 1, 0: RatFun(-(n + 1))})
    for a, La, b, Lb in [(HARMONIC, LH, HARMONIC, LH), (fact_seq(), LF, HARMONIC, LH)]:
        res = conv_dalembert(a, b)
        assert kills(conv_annihilator_via_gf(La, Lb, a, b), res.expr, 40)


def test_rejects_hypergeometric_right_operand():
    with pytest.raises(NotRationallyDAlembertian):
        conv_dalembert(fact_seq(), inv_factorial())


def test_main_step_needs_regular_input():
    with pytest.raises(IrregularInput):
        theorem_main_step(NestedSum((fact_seq(),)), NestedSum((RationalSeq(RatFun(ONE, n + 1)),)))


def test_main_step_rhs():
    a = NestedSum((Hypergeom(2 * n + 2, ONE, (F(1, 2),)),))
    b = NestedSum((QuasiAtom(1, PolePower(F(-1, 2), 1)),))
    step = theorem_main_step(a, b)
    y = brute(a, b, 22)
    lhs = [y[m + 1] - (2 * m + 3) * y[m] for m in range(21)]
    assert terms(step.rhs, 21) == lhs


def test_solve_first_order():
    # y(n+1) - (n+1) y(n) = 1, y(0) = 2
    L0 = ShiftOp({1: 1, 0: RatFun(-(n + 1))})
    y = solve_first_order(L0, const(1), 2)
    want = [F(2)]
    for m in range(10):
        want.append((m + 1) * want[-1] + 1)
    assert terms(y, 11) == want


def test_unshift_conv():
    a, b = fact_seq(), geometric(3)
    for k in (1, 2):
        rep = Conv(Shift(a, k), Shift(b, k))
        assert terms(unshift_conv(rep, a, b, k), 15) == brute(a, b, 15)


def test_liouvillian_double_factorial():
    u = Interlace((Hypergeom(2 * n + 2, ONE, (1,)), Hypergeom(2 * n + 3, ONE, (1,))))
    v = RationalSeq(RatFun(ONE, n + 1))
    assert terms(conv_liouvillian(u, v), 30) == brute(u, v, 30)
