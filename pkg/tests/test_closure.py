from fractions import Fraction as F

from seqconv.closure import (
    AnnihilatedSeq,
    ann_add,
    ann_hadamard,
    conv_annihilator_via_gf,
    first_failure,
    op_interlace,
    op_multisect_rep,
    op_unary,
    valid_from,
)
from seqconv.exact import ONE, Poly, RatFun
from seqconv.ore import ShiftOp
from seqconv.seqrep import (
    Conv,
    Interlace,
    LinComb,
    NestedSum,
    Product,
    RationalSeq,
    const,
    factorial,
    geometric,
    inv_factorial,
    terms,
)

n = Poly.x()
FACT = AnnihilatedSeq(factorial(), ShiftOp({1: 1, 0: RatFun(-(n + 1))}))
HARMONIC = NestedSum((const(1), RationalSeq(RatFun(ONE, n), (0,))))


def annihilates(L, expr, start=0, stop=30):
    vals = terms(expr, stop + L.hi + 1)
    return first_failure(L, vals, start, stop) is None


def test_unary_operations_keep_annihilation():
    for kind in ["shift", ("invshift", 5), "difference", "psum"]:
        out = op_unary(kind, FACT)
        assert annihilates(out.ann, out.expr, out.valid_from)


def test_unary_values():
    assert terms(op_unary("psum", FACT).expr, 4) == [1, 2, 4, 10]
    assert terms(op_unary("difference", FACT).expr, 4) == [0, 1, 4, 18]
    sec = op_unary(("msect", 2, 1), FACT)
    assert sec.ann is None
    assert terms(sec.expr, 3) == [1, 6, 120]


def test_valid_from_reports_late_start():
    # 0, 2, 4, 8, ...: E - 2 fails only at n = 0
    seq = LinComb((1, -1), (geometric(2), RationalSeq(RatFun.const(0), (1,))))
    assert valid_from(ShiftOp({1: 1, 0: -2}), seq) == 1


def test_ann_add_and_hadamard():
    a, La = geometric(2), ShiftOp({1: 1, 0: -2})
    b, Lb = factorial(), FACT.ann
    assert annihilates(ann_add(La, Lb), a + b)
    assert annihilates(ann_hadamard(La, Lb), Product(a, b))


def test_gf_convolution_annihilator():
    L = ShiftOp({1: RatFun(n + 1), 0: -1})
    got = conv_annihilator_via_gf(L, L, inv_factorial(), inv_factorial())
    assert got.equivalent(ShiftOp({1: RatFun(n + 1), 0: -2}))


def test_gf_annihilator_harmonic_square():
    LH = ShiftOp({2: RatFun(n + 2), 1: RatFun(-(2 * n + 3)), 0: RatFun(n + 1)})
    assert annihilates(LH, HARMONIC)
    got = conv_annihilator_via_gf(LH, LH, HARMONIC, HARMONIC)
    assert annihilates(got, Conv(HARMONIC, HARMONIC), 0, 40)


def test_multisection_of_nested_sums():
    inner = NestedSum((factorial(), geometric(-1), RationalSeq(RatFun(ONE, n + 1))), (1, 0))
    for e in [HARMONIC, inner]:
        full = terms(e, 40)
        for m in (2, 3):
            for r in range(m):
                sec = op_multisect_rep(e, m, r)
                assert terms(sec, 12) == [full[m * k + r] for k in range(12)]


def test_interlace_wrapper():
    out = op_interlace([factorial(), const(F(1, 2))])
    assert isinstance(out.expr, Interlace)
    assert terms(out.expr, 4) == [1, F(1, 2), 1, F(1, 2)]
    assert op_interlace([factorial()]).expr == factorial()
