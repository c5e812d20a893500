from fractions import Fraction as F

import pytest

from seqconv.errors import ExprSyntaxError
from seqconv.exact import ONE, Poly, RatFun
from seqconv.ore import DiffOp, ShiftOp
from seqconv.parsing import parse_operator, parse_ratfun, parse_seq_expr, seq_to_str
from seqconv.seqrep import (
    Conv,
    Hypergeom,
    LinComb,
    NestedSum,
    PolePower,
    QuasiAtom,
    RationalSeq,
    terms,
)

n = Poly.x()


def test_ratfun_grammar():
    assert parse_ratfun("1/(n+1) - 1/n") == RatFun(Poly.const(-1), n * (n + 1))
    assert parse_ratfun("2^3 - -n^2") == RatFun(n * n + 8)
    assert parse_ratfun("(x - 1)^-2", "x") == RatFun(ONE, (n - 1) ** 2)
    assert parse_ratfun(" 3/6 ") == RatFun.const(F(1, 2))


def test_operator_worked_example():
    L = parse_operator("(n+3)*E^3 - (n^2+6*n+10)*E^2 + (2*n+5)*E - 1")
    assert L == ShiftOp({3: RatFun(n + 3), 2: RatFun(-(n * n + 6 * n + 10)), 1: RatFun(2 * n + 5), 0: -1})


def test_operator_small_cases():
    assert parse_operator("E") == ShiftOp.E()
    assert parse_operator("E^-1 + n") == ShiftOp({-1: 1, 0: RatFun(n)})
    # E n = (n+1) E
    assert parse_operator("E*n") == ShiftOp({1: RatFun(n + 1)})


def test_differential_operator():
    M = parse_operator("x^2*D^2 + (3*x-1)*D + 1")
    assert isinstance(M, DiffOp)
    assert M == DiffOp({2: RatFun(n * n), 1: RatFun(3 * n - 1), 0: 1})
    assert parse_operator("x^-1*D") == DiffOp({1: RatFun(ONE, n)})


def test_operator_round_trip():
    for text in ["(n+3)*E^3 - (n^2+6*n+10)*E^2 + (2*n+5)*E - 1", "1/(n+2)*E - n/3", "-E^2 + E^-1"]:
        L = parse_operator(text)
        assert parse_operator(L.to_str()) == L
    M = parse_operator("-x^-2*D^2 + (x+1)/(x-3)*D - 1/2")
    assert parse_operator(M.to_str()) == M


def test_sequence_examples():
    e = parse_seq_expr("conv(hyper(n+1; 1; 1), rat(1/(n+1);))")
    assert e == Conv(Hypergeom(n + 1, ONE, (1,)), RationalSeq(RatFun(ONE, n + 1)))
    ddf = parse_seq_expr("interlace(hyper(2*n+2; 1; 1), hyper(2*n+3; 1; 1))")
    assert terms(ddf, 8) == [1, 1, 2, 3, 8, 15, 48, 105]


def test_sequence_forms():
    e = parse_seq_expr("nsum(rat(1), rat(1/n; 0))")
    assert e == NestedSum((RationalSeq(RatFun.const(1)), RationalSeq(RatFun(ONE, n), (0,))))
    q = parse_seq_expr("quasi(3; pole -1/3 2)")
    assert q == QuasiAtom(3, PolePower(F(-1, 3), 2))
    c = parse_seq_expr("2*delta - 1/2*fin(1, 2)")
    assert isinstance(c, LinComb)
    assert terms(c, 3) == [F(3, 2), -1, 0]
    assert terms(parse_seq_expr("msect(lam(psum(shift(ishift(rat(1), 5), 1)), 2), 2, 0)"), 3) == [1, 2, 3]
    assert terms(parse_seq_expr("had(quasi(2; pow 1), rat(n))"), 3) == [0, 2, 16]
    assert terms(parse_seq_expr("0"), 2) == [0, 0]


def test_sequence_round_trip():
    texts = [
        "conv(hyper(n + 1; 1; 1), rat((1)/(n + 1)))",
        "nsum(hyper(1; n + 1; 1), quasi(-1), quasi(2; pow 2); 1, 0) - 3/4*delta",
        "-(fin(1, -2) + msect(lam(rat(n^2 - 1/2; 7), 3), 3, 1))",
        "interlace(psum(had(rat(1), quasi(1/2; pole -1/2 3))), ishift(shift(delta, 2), -5/3))",
    ]
    for t in texts:
        e = parse_seq_expr(t)
        assert parse_seq_expr(seq_to_str(e)) == e
        assert seq_to_str(parse_seq_expr(seq_to_str(e))) == seq_to_str(e)


@pytest.mark.parametrize(
    "text, position",
    [("conv(", 5), ("conv(delta delta)", 11), ("hyper(n; 1)", 10), ("rat(1/n", 7), ("foo", 0), ("delta +", 7)],
)
def test_syntax_error_positions(text, position):
    with pytest.raises(ExprSyntaxError) as info:
        parse_seq_expr(text)
    assert info.value.position == position
    assert info.value.expected


def test_operator_syntax_errors():
    with pytest.raises(ExprSyntaxError) as info:
        parse_operator("E +* 2")
    assert info.value.position == 3
    with pytest.raises(ExprSyntaxError):
        parse_operator("n*D")
    with pytest.raises(ExprSyntaxError):
        parse_operator("1/(E+1)")
    with pytest.raises(ExprSyntaxError):
        parse_operator("E $ 2")
