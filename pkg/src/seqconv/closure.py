"""Closure operations on sequences, both on representations and on
annihilating recurrence operators."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import PoleAtIndex
from .ore import (
    ShiftOp,
    iso_R,
    iso_Rinv,
    lclm,
    symmetric_product_diff,
    symmetric_product_shift,
)
from .seqrep import (
    Evaluator,
    FinSupport,
    Interlace,
    InvShift,
    LinComb,
    Multisect,
    NestedSum,
    PartialSum,
    Product,
    SeqExpr,
    Shift,
    as_nest_terms,
    msect_atom,
    zeta_adjust,
)


@dataclass(frozen=True)
class AnnihilatedSeq:
    """A sequence expression with an optional operator annihilating it from `valid_from` on."""

    expr: SeqExpr
    ann: ShiftOp | None = None
    valid_from: int = 0


def first_failure(ann: ShiftOp, values, start: int, stop: int):
    """First n in [start, stop] where ann applied to the term list is nonzero, or None."""
    for n in range(start, stop + 1):
        try:
            if ann.apply(lambda k: values[k], n) != 0:
                return n
        except PoleAtIndex:
            return n
    return None


def valid_from(ann: ShiftOp, expr: SeqExpr, horizon: int = 60) -> int:
    """One past the last index in [0, horizon] where ann fails on expr."""
    op = ann if ann.lo >= 0 else ann.normalized_support()
    vals = Evaluator().terms(expr, horizon + op.hi + 1)
    last = -1
    for n in range(horizon + 1):
        try:
            if op.apply(lambda k: vals[k], n) != 0:
                last = n
        except PoleAtIndex:
            last = n
    return last + 1


def op_unary(kind, s: AnnihilatedSeq) -> AnnihilatedSeq:
    """kind: "shift", ("invshift", lam), "difference", "psum" or ("msect", m, r)."""
    tag = kind if isinstance(kind, str) else kind[0]
    L = s.ann.normalized_support() if s.ann is not None else None
    if tag == "shift":
        expr = Shift(s.expr, 1)
        ann = L.shift_coeffs(1) if L is not None else None
        return AnnihilatedSeq(expr, ann, max(s.valid_from - 1, 0))
    if tag == "invshift":
        expr = InvShift(s.expr, kind[1])
        ann = L * ShiftOp.E() if L is not None else None
        return AnnihilatedSeq(expr, ann, s.valid_from)
    if tag == "difference":
        expr = LinComb((1, -1), (Shift(s.expr, 1), s.expr))
        if L is None:
            return AnnihilatedSeq(expr)
        diff = ShiftOp({1: 1, 0: -1})
        big = lclm(L, diff)
        quot, rem = big.right_divmod(diff)
        assert rem.is_zero()
        ann = quot.canonical()
        return AnnihilatedSeq(expr, ann, valid_from(ann, expr, s.valid_from + 60))
    if tag == "psum":
        expr = PartialSum(s.expr)
        if L is None:
            return AnnihilatedSeq(expr)
        ann = (L.shift_coeffs(1) * ShiftOp({1: 1, 0: -1})).canonical()
        return AnnihilatedSeq(expr, ann, max(s.valid_from - 1, 0))
    if tag == "msect":
        _, m, r = kind
        return AnnihilatedSeq(Multisect(s.expr, m, r))
    raise ValueError(f"unknown unary operation {kind!r}")


def ann_add(L1: ShiftOp, L2: ShiftOp) -> ShiftOp:
    return lclm(L1, L2)


def ann_hadamard(L1: ShiftOp, L2: ShiftOp) -> ShiftOp:
    return symmetric_product_shift(L1, L2)


def conv_annihilator_via_gf(L1: ShiftOp, L2: ShiftOp, a: SeqExpr, b: SeqExpr) -> ShiftOp:
    """An operator for a*b obtained through the differential side:
    pad both annihilators for zero extension, map to differential operators,
    take the symmetric product and map back."""
    M1 = iso_R(zeta_adjust(L1, a))
    M2 = iso_R(zeta_adjust(L2, b))
    M = symmetric_product_diff(M1, M2)
    return iso_Rinv(M).normalized_support().canonical()


def op_interlace(parts) -> AnnihilatedSeq:
    exprs = [p.expr if isinstance(p, AnnihilatedSeq) else p for p in parts]
    if len(exprs) == 1:
        return AnnihilatedSeq(exprs[0])
    return AnnihilatedSeq(Interlace(tuple(exprs)))


# ---------------------------------------------------------------------------
# multisection of nested-sum representations


def _atom_terms(e) -> list:
    """Flatten sums and products of atoms into [(coef, atom)]."""
    if isinstance(e, LinComb):
        out = []
        for c, t in zip(e.coeffs, e.terms):
            out.extend((c * cc, a) for cc, a in _atom_terms(t))
        return out
    if isinstance(e, Product):
        return [
            (c1 * c2, Product(a1, a2))
            for c1, a1 in _atom_terms(e.left)
            for c2, a2 in _atom_terms(e.right)
        ]
    return [(Fraction(1), e)]


def _section_nest(ns: NestedSum, m: int, r: int) -> list:
    """Section of one nested sum as [(coef, NestedSum)]."""
    heads = _atom_terms(msect_atom(ns.factors[0], m, r))
    if ns.depth == 1:
        return [(c, NestedSum((a,))) for c, a in heads]
    inner = NestedSum(ns.factors[1:], ns.offsets[1:])
    t = r + ns.offsets[0]
    tq, tr = divmod(t, m)
    out = []
    for i in range(m):
        limit = tq - (1 if i > tr else 0)
        sec = _section_nest(inner, m, i)
        for c, nest in sec:
            for ch, h in heads:
                if limit >= 0:
                    out.append((c * ch, NestedSum((h,) + nest.factors, (limit,) + nest.offsets)))
                else:
                    # sum up to n-1 = sum up to n minus the last term
                    out.append((c * ch, NestedSum((h,) + nest.factors, (0,) + nest.offsets)))
                    merged = Product(h, nest.factors[0])
                    out.append((-c * ch, NestedSum((merged,) + nest.factors[1:], nest.offsets)))
    return out


def op_multisect_rep(e: SeqExpr, m: int, r: int) -> SeqExpr:
    """A nested-sum representation of n -> e(m*n + r)."""
    if m == 1:
        return e
    nests, fins = as_nest_terms(e)
    coeffs, nodes = [], []
    for c, ns in nests:
        for cc, nest in _section_nest(ns, m, r):
            if c * cc:
                coeffs.append(c * cc)
                nodes.append(nest)
    for c, f in fins:
        sec = msect_atom(f if isinstance(f, FinSupport) else FinSupport((1,)), m, r)
        if sec.values:
            coeffs.append(c)
            nodes.append(sec)
    return LinComb(tuple(coeffs), tuple(nodes))

