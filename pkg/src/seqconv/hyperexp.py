"""Convolution factors against a sequence with hyperexponential generating series.

For a with g_a' = r*g_a, the sequences b with L(zero-extended a*b) = 0 are
those with L'(zero-extended b) = 0, where L' comes from a gauge transform on
the differential side.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import OrderTooSmall
from .exact import Poly, RatFun, nonneg_integer_roots
from .ore import DiffOp, ShiftOp, gauge_transform, iso_R, iso_Rinv


@dataclass(frozen=True)
class HyperExpRate:
    """The logarithmic derivative r = g'/g of a generating series, in x."""

    r: RatFun

    def __post_init__(self):
        if not isinstance(self.r, RatFun):
            object.__setattr__(self, "r", _as_ratfun(self.r))


def _as_ratfun(r) -> RatFun:
    if isinstance(r, HyperExpRate):
        return r.r
    if isinstance(r, RatFun):
        return r
    if isinstance(r, Poly):
        return RatFun(r)
    return RatFun.const(r)


@dataclass(frozen=True)
class HyperExpSteps:
    M: DiffOp
    M_gauged: DiffOp
    result: ShiftOp


def hyperexp_steps(L: ShiftOp, r) -> HyperExpSteps:
    if L.order < 2:
        raise OrderTooSmall(f"operator order {L.order} < 2")
    M = iso_R(L)
    Mg = gauge_transform(M, _as_ratfun(r))
    return HyperExpSteps(M, Mg, iso_Rinv(Mg).canonical())


def hyperexp_factor(L: ShiftOp, r) -> ShiftOp:
    """L' with L(zeta(a*b)) = 0 iff L'(zeta(b)) = 0, for a with g_a' = r*g_a."""
    return hyperexp_steps(L, r).result


@dataclass(frozen=True)
class PaddedReduction:
    operator: ShiftOp
    e_power: int
    content: Poly
    affected: tuple
    singular: tuple


def reduce_padded(Lp: ShiftOp) -> PaddedReduction:
    """Pull out the left power of E and the polynomial content of Lp.

    content is reported in the variable of Lp; affected lists the n >= 0
    where the cancelled factor vanishes in the reduced operator, i.e. where
    the reduced equation is a new constraint. singular lists the n >= 0
    where the reduced leading coefficient vanishes.
    """
    if Lp.is_zero():
        raise ValueError("reduce_padded of the zero operator")
    op = Lp.canonical()
    k = op.lo
    op = op.normalized_support()
    reduced, g = op.remove_content()
    content = g.shift(k) if k else g
    affected = tuple(nonneg_integer_roots(g)) if g.degree > 0 else ()
    lead = reduced.coeff(reduced.hi).num
    singular = tuple(nonneg_integer_roots(lead)) if lead.degree > 0 else ()
    return PaddedReduction(reduced, k, content, affected, singular)
