"""Sequence expressions: an immutable AST, exact evaluation with memoized
prefixes, finitely supported corrections and truncated generating series.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

from .errors import InvalidAtom, UndefinedTerm
from .exact import ONE, Poly, RatFun, as_rat, max_nonneg_root
from .ore import ShiftOp


def _tup(values):
    return tuple(as_rat(v) for v in values)


def _poly(p) -> Poly:
    if isinstance(p, Poly):
        return p
    if isinstance(p, RatFun):
        if not p.is_poly():
            raise TypeError("expected a polynomial")
        return p.num
    return Poly.const(p)


def _ratfun(r) -> RatFun:
    if isinstance(r, RatFun):
        return r
    if isinstance(r, Poly):
        return RatFun(r, _reduced=True)
    return RatFun.const(as_rat(r))


class SeqExpr:
    """Marker base class for sequence expression nodes."""

    __slots__ = ()

    def __add__(self, other):
        return LinComb((1, 1), (self, other))

    def __sub__(self, other):
        return LinComb((1, -1), (self, other))

    def __rmul__(self, c):
        return LinComb((c,), (self,))


@dataclass(frozen=True)
class Hypergeom(SeqExpr):
    """q(n)*a(n+1) = p(n)*a(n); `initial` gives a(0), a(1), ... and wins where present."""

    p: Poly
    q: Poly
    initial: tuple = (Fraction(1),)

    def __post_init__(self):
        object.__setattr__(self, "p", _poly(self.p))
        object.__setattr__(self, "q", _poly(self.q))
        object.__setattr__(self, "initial", _tup(self.initial))
        if self.q.is_zero():
            raise InvalidAtom("hypergeometric atom with q = 0")

    def required_initial(self) -> int:
        return max(1, max_nonneg_root(self.q) + 2)


@dataclass(frozen=True)
class RationalSeq(SeqExpr):
    """a(n) = r(n), except a(n) = prefix[n] for n < len(prefix)."""

    r: RatFun
    prefix: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "r", _ratfun(self.r))
        object.__setattr__(self, "prefix", _tup(self.prefix))


@dataclass(frozen=True)
class PolyPower:
    j: int = 0


@dataclass(frozen=True)
class PolePower:
    beta: Fraction
    j: int = 1

    def __post_init__(self):
        object.__setattr__(self, "beta", as_rat(self.beta))
        if self.j < 1:
            raise InvalidAtom("pole power needs j >= 1")
        if self.beta.denominator == 1 and self.beta >= 0:
            raise InvalidAtom(f"pole at natural number {self.beta}")


@dataclass(frozen=True)
class QuasiAtom(SeqExpr):
    """alpha^n * n^j  or  alpha^n / (n - beta)^j."""

    alpha: Fraction
    form: PolyPower | PolePower = PolyPower(0)

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_rat(self.alpha))
        if self.alpha == 0:
            raise InvalidAtom("quasi-rational atom with alpha = 0")

    def value(self, n: int) -> Fraction:
        base = self.alpha ** n
        if isinstance(self.form, PolyPower):
            return base * Fraction(n) ** self.form.j
        return base / (n - self.form.beta) ** self.form.j


@dataclass(frozen=True)
class Delta(SeqExpr):
    pass


@dataclass(frozen=True)
class FinSupport(SeqExpr):
    values: tuple = ()

    def __post_init__(self):
        vals = list(_tup(self.values))
        while vals and vals[-1] == 0:
            vals.pop()
        object.__setattr__(self, "values", tuple(vals))


@dataclass(frozen=True)
class NestedSum(SeqExpr):
    """f1(n) * sum_{k2<=n+eta1} f2(k2) * sum_{k3<=k2+eta2} f3(k3) ..."""

    factors: tuple
    offsets: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        offs = tuple(int(o) for o in self.offsets) or (0,) * (len(self.factors) - 1)
        if len(offs) != len(self.factors) - 1 or any(o < 0 for o in offs):
            raise ValueError("need one nonnegative offset per inner sum")
        if not self.factors:
            raise ValueError("nested sum with no factors")
        object.__setattr__(self, "offsets", offs)

    @property
    def depth(self) -> int:
        return len(self.factors)


@dataclass(frozen=True)
class LinComb(SeqExpr):
    coeffs: tuple
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _tup(self.coeffs))
        object.__setattr__(self, "terms", tuple(self.terms))
        if len(self.coeffs) != len(self.terms):
            raise ValueError("coefficient/term count mismatch")


@dataclass(frozen=True)
class Shift(SeqExpr):
    inner: SeqExpr
    k: int = 1

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("shift amount must be nonnegative")


@dataclass(frozen=True)
class InvShift(SeqExpr):
    """(lam, a0, a1, ...)"""

    inner: SeqExpr
    lam: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "lam", as_rat(self.lam))


@dataclass(frozen=True)
class PartialSum(SeqExpr):
    inner: SeqExpr


@dataclass(frozen=True)
class Product(SeqExpr):
    left: SeqExpr
    right: SeqExpr


@dataclass(frozen=True)
class Conv(SeqExpr):
    left: SeqExpr
    right: SeqExpr


@dataclass(frozen=True)
class Interlace(SeqExpr):
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise ValueError("interlacing needs at least one part")


@dataclass(frozen=True)
class ZeroInterlace(SeqExpr):
    """a(0), 0, ..., 0, a(1), 0, ... with m-1 zeros between terms."""

    inner: SeqExpr
    m: int = 2


@dataclass(frozen=True)
class Multisect(SeqExpr):
    inner: SeqExpr
    m: int
    r: int = 0

    def __post_init__(self):
        if self.m < 1 or not 0 <= self.r < self.m:
            raise ValueError("multisection needs m >= 1 and 0 <= r < m")


# convenience constructors


def const(c) -> RationalSeq:
    return RationalSeq(RatFun.const(as_rat(c)))


def geometric(alpha) -> QuasiAtom:
    return QuasiAtom(alpha, PolyPower(0))


def factorial() -> Hypergeom:
    return Hypergeom(Poly((1, 1)), ONE, (1,))


def inv_factorial() -> Hypergeom:
    return Hypergeom(ONE, Poly((1, 1)), (1,))


def pad(e: SeqExpr, k: int) -> SeqExpr:
    """E_0^{-k} E^k e: the terms from index k on, with zeros before."""
    if k == 0:
        return e
    out = Shift(e, k)
    for _ in range(k):
        out = InvShift(out, 0)
    return out


def zero_pad(e: SeqExpr, k: int) -> SeqExpr:
    """E_0^{-k} e"""
    for _ in range(k):
        e = InvShift(e, 0)
    return e


# ---------------------------------------------------------------------------
# evaluation


def _memo_limit():
    raw = os.environ.get("SEQCONV_MEMO_LIMIT")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            return None
    return None


class Evaluator:
    """Exact term evaluation with per-node prefix caches.

    Not safe for concurrent use; create one evaluator per task.
    """

    def __init__(self, memo_limit=None):
        self.memo_limit = memo_limit if memo_limit is not None else _memo_limit()
        self._memo = {}
        self._desugared = {}
        self._entries = 0

    def clear(self):
        self._memo.clear()
        self._entries = 0

    def value(self, e: SeqExpr, n: int) -> Fraction:
        if n < 0:
            raise UndefinedTerm(n, f"negative index {n}")
        return self.prefix(e, n + 1)[n]

    def terms(self, e: SeqExpr, count: int) -> list:
        """[e(0), ..., e(count-1)]"""
        if count <= 0:
            return []
        return list(self.prefix(e, count)[:count])

    def prefix(self, e: SeqExpr, count: int) -> list:
        entry = self._memo.get(id(e))
        if entry is not None and entry[0] is e:
            vals = entry[1]
        else:
            vals = []
        if len(vals) >= count:
            return vals
        new = self._compute(e, len(vals), count, vals)
        if self.memo_limit is not None and self._entries + len(new) > self.memo_limit:
            self.clear()
        self._entries += len(new) - len(vals)
        self._memo[id(e)] = (e, new)
        return new

    def _nest(self, e: NestedSum) -> SeqExpr:
        hit = self._desugared.get(id(e))
        if hit is not None and hit[0] is e:
            return hit[1]
        if e.depth == 1:
            out = e.factors[0]
        else:
            rest = NestedSum(e.factors[1:], e.offsets[1:])
            inner = PartialSum(rest)
            if e.offsets[0]:
                inner = Shift(inner, e.offsets[0])
            out = Product(e.factors[0], inner)
        self._desugared[id(e)] = (e, out)
        return out

    def _compute(self, e, start, count, vals):
        vals = list(vals)
        if isinstance(e, Hypergeom):
            need = e.required_initial()
            if len(e.initial) < need:
                raise InvalidAtom(
                    f"hypergeometric atom needs {need} initial values (q vanishes at n = {need - 2})"
                )
            for n in range(start, count):
                if n < len(e.initial):
                    vals.append(e.initial[n])
                else:
                    prev = vals[n - 1]
                    vals.append(e.p(n - 1) * prev / e.q(n - 1) if prev else Fraction(0))
            return vals
        if isinstance(e, RationalSeq):
            for n in range(start, count):
                if n < len(e.prefix):
                    vals.append(e.prefix[n])
                else:
                    try:
                        vals.append(e.r(n))
                    except ZeroDivisionError:
                        raise UndefinedTerm(n, f"rational sequence has a pole at n = {n} and no prefix value") from None
            return vals
        if isinstance(e, QuasiAtom):
            vals.extend(e.value(n) for n in range(start, count))
            return vals
        if isinstance(e, Delta):
            vals.extend(Fraction(1 if n == 0 else 0) for n in range(start, count))
            return vals
        if isinstance(e, FinSupport):
            vals.extend(e.values[n] if n < len(e.values) else Fraction(0) for n in range(start, count))
            return vals
        if isinstance(e, NestedSum):
            vals.extend(self.prefix(self._nest(e), count)[start:count])
            return vals
        if isinstance(e, LinComb):
            parts = [(c, self.prefix(t, count)) for c, t in zip(e.coeffs, e.terms) if c]
            for n in range(start, count):
                vals.append(sum((c * p[n] for c, p in parts), Fraction(0)))
            return vals
        if isinstance(e, Shift):
            inner = self.prefix(e.inner, count + e.k)
            vals.extend(inner[start + e.k : count + e.k])
            return vals
        if isinstance(e, InvShift):
            inner = self.prefix(e.inner, max(count - 1, 0))
            for n in range(start, count):
                vals.append(e.lam if n == 0 else inner[n - 1])
            return vals
        if isinstance(e, PartialSum):
            inner = self.prefix(e.inner, count)
            acc = vals[-1] if vals else Fraction(0)
            for n in range(start, count):
                acc += inner[n]
                vals.append(acc)
            return vals
        if isinstance(e, Product):
            left = self.prefix(e.left, count)
            right = self.prefix(e.right, count)
            vals.extend(left[n] * right[n] for n in range(start, count))
            return vals
        if isinstance(e, Conv):
            left = self.prefix(e.left, count)
            right = self.prefix(e.right, count)
            for n in range(start, count):
                vals.append(sum((left[k] * right[n - k] for k in range(n + 1)), Fraction(0)))
            return vals
        if isinstance(e, Interlace):
            m = len(e.parts)
            parts = [self.prefix(p, (count - 1 - j) // m + 1) if count > j else [] for j, p in enumerate(e.parts)]
            vals.extend(parts[n % m][n // m] for n in range(start, count))
            return vals
        if isinstance(e, ZeroInterlace):
            inner = self.prefix(e.inner, (count - 1) // e.m + 1)
            vals.extend(inner[n // e.m] if n % e.m == 0 else Fraction(0) for n in range(start, count))
            return vals
        if isinstance(e, Multisect):
            inner = self.prefix(e.inner, e.m * (count - 1) + e.r + 1)
            vals.extend(inner[e.m * n + e.r] for n in range(start, count))
            return vals
        raise TypeError(f"not a sequence expression: {e!r}")


def evaluate(e: SeqExpr, n: int) -> Fraction:
    return Evaluator().value(e, n)


def terms(e: SeqExpr, count: int) -> list:
    """The first `count` terms of e."""
    return Evaluator().terms(e, count)


def brute_conv(a, b) -> list:
    """Termwise Cauchy product of two equal-length term lists."""
    return [sum((a[k] * b[n - k] for k in range(n + 1)), Fraction(0)) for n in range(min(len(a), len(b)))]


# ---------------------------------------------------------------------------
# truncated generating series


@dataclass(frozen=True)
class TruncatedSeries:
    """sum_{k<=order} coeffs[k] x^k, exact through x^order."""

    coeffs: tuple
    order: int = field(default=-1)

    def __post_init__(self):
        cs = _tup(self.coeffs)
        order = self.order if self.order >= 0 else len(cs) - 1
        cs = (cs + (Fraction(0),) * (order + 1 - len(cs)))[: order + 1]
        object.__setattr__(self, "coeffs", cs)
        object.__setattr__(self, "order", order)

    @classmethod
    def one(cls, order: int):
        return cls((1,), order)

    def __add__(self, other):
        N = min(self.order, other.order)
        return TruncatedSeries([a + b for a, b in zip(self.coeffs[: N + 1], other.coeffs[: N + 1])], N)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        c = as_rat(c)
        return TruncatedSeries([c * a for a in self.coeffs], self.order)

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        N = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        return TruncatedSeries([sum((a[i] * b[k - i] for i in range(k + 1)), Fraction(0)) for k in range(N + 1)], N)

    def shift_up(self, k: int, lead=()):
        """x^k * g plus the given low-order coefficients."""
        lead = list(_tup(lead)) + [Fraction(0)] * (k - len(lead))
        return TruncatedSeries(lead[:k] + list(self.coeffs), self.order + k)

    def substitute_power(self, m: int):
        """g(x^m)"""
        out = [Fraction(0)] * (m * self.order + 1)
        for i, c in enumerate(self.coeffs):
            out[m * i] = c
        return TruncatedSeries(out, m * self.order + m - 1)

    def derivative(self):
        return TruncatedSeries([i * c for i, c in enumerate(self.coeffs)][1:], self.order - 1)

    def truncate(self, N: int):
        return TruncatedSeries(self.coeffs[: N + 1], min(N, self.order))

    def cumulative(self):
        """g / (1 - x)"""
        out, acc = [], Fraction(0)
        for c in self.coeffs:
            acc += c
            out.append(acc)
        return TruncatedSeries(out, self.order)

    @classmethod
    def from_ratfun(cls, r: RatFun, N: int):
        """Taylor expansion at x = 0 of a rational function regular there."""
        if r.den(0) == 0:
            raise ZeroDivisionError("rational function has a pole at x = 0")
        den = r.den.coeffs
        out = []
        for k in range(N + 1):
            acc = r.num.coeff(k)
            for i in range(1, min(k, len(den) - 1) + 1):
                acc -= den[i] * out[k - i]
            out.append(acc / den[0])
        return cls(out, N)

    @classmethod
    def from_rate(cls, r, N: int):
        """The series g with g' = r*g, g(0) = 1."""
        rs = cls.from_ratfun(_ratfun(r), N).coeffs
        g = [Fraction(1)]
        for k in range(N):
            acc = sum((rs[i] * g[k - i] for i in range(k + 1)), Fraction(0))
            g.append(acc / (k + 1))
        return cls(g, N)


def gseries(e: SeqExpr, N: int, structural: bool = False, evaluator=None) -> TruncatedSeries:
    """The generating series of e through x^N.

    With structural=True, convolutions, padding shifts, interlacings and
    partial sums are computed on series instead of termwise.
    """
    ev = evaluator or Evaluator()
    if not structural:
        return TruncatedSeries(ev.terms(e, N + 1), N)
    return _structural(e, N, ev)


def _structural(e, N, ev):
    if isinstance(e, Delta):
        return TruncatedSeries.one(N)
    if isinstance(e, Conv):
        return _structural(e.left, N, ev) * _structural(e.right, N, ev)
    if isinstance(e, LinComb):
        acc = TruncatedSeries((), N)
        for c, t in zip(e.coeffs, e.terms):
            acc = acc + _structural(t, N, ev).scale(c)
        return acc
    if isinstance(e, InvShift):
        if N == 0:
            return TruncatedSeries((e.lam,), 0)
        return _structural(e.inner, N - 1, ev).shift_up(1, (e.lam,))
    if isinstance(e, ZeroInterlace):
        return _structural(e.inner, N // e.m, ev).substitute_power(e.m).truncate(N)
    if isinstance(e, Interlace):
        m = len(e.parts)
        acc = TruncatedSeries((), N)
        for j, part in enumerate(e.parts):
            if j > N:
                break
            g = _structural(part, (N - j) // m, ev).substitute_power(m).truncate(N - j)
            acc = acc + g.shift_up(j)
        return acc
    if isinstance(e, PartialSum):
        return _structural(e.inner, N, ev).cumulative()
    return TruncatedSeries(ev.terms(e, N + 1), N)


# ---------------------------------------------------------------------------
# multisection of atoms


def _binom(n, k):
    return math.comb(n, k)


def msect_atom(a: SeqExpr, m: int, r: int) -> SeqExpr:
    """The section n -> a(m*n + r) of an atom, again in atom form.

    Quasi-rational atoms n^j alpha^n split into a linear combination of atoms.
    """
    if m < 1 or not 0 <= r < m:
        raise ValueError("multisection needs m >= 1 and 0 <= r < m")
    if m == 1:
        return a
    if isinstance(a, Hypergeom):
        p = reduce(lambda acc, i: acc * a.p.affine(m, r + i), range(m), ONE)
        q = reduce(lambda acc, i: acc * a.q.affine(m, r + i), range(m), ONE)
        need = max(1, max_nonneg_root(q) + 2)
        ev = Evaluator()
        vals = ev.terms(a, m * (need - 1) + r + 1)
        return Hypergeom(p, q, tuple(vals[m * k + r] for k in range(need)))
    if isinstance(a, RationalSeq):
        rr = a.r.affine(m, r)
        poles = [int(b) for b, _ in rr.poles() if b.denominator == 1 and b >= 0]
        need = max([-(-(len(a.prefix) - r) // m), max(poles, default=-1) + 1, 0])
        vals = Evaluator().terms(a, m * need + r) if need else []
        return RationalSeq(rr, tuple(vals[m * k + r] for k in range(need)))
    if isinstance(a, QuasiAtom):
        am = a.alpha ** m
        lead = a.alpha ** r
        if isinstance(a.form, PolePower):
            beta = (a.form.beta - r) / m
            c = lead / Fraction(m) ** a.form.j
            return LinComb((c,), (QuasiAtom(am, PolePower(beta, a.form.j)),))
        j = a.form.j
        coeffs, atoms = [], []
        for i in range(j + 1):
            c = lead * _binom(j, i) * Fraction(m) ** i * Fraction(r) ** (j - i)
            if c:
                coeffs.append(c)
                atoms.append(QuasiAtom(am, PolyPower(i)))
        return LinComb(tuple(coeffs), tuple(atoms))
    if isinstance(a, Product):
        return Product(msect_atom(a.left, m, r), msect_atom(a.right, m, r))
    if isinstance(a, (Delta, FinSupport)):
        vals = Evaluator().terms(a, m * _support_len(a) + r + 1)
        return FinSupport(vals[r::m])
    raise TypeError(f"not an atom: {a!r}")


def _support_len(e):
    return len(e.values) if isinstance(e, FinSupport) else 1


# ---------------------------------------------------------------------------
# regularity thresholds and normalization


def is_atom(e) -> bool:
    if isinstance(e, Product):
        return is_atom(e.left) and is_atom(e.right)
    return isinstance(e, (Hypergeom, RationalSeq, QuasiAtom))


def atom_threshold(a) -> int:
    """Least N such that from index N on the atom follows its closed form,
    has no zeros of its defining polynomials and no poles."""
    if isinstance(a, Hypergeom):
        cands = [len(a.initial) - 1, max_nonneg_root(a.q) + 1, max_nonneg_root(a.p) + 1]
        return max(0, *cands)
    if isinstance(a, RationalSeq):
        return max(0, len(a.prefix), max_nonneg_root(a.r.den) + 1, max_nonneg_root(a.r.num) + 1)
    if isinstance(a, QuasiAtom):
        return 1 if isinstance(a.form, PolyPower) and a.form.j > 0 else 0
    if isinstance(a, Product):
        return max(atom_threshold(a.left), atom_threshold(a.right))
    raise TypeError(f"not an atom: {a!r}")


def as_nest_terms(e: SeqExpr):
    """Split e into ([(coef, NestedSum)], [(coef, finitely supported expr)])."""
    nests, fins = [], []

    def walk(node, c):
        if c == 0:
            return
        if isinstance(node, LinComb):
            for cc, t in zip(node.coeffs, node.terms):
                walk(t, c * cc)
        elif isinstance(node, NestedSum):
            nests.append((c, node))
        elif isinstance(node, (Delta, FinSupport)):
            fins.append((c, node))
        elif is_atom(node):
            nests.append((c, NestedSum((node,))))
        else:
            raise TypeError(f"expected a linear combination of nested sums, got {type(node).__name__}")

    walk(e, Fraction(1))
    return nests, fins


@dataclass(frozen=True)
class RegularForm:
    """e = sum of coef * NestedSum(padded factors) + FinSupport(correction).

    `parts` holds (coef, factors, offsets) with the original, unpadded atoms;
    the padded atom for a factor f is pad(f, threshold).
    """

    expr: SeqExpr
    threshold: int
    parts: tuple
    constants: tuple
    correction: FinSupport


def nest_constants(factors, offsets, N: int, ev=None) -> list:
    """Constants c_1..c_d with NS(f) = sum_i c_i NS(pad f_1..pad f_i) for n >= N."""
    ev = ev or Evaluator()
    if len(factors) == 1:
        return [Fraction(1)]
    rest = NestedSum(factors[1:], offsets[1:])
    S = sum(ev.terms(rest, N), Fraction(0)) if N else Fraction(0)
    return [S] + nest_constants(factors[1:], offsets[1:], N, ev)


def normalize_to_regular(e: SeqExpr, N=None) -> RegularForm:
    nests, fins = as_nest_terms(e)
    if N is None:
        N = max((atom_threshold(f) for _, ns in nests for f in ns.factors), default=0)
    ev = Evaluator()
    parts, constants = [], []
    for c, ns in nests:
        cs = nest_constants(ns.factors, ns.offsets, N, ev)
        constants.append(tuple(cs))
        for i, ci in enumerate(cs, start=1):
            if ci:
                parts.append((c * ci, tuple(ns.factors[:i]), tuple(ns.offsets[: i - 1])))
    correction = FinSupport(ev.terms(e, N)) if N else FinSupport(())
    coeffs, nodes = [], []
    for c, fs, offs in parts:
        coeffs.append(c)
        nodes.append(NestedSum(tuple(pad(f, N) for f in fs), offs))
    if correction.values:
        coeffs.append(Fraction(1))
        nodes.append(correction)
    expr = LinComb(tuple(coeffs), tuple(nodes))
    return RegularForm(expr, N, tuple(parts), tuple(constants), correction)


# ---------------------------------------------------------------------------
# zero padding to negative indices


def zeta_adjust(L: ShiftOp, e: SeqExpr) -> ShiftOp:
    """Left-multiply L by linear factors so that it also annihilates the
    sequence extended by zeros to negative indices."""
    op = L.normalized_support().clear_denominators()
    hi = op.hi
    vals = Evaluator().terms(e, hi + 1)

    def z(k):
        return vals[k] if k >= 0 else Fraction(0)

    fails = []
    for n in range(-hi, 0):
        total = Fraction(0)
        for k, c in op.terms.items():
            if n + k >= 0:
                cv = c(n)
                total += cv * z(n + k)
        if total != 0:
            fails.append(n)
    if not fails:
        return op
    return RatFun(Poly.from_roots(fails)) * op


# ---------------------------------------------------------------------------
# cosmetic simplification (termwise equal)


def const_value(e: SeqExpr):
    """The constant c if e is c for every n, else None (structural check only)."""
    if isinstance(e, Hypergeom):
        if e.p == e.q and len(set(e.initial)) == 1:
            return e.initial[0]
        return None
    if isinstance(e, RationalSeq):
        if e.r.is_const() and all(v == e.r.const_value() for v in e.prefix):
            return e.r.const_value()
        return None
    if isinstance(e, QuasiAtom):
        if e.alpha == 1 and isinstance(e.form, PolyPower) and e.form.j == 0:
            return Fraction(1)
        return None
    if isinstance(e, FinSupport) and not e.values:
        return Fraction(0)
    if isinstance(e, LinComb) and not e.terms:
        return Fraction(0)
    return None


def _scale(c, e: SeqExpr) -> SeqExpr:
    if c == 0:
        return LinComb((), ())
    if c == 1:
        return e
    if isinstance(e, LinComb):
        return LinComb(tuple(c * d for d in e.coeffs), e.terms)
    return LinComb((c,), (e,))


def _as_factor(e: SeqExpr) -> SeqExpr:
    if isinstance(e, LinComb) and len(e.terms) == 1:
        return Product(const(e.coeffs[0]), e.terms[0])
    return e


def simplify(e: SeqExpr) -> SeqExpr:
    """Drop unit factors, flatten sums and fold constants; values are unchanged."""
    if isinstance(e, Product):
        left, right = simplify(e.left), simplify(e.right)
        cl, cr = const_value(left), const_value(right)
        if cl is not None:
            return _scale(cl, right) if cr is None else const(cl * cr)
        if cr is not None:
            return _scale(cr, left)
        return Product(_as_factor(left), _as_factor(right))
    if isinstance(e, LinComb):
        coeffs, terms = [], []
        for c, t in zip(e.coeffs, e.terms):
            t = simplify(t)
            if isinstance(t, LinComb):
                pairs = [(c * d, u) for d, u in zip(t.coeffs, t.terms)]
            else:
                pairs = [(c, t)]
            for d, u in pairs:
                if d != 0 and const_value(u) != 0:
                    coeffs.append(d)
                    terms.append(u)
        if len(terms) == 1 and coeffs[0] == 1:
            return terms[0]
        return LinComb(tuple(coeffs), tuple(terms))
    if isinstance(e, NestedSum):
        factors = tuple(_as_factor(simplify(f)) for f in e.factors)
        if len(factors) == 1:
            return factors[0]
        return NestedSum(factors, e.offsets)
    if isinstance(e, Shift):
        return Shift(simplify(e.inner), e.k)
    if isinstance(e, InvShift):
        return InvShift(simplify(e.inner), e.lam)
    if isinstance(e, PartialSum):
        return PartialSum(simplify(e.inner))
    if isinstance(e, Conv):
        return Conv(simplify(e.left), simplify(e.right))
    if isinstance(e, Interlace):
        return Interlace(tuple(simplify(p) for p in e.parts))
    if isinstance(e, ZeroInterlace):
        return ZeroInterlace(simplify(e.inner), e.m)
    if isinstance(e, Multisect):
        return Multisect(simplify(e.inner), e.m, e.r)
    return e
