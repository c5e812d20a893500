"""Skew operator algebras: shift operators over Q(n) (Laurent in E) and
differential operators over Q(x), plus the algebra isomorphism between them.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce

from .errors import PoleAtIndex
from .exact import ONE, Poly, RatFun, as_rat, nullspace_vector, poly_gcd, poly_lcm

_X = Poly.x()


def _rf(c) -> RatFun:
    if isinstance(c, RatFun):
        return c
    if isinstance(c, Poly):
        return RatFun(c, _reduced=True)
    return RatFun.const(as_rat(c))


def _fmt_coeff_term(coeff_str_pos: str, monomial: str, negative: bool, first: bool, compound: bool):
    body = f"({coeff_str_pos})" if compound else coeff_str_pos
    if monomial:
        if coeff_str_pos == "1" and not compound:
            body = monomial
        else:
            body = f"{body}*{monomial}"
    if first:
        return ("-" if negative else "") + body
    return (" - " if negative else " + ") + body


def _poly_is_monomial(p: Poly) -> bool:
    return sum(1 for c in p.coeffs if c) == 1


def _rf_sign_and_abs(c: RatFun):
    """Split off a leading minus sign for printing."""
    if c.num.lc < 0:
        return True, -c
    return False, c


def _rf_print(c: RatFun, var: str):
    """(text, compound) for a coefficient printed in front of an operator symbol."""
    if c.is_poly():
        return c.num.to_str(var), not _poly_is_monomial(c.num)
    if _is_laurent(c):
        return _laurent_str(c, var)
    return f"({c.num.to_str(var)})/({c.den.to_str(var)})", True


def _is_laurent(c: RatFun) -> bool:
    return _poly_is_monomial(c.den) and c.den.lc == 1


def _laurent_dict(c: RatFun) -> dict:
    if not _is_laurent(c):
        raise ValueError(f"{c!r} is not a Laurent polynomial")
    v = c.den.degree
    return {i - v: a for i, a in enumerate(c.num.coeffs) if a}


def _laurent_str(c: RatFun, var: str):
    d = _laurent_dict(c)
    parts = []
    for k in sorted(d, reverse=True):
        a = d[k]
        neg = a < 0
        a = -a if neg else a
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        a_s = str(a.numerator) if a.denominator == 1 else f"{a.numerator}/{a.denominator}"
        if not mono:
            body = a_s
        elif a == 1:
            body = mono
        else:
            body = f"{a_s}*{mono}"
        parts.append((neg, body))
    text = ("-" if parts[0][0] else "") + parts[0][1]
    for neg, body in parts[1:]:
        text += (" - " if neg else " + ") + body
    return text, len(parts) > 1


class ShiftOp:
    """sum_k c_k(n) E^k with c_k in Q(n) and k in Z; E*f(n) = f(n+1)*E."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for k, c in (terms or {}).items():
            c = _rf(c)
            if not c.is_zero():
                clean[int(k)] = c
        self.terms = dict(sorted(clean.items()))

    @classmethod
    def E(cls, k: int = 1) -> "ShiftOp":
        return cls({k: 1})

    @classmethod
    def const(cls, c) -> "ShiftOp":
        return cls({0: c})

    @classmethod
    def first_order(cls, lead, trail) -> "ShiftOp":
        """lead(n)*E - trail(n)"""
        return cls({1: lead, 0: -_rf(trail)})

    @classmethod
    def compose(cls, factors) -> "ShiftOp":
        return reduce(lambda a, b: a * b, factors, cls.const(1))

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def lo(self) -> int:
        return min(self.terms)

    @property
    def hi(self) -> int:
        return max(self.terms)

    @property
    def order(self) -> int:
        if not self.terms:
            return -1
        return self.hi - self.lo

    def coeff(self, k: int) -> RatFun:
        return self.terms.get(k, RatFun.const(0))

    def __eq__(self, other):
        if isinstance(other, ShiftOp):
            return self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def __add__(self, other):
        if not isinstance(other, ShiftOp):
            other = ShiftOp.const(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return ShiftOp(out)

    __radd__ = __add__

    def __neg__(self):
        return ShiftOp({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, ShiftOp):
            other = ShiftOp.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return ShiftOp.const(other) - self

    def __mul__(self, other):
        if not isinstance(other, ShiftOp):
            f = _rf(other)
            return ShiftOp({k: c * f.shift(k) for k, c in self.terms.items()})
        out = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                t = ca * cb.shift(a)
                out[a + b] = out[a + b] + t if a + b in out else t
        return ShiftOp(out)

    def __rmul__(self, other):
        f = _rf(other)
        return ShiftOp({k: f * c for k, c in self.terms.items()})

    def shift_coeffs(self, s) -> "ShiftOp":
        """Substitute n -> n+s in every coefficient (conjugation by E^s)."""
        return ShiftOp({k: c.shift(s) for k, c in self.terms.items()})

    def normalized_support(self) -> "ShiftOp":
        """E^(-lo) * self, so that the lowest E-power is 0."""
        if not self.terms or self.lo == 0:
            return self
        return ShiftOp({k - self.lo: c.shift(-self.lo) for k, c in self.terms.items()})

    def apply(self, y, n: int) -> Fraction:
        total = Fraction(0)
        for k, c in self.terms.items():
            try:
                cv = c(n)
            except ZeroDivisionError:
                raise PoleAtIndex(n) from None
            if cv:
                total += cv * y(n + k)
        return total

    def denominator_lcm(self) -> Poly:
        return poly_lcm(c.den for c in self.terms.values())

    def clear_denominators(self) -> "ShiftOp":
        d = self.denominator_lcm()
        if d == ONE:
            return self
        return RatFun(d) * self

    def canonical(self) -> "ShiftOp":
        """Polynomial coefficients, integer-primitive, positive leading term."""
        if not self.terms:
            return self
        op = self.clear_denominators()
        num = [c.num for c in op.terms.values()]
        den = reduce(math.lcm, (c.denominator for p in num for c in p.coeffs), 1)
        g = reduce(math.gcd, (c.numerator for p in num for c in p.coeffs), 0)
        scale = Fraction(den, g)
        if op.terms[op.hi].num.lc < 0:
            scale = -scale
        return ShiftOp({k: c * scale for k, c in op.terms.items()})

    def remove_content(self) -> tuple["ShiftOp", Poly]:
        """Divide out the common polynomial factor of all coefficients."""
        op = self.canonical()
        g = poly_gcd(c.num for c in op.terms.values())
        if g.degree <= 0:
            return op, ONE
        return ShiftOp({k: RatFun(c.num.exact_div(g)) for k, c in op.terms.items()}).canonical(), g

    def equivalent(self, other: "ShiftOp") -> bool:
        """Equal up to a left factor f(n)*E^k with f in Q(n)*."""
        a = self.normalized_support()
        b = other.normalized_support()
        if set(a.terms) != set(b.terms):
            return False
        if not a.terms:
            return True
        k0 = next(iter(a.terms))
        ratio = a.terms[k0] / b.terms[k0]
        return all(a.terms[k] == ratio * b.terms[k] for k in a.terms)

    def right_divmod(self, d: "ShiftOp"):
        """self = q*d + r with ord r < ord d, both operators with support >= 0."""
        if d.is_zero():
            raise ZeroDivisionError("right division by the zero operator")
        if (self.terms and self.lo < 0) or d.lo < 0:
            raise ValueError("right division needs nonnegative E-support")
        dh = d.hi
        lcd = d.terms[dh]
        quot = {}
        rem = self
        while rem.terms and rem.hi >= dh:
            s = rem.hi - dh
            c = rem.terms[rem.hi] / lcd.shift(s)
            quot[s] = c
            rem = rem - ShiftOp({s: c}) * d
        return ShiftOp(quot), rem

    def to_str(self) -> str:
        if not self.terms:
            return "0"
        out = ""
        for i, k in enumerate(sorted(self.terms, reverse=True)):
            neg, c = _rf_sign_and_abs(self.terms[k])
            text, compound = _rf_print(c, "n")
            mono = "" if k == 0 else ("E" if k == 1 else f"E^{k}")
            if not mono:
                compound = compound and neg
            out += _fmt_coeff_term(text, mono, neg, i == 0, compound)
        return out

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"ShiftOp({self.to_str()})"


class DiffOp:
    """sum_k c_k(x) D^k with c_k in Q(x); D*f = f*D + f'."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for k, c in (terms or {}).items():
            if k < 0:
                raise ValueError("negative power of D")
            c = _rf(c)
            if not c.is_zero():
                clean[int(k)] = c
        self.terms = dict(sorted(clean.items()))

    @classmethod
    def D(cls, k: int = 1) -> "DiffOp":
        return cls({k: 1})

    @classmethod
    def const(cls, c) -> "DiffOp":
        return cls({0: c})

    @classmethod
    def xpow(cls, j: int) -> "DiffOp":
        if j >= 0:
            return cls({0: RatFun(_X ** j)})
        return cls({0: RatFun(ONE, _X ** (-j))})

    @classmethod
    def from_laurent(cls, terms: dict) -> "DiffOp":
        """terms: D-power -> {x-power: rational}"""
        out = {}
        for k, coeffs in terms.items():
            acc = RatFun.const(0)
            for j, a in coeffs.items():
                acc = acc + DiffOp.xpow(j).terms[0] * as_rat(a)
            out[k] = acc
        return cls(out)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def order(self) -> int:
        return max(self.terms) if self.terms else -1

    def coeff(self, k: int) -> RatFun:
        return self.terms.get(k, RatFun.const(0))

    def is_laurent(self) -> bool:
        return all(_is_laurent(c) for c in self.terms.values())

    def laurent_coeffs(self) -> dict:
        return {k: _laurent_dict(c) for k, c in self.terms.items()}

    def __eq__(self, other):
        if isinstance(other, DiffOp):
            return self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def __add__(self, other):
        if not isinstance(other, DiffOp):
            other = DiffOp.const(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return DiffOp(out)

    __radd__ = __add__

    def __neg__(self):
        return DiffOp({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, DiffOp):
            other = DiffOp.const(other)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, DiffOp):
            other = DiffOp.const(other)
        out = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                g = cb
                binom = 1
                for i in range(a + 1):
                    if i:
                        g = g.derivative()
                        binom = binom * (a - i + 1) // i
                    if g.is_zero():
                        break
                    t = ca * g * binom
                    k = a + b - i
                    out[k] = out[k] + t if k in out else t
        return DiffOp(out)

    def __rmul__(self, other):
        f = _rf(other)
        return DiffOp({k: f * c for k, c in self.terms.items()})

    def __pow__(self, k: int):
        result = DiffOp.const(1)
        for _ in range(k):
            result = result * self
        return result

    def apply_series(self, coeffs, precision: int):
        """Apply to a power series known through x^precision.

        Returns (dict power -> coefficient, last power that is exact).
        """
        if not self.is_laurent():
            raise ValueError("series application needs Laurent coefficients")
        out = {}
        valid = None
        for k, c in self.terms.items():
            # k-th derivative known through x^(precision-k)
            der = list(coeffs[: precision + 1])
            for _ in range(k):
                der = [i * der[i] for i in range(1, len(der))]
            for j, a in _laurent_dict(c).items():
                top = precision - k + j
                valid = top if valid is None else min(valid, top)
                for i, v in enumerate(der):
                    if v:
                        out[i + j] = out.get(i + j, Fraction(0)) + a * v
        return out, (precision if valid is None else valid)

    def clear_to_laurent(self) -> "DiffOp":
        """Left-multiply by the non-monomial part of the denominator lcm."""
        d = poly_lcm(c.den for c in self.terms.values())
        v = 0
        while d.degree > 0 and d.coeff(v) == 0:
            v += 1
        d = Poly(d.coeffs[v:]).monic()
        if d.degree <= 0:
            return self
        return RatFun(d) * self

    def remove_content(self) -> "DiffOp":
        """Divide by the common (non-monomial) polynomial factor and the positive rational content."""
        op = self.clear_to_laurent()
        if not op.terms:
            return op
        nums = [c.num for c in op.terms.values()]
        g = poly_gcd(nums)
        v = 0
        while g.degree > 0 and g.coeff(v) == 0:
            v += 1
        g = Poly(g.coeffs[v:]).monic()
        if g.degree > 0:
            op = DiffOp({k: RatFun(c.num.exact_div(g), c.den) for k, c in op.terms.items()})
            nums = [c.num for c in op.terms.values()]
        den = reduce(math.lcm, (c.denominator for p in nums for c in p.coeffs), 1)
        gg = reduce(math.gcd, (c.numerator for p in nums for c in p.coeffs), 0)
        return DiffOp({k: c * Fraction(den, gg) for k, c in op.terms.items()})

    def canonical(self) -> "DiffOp":
        """Polynomial coefficients, primitive, positive leading term."""
        if not self.terms:
            return self
        d = poly_lcm(c.den for c in self.terms.values())
        op = RatFun(d) * self if d != ONE else self
        nums = [c.num for c in op.terms.values()]
        g = poly_gcd(nums)
        if g.degree > 0:
            op = DiffOp({k: RatFun(c.num.exact_div(g)) for k, c in op.terms.items()})
            nums = [c.num for c in op.terms.values()]
        den = reduce(math.lcm, (c.denominator for p in nums for c in p.coeffs), 1)
        gg = reduce(math.gcd, (c.numerator for p in nums for c in p.coeffs), 0)
        scale = Fraction(den, gg)
        if op.terms[op.order].num.lc < 0:
            scale = -scale
        return DiffOp({k: c * scale for k, c in op.terms.items()})

    def equivalent(self, other: "DiffOp") -> bool:
        """Equal up to a left factor in Q(x)*."""
        if set(self.terms) != set(other.terms):
            return False
        if not self.terms:
            return True
        k0 = next(iter(self.terms))
        ratio = self.terms[k0] / other.terms[k0]
        return all(self.terms[k] == ratio * other.terms[k] for k in self.terms)

    def to_str(self) -> str:
        if not self.terms:
            return "0"
        out = ""
        for i, k in enumerate(sorted(self.terms, reverse=True)):
            neg, c = _rf_sign_and_abs(self.terms[k])
            text, compound = _rf_print(c, "x")
            mono = "" if k == 0 else ("D" if k == 1 else f"D^{k}")
            if not mono:
                compound = compound and neg
            out += _fmt_coeff_term(text, mono, neg, i == 0, compound)
        return out

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"DiffOp({self.to_str()})"


# ---------------------------------------------------------------------------
# operations


def shift_mul(L1: ShiftOp, L2: ShiftOp) -> ShiftOp:
    return L1 * L2


def apply_shift(L: ShiftOp, y, n: int) -> Fraction:
    """sum_k c_k(n) * y(n+k); y is a two-way term oracle."""
    return L.apply(y, n)


def right_divide(L: ShiftOp, D: ShiftOp):
    return L.right_divmod(D)


def _shifted_copies(L: ShiftOp, count: int):
    return [ShiftOp.E(i) * L for i in range(count)]


def lclm(L1: ShiftOp, L2: ShiftOp) -> ShiftOp:
    """Least common left multiple of two recurrence operators."""
    if L1.is_zero() or L2.is_zero():
        raise ValueError("lclm of the zero operator")
    A = L1.normalized_support()
    B = L2.normalized_support()
    r1, r2 = A.order, B.order
    for m in range(max(r1, r2), r1 + r2 + 1):
        cands = _shifted_copies(A, m - r1 + 1) + _shifted_copies(B, m - r2 + 1)
        cols = [[op.coeff(k) for k in range(m + 1)] for op in cands]
        vec = nullspace_vector(cols)
        if vec is None:
            continue
        na = m - r1 + 1
        left = ShiftOp()
        for c, op in zip(vec[:na], cands[:na]):
            left = left + _rf(c) * op
        if left.is_zero():
            continue
        return left.canonical()
    raise ArithmeticError("lclm search exhausted its order bound")


def symmetric_product_shift(L1: ShiftOp, L2: ShiftOp) -> ShiftOp:
    """An operator annihilating every termwise product a*b with L1(a)=0, L2(b)=0."""
    A = L1.normalized_support()
    B = L2.normalized_support()
    r1, r2 = A.order, B.order
    if r1 <= 0 or r2 <= 0:
        return ShiftOp.const(1)
    redA = {i: -(A.coeff(i) / A.coeff(r1)) for i in range(r1)}
    redB = {j: -(B.coeff(j) / B.coeff(r2)) for j in range(r2)}

    def step(vec):
        # vec: (i, j) -> coefficient of E^i a * E^j b ; apply E
        out = {}
        for (i, j), c in vec.items():
            c1 = c.shift(1)
            left = {i + 1: RatFun.const(1)} if i + 1 < r1 else redA
            right = {j + 1: RatFun.const(1)} if j + 1 < r2 else redB
            for ii, ca in left.items():
                for jj, cb in right.items():
                    t = c1 * ca * cb
                    key = (ii, jj)
                    out[key] = out[key] + t if key in out else t
        return {k: v for k, v in out.items() if not v.is_zero()}

    basis = [(i, j) for i in range(r1) for j in range(r2)]
    vecs = [{(0, 0): RatFun.const(1)}]
    for _ in range(r1 * r2):
        vecs.append(step(vecs[-1]))
        cols = [[v.get(b, RatFun.const(0)) for b in basis] for v in vecs]
        sol = nullspace_vector(cols)
        if sol is not None:
            return ShiftOp({k: _rf(c) for k, c in enumerate(sol)}).canonical()
    raise ArithmeticError("symmetric product search failed")


def symmetric_product_diff(M1: DiffOp, M2: DiffOp) -> DiffOp:
    """An operator annihilating u*v whenever M1(u) = 0 and M2(v) = 0."""
    r1, r2 = M1.order, M2.order
    if r1 <= 0 or r2 <= 0:
        return DiffOp.const(1)
    redA = {i: -(M1.coeff(i) / M1.coeff(r1)) for i in range(r1)}
    redB = {j: -(M2.coeff(j) / M2.coeff(r2)) for j in range(r2)}

    def add(out, key, t):
        if t.is_zero():
            return
        out[key] = out[key] + t if key in out else t

    def step(vec):
        out = {}
        for (i, j), c in vec.items():
            add(out, (i, j), c.derivative())
            left = {i + 1: RatFun.const(1)} if i + 1 < r1 else redA
            for ii, ca in left.items():
                add(out, (ii, j), c * ca)
            right = {j + 1: RatFun.const(1)} if j + 1 < r2 else redB
            for jj, cb in right.items():
                add(out, (i, jj), c * cb)
        return {k: v for k, v in out.items() if not v.is_zero()}

    basis = [(i, j) for i in range(r1) for j in range(r2)]
    vecs = [{(0, 0): RatFun.const(1)}]
    for _ in range(r1 * r2):
        vecs.append(step(vecs[-1]))
        cols = [[v.get(b, RatFun.const(0)) for b in basis] for v in vecs]
        sol = nullspace_vector(cols)
        if sol is not None:
            return DiffOp({k: _rf(c) for k, c in enumerate(sol)}).canonical()
    raise ArithmeticError("symmetric product search failed")


def _theta_powers(k: int):
    theta = DiffOp({1: RatFun(_X)})
    pows = [DiffOp.const(1)]
    for _ in range(k):
        pows.append(pows[-1] * theta)
    return pows


def iso_R(L: ShiftOp) -> DiffOp:
    """n -> x*D, E -> 1/x, 1/E -> x. Rational coefficients are cleared first."""
    L = L.clear_denominators()
    deg = max((c.num.degree for c in L.terms.values()), default=0)
    thetas = _theta_powers(max(deg, 0))
    out = DiffOp()
    for k, c in L.terms.items():
        p = DiffOp()
        for i, a in enumerate(c.num.coeffs):
            if a:
                p = p + DiffOp({kk: cc * a for kk, cc in thetas[i].terms.items()})
        out = out + p * DiffOp.xpow(-k)
    return out


def iso_Rinv(M: DiffOp) -> ShiftOp:
    """x -> 1/E, 1/x -> E, D -> (n+1)*E. Coefficients must be Laurent polynomials."""
    step = ShiftOp({1: RatFun(Poly((1, 1)))})
    out = ShiftOp()
    powers = [ShiftOp.const(1)]
    for k, coeffs in M.laurent_coeffs().items():
        while len(powers) <= k:
            powers.append(powers[-1] * step)
        for j, a in coeffs.items():
            out = out + ShiftOp({-j: a}) * powers[k]
    return out


def gauge_transform(M: DiffOp, r) -> DiffOp:
    """Substitute D -> D + r(x); the kernel becomes {v : M(u*v) = 0} for u' = r*u."""
    r = _rf(r)
    step = DiffOp({1: 1, 0: r})
    out = DiffOp()
    power = DiffOp.const(1)
    for k in range(M.order + 1):
        if k:
            power = power * step
        c = M.coeff(k)
        if not c.is_zero():
            out = out + c * power
    return out.remove_content()
