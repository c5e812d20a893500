"""Exact arithmetic over Q: dense univariate polynomials, rational functions,
rational roots, partial fractions and a small amount of linear algebra.

Rationals are :class:`fractions.Fraction`; every container here is immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

from .errors import IrreducibleDenominator, ZeroPolynomial

Rat = Fraction


def as_rat(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot convert {value!r} to an exact rational")


def falling_power(x, n: int) -> Fraction:
    """x(x-1)...(x-n+1); the empty product is 1."""
    if n < 0:
        raise ValueError("falling power needs n >= 0")
    x = as_rat(x)
    result = Fraction(1)
    for j in range(n):
        result *= x - j
    return result


def _fmt_rat(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class Poly:
    """Dense polynomial with Fraction coefficients, lowest degree first."""

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs=()):
        cs = [as_rat(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)
        self._hash = None

    # constructors
    @classmethod
    def const(cls, c) -> "Poly":
        return cls((c,))

    @classmethod
    def x(cls) -> "Poly":
        return cls((0, 1))

    @classmethod
    def linear(cls, a, b) -> "Poly":
        """a*x + b"""
        return cls((b, a))

    @classmethod
    def from_roots(cls, roots) -> "Poly":
        p = cls.const(1)
        for r in roots:
            p = p * cls((-as_rat(r), 1))
        return p

    @classmethod
    def falling(cls, n: int, shift=0) -> "Poly":
        """(x+shift)(x+shift-1)...(x+shift-n+1) as a polynomial in x."""
        return cls.from_roots([j - as_rat(shift) for j in range(n)])

    # basic queries
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_const(self) -> bool:
        return len(self.coeffs) <= 1

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def coeff(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Poly.const(other).coeffs
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("Poly", self.coeffs))
        return self._hash

    # arithmetic
    @staticmethod
    def _coerce(other):
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n = max(len(self.coeffs), len(o.coeffs))
        return Poly(self.coeff(i) + o.coeff(i) for i in range(n))

    __radd__ = __add__

    def __neg__(self):
        return Poly(-c for c in self.coeffs)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if not self.coeffs or not o.coeffs:
            return Poly()
        if len(o.coeffs) == 1:
            c = o.coeffs[0]
            return Poly(a * c for a in self.coeffs)
        out = [Fraction(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __divmod__(self, d: "Poly"):
        d = self._coerce(d)
        if d is None or d.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dd = d.degree
        if len(rem) - 1 < dd:
            return Poly(), self
        quot = [Fraction(0)] * (len(rem) - dd)
        inv = 1 / d.lc
        for k in range(len(rem) - 1, dd - 1, -1):
            c = rem[k] * inv
            if c:
                quot[k - dd] = c
                for j, b in enumerate(d.coeffs):
                    rem[k - dd + j] -= c * b
        return Poly(quot), Poly(rem[:dd])

    def __floordiv__(self, d):
        return divmod(self, d)[0]

    def __mod__(self, d):
        return divmod(self, d)[1]

    def exact_div(self, d: "Poly") -> "Poly":
        q, r = divmod(self, d)
        if r:
            raise ValueError("polynomial division is not exact")
        return q

    # evaluation and substitution
    def __call__(self, value):
        if isinstance(value, Poly):
            return self.compose(value)
        v = as_rat(value)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * v + c
        return acc

    def compose(self, inner: "Poly") -> "Poly":
        acc = Poly()
        for c in reversed(self.coeffs):
            acc = acc * inner + c
        return acc

    def shift(self, c) -> "Poly":
        """p(x + c)"""
        c = as_rat(c)
        if c == 0 or self.is_const():
            return self
        return self.compose(Poly((c, 1)))

    def affine(self, m, r) -> "Poly":
        """p(m*x + r)"""
        return self.compose(Poly((as_rat(r), as_rat(m))))

    def derivative(self) -> "Poly":
        return Poly(i * c for i, c in enumerate(self.coeffs) if i)

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return self * (1 / self.lc)

    def content(self) -> Fraction:
        """Positive rational c with self/c primitive with integer coefficients."""
        if self.is_zero():
            return Fraction(0)
        den = reduce(math.lcm, (c.denominator for c in self.coeffs), 1)
        num = reduce(math.gcd, (c.numerator for c in self.coeffs), 0)
        return Fraction(num, den)

    def primitive(self) -> "Poly":
        if self.is_zero():
            return self
        p = self * (1 / self.content())
        return -p if p.lc < 0 else p

    def integer_coeffs(self) -> list[int]:
        p = self.primitive()
        return [int(c) for c in p.coeffs]

    def gcd(self, other: "Poly") -> "Poly":
        if other.is_zero():
            return self.monic() if not self.is_zero() else Poly()
        if self.is_zero():
            return other.monic()
        if self.degree == 0 or other.degree == 0:
            return ONE
        g = _int_poly_gcd(self.integer_coeffs(), other.integer_coeffs())
        return Poly(g).monic()

    def squarefree(self) -> "Poly":
        if self.degree < 1:
            return self.monic()
        return self.exact_div(self.gcd(self.derivative())).monic()

    def to_str(self, var: str = "n") -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            a = -c if c < 0 else c
            mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
            if not mono:
                body = _fmt_rat(a)
            elif a == 1:
                body = mono
            else:
                body = f"{_fmt_rat(a)}*{mono}"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __str__(self):
        return self.to_str("n")

    def __repr__(self):
        return f"Poly({self.to_str('x')})"


ONE = Poly.const(1)
ZERO = Poly()


def _int_primitive(cs: list[int]) -> list[int]:
    g = reduce(math.gcd, cs, 0)
    if cs[-1] < 0:
        g = -g
    return [c // g for c in cs]


def _int_poly_gcd(a: list[int], b: list[int]) -> list[int]:
    """gcd of integer polynomials by the primitive pseudo-remainder sequence."""
    if len(a) < len(b):
        a, b = b, a
    while b:
        rem = list(a)
        lb, db = b[-1], len(b) - 1
        while len(rem) - 1 >= db and rem:
            c = rem[-1]
            k = len(rem) - 1 - db
            rem = [x * lb for x in rem]
            for j, bj in enumerate(b):
                rem[k + j] -= c * bj
            rem.pop()
            while rem and rem[-1] == 0:
                rem.pop()
        a, b = b, (_int_primitive(rem) if rem else [])
    return _int_primitive(a)


def _eval_mod(cs, x, m):
    acc = 0
    for c in reversed(cs):
        acc = (acc * x + c) % m
    return acc


def _integer_roots_monic(cs: list[int]) -> list[int]:
    """Integer roots of a monic squarefree integer polynomial (ascending coefficients).

    Roots are found modulo a small prime at which all of them are simple,
    lifted p-adically past the Cauchy bound and then checked exactly.
    """
    deg = len(cs) - 1
    bound = 1 + max(abs(c) for c in cs[:-1])
    dcs = [i * c for i, c in enumerate(cs)][1:]
    p = 101
    while True:
        if all(p % q for q in range(2, int(p ** 0.5) + 1)):
            roots = [r for r in range(p) if _eval_mod(cs, r, p) == 0]
            if all(_eval_mod(dcs, r, p) for r in roots):
                break
        p += 2
    modulus, k = p, 1
    while modulus <= 2 * bound:
        modulus, k = modulus * modulus, k * 2
    out = []
    for r in roots:
        m = p
        while m < modulus:
            m = min(m * m, modulus)
            r = (r - _eval_mod(cs, r, m) * pow(_eval_mod(dcs, r, m), -1, m)) % m
        cand = r - modulus if r > modulus // 2 else r
        if abs(cand) <= bound and sum(c * cand ** i for i, c in enumerate(cs)) == 0:
            out.append(cand)
    assert len(out) <= deg
    return out


def rational_roots(p: Poly) -> list[tuple[Fraction, int]]:
    """Rational roots of p with multiplicities, sorted ascending."""
    if p.is_zero():
        raise ZeroPolynomial("rational_roots of the zero polynomial")
    out = []
    work = p.monic()
    mult0 = 0
    while work.degree >= 1 and work.coeff(0) == 0:
        work = Poly(work.coeffs[1:])
        mult0 += 1
    if mult0:
        out.append((Fraction(0), mult0))
    if work.degree >= 1:
        sf = work.squarefree()
        ints = sf.integer_coeffs()
        an, d = ints[-1], len(ints) - 1
        # substitute x = y/an to get a monic integer polynomial in y
        monic = [c * an ** (d - 1 - i) for i, c in enumerate(ints[:-1])] + [1]
        cands = {Fraction(y, an) for y in _integer_roots_monic(monic)}
        for r in sorted(cands):
            if sf(r) != 0:
                continue
            m = 0
            lin = Poly((-r, 1))
            while True:
                q, rem = divmod(work, lin)
                if rem:
                    break
                work = q
                m += 1
            out.append((r, m))
    out.sort()
    return out


def nonneg_integer_roots(p: Poly) -> list[int]:
    if p.is_zero():
        raise ZeroPolynomial("nonneg_integer_roots of the zero polynomial")
    return [int(r) for r, _ in rational_roots(p) if r.denominator == 1 and r >= 0]


def max_nonneg_root(p: Poly, default: int = -1) -> int:
    roots = nonneg_integer_roots(p)
    return max(roots) if roots else default


class RatFun:
    """Reduced quotient of polynomials with a monic denominator."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None, _reduced=False):
        num = num if isinstance(num, Poly) else Poly.const(num)
        den = ONE if den is None else (den if isinstance(den, Poly) else Poly.const(den))
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if not _reduced:
            if num.is_zero():
                den = ONE
            else:
                g = num.gcd(den)
                if g.degree > 0:
                    num = num.exact_div(g)
                    den = den.exact_div(g)
                lc = den.lc
                if lc != 1:
                    num = num * (1 / lc)
                    den = den * (1 / lc)
        self.num = num
        self.den = den
        self._hash = None

    @classmethod
    def x(cls) -> "RatFun":
        return cls(Poly.x(), _reduced=True)

    @classmethod
    def const(cls, c) -> "RatFun":
        return cls(Poly.const(c), _reduced=True)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_poly(self) -> bool:
        return self.den.degree == 0

    def is_const(self) -> bool:
        return self.den.degree == 0 and self.num.degree <= 0

    def const_value(self) -> Fraction:
        if not self.is_const():
            raise ValueError("not a constant")
        return self.num.coeff(0)

    def __bool__(self):
        return not self.num.is_zero()

    def __eq__(self, other):
        if isinstance(other, RatFun):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (Poly, int, Fraction)):
            return self == RatFun(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("RatFun", self.num, self.den))
        return self._hash

    @staticmethod
    def _coerce(other):
        if isinstance(other, RatFun):
            return other
        if isinstance(other, Poly):
            return RatFun(other, _reduced=True)
        if isinstance(other, (int, Fraction)):
            return RatFun.const(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            return self
        if self.is_zero():
            return o
        if self.den == o.den:
            return RatFun(self.num + o.num, self.den)
        return RatFun(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFun(-self.num, self.den, _reduced=True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.is_zero() or o.is_zero():
            return RatFun.const(0)
        if o.is_const():
            return RatFun(self.num * o.num.coeffs[0], self.den, _reduced=True)
        if self.is_const():
            return RatFun(o.num * self.num.coeffs[0], o.den, _reduced=True)
        return RatFun(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def inverse(self) -> "RatFun":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RatFun(self.den, self.num)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if k >= 0:
            return RatFun(self.num ** k, self.den ** k, _reduced=True)
        return self.inverse() ** (-k)

    def __call__(self, value):
        if isinstance(value, (Poly, RatFun)):
            return self.compose(value)
        d = self.den(value)
        if d == 0:
            raise ZeroDivisionError(f"pole at {value}")
        return self.num(value) / d

    def compose(self, inner) -> "RatFun":
        inner = RatFun._coerce(inner)
        acc = RatFun.const(0)
        for c in reversed(self.num.coeffs):
            acc = acc * inner + c
        dacc = RatFun.const(0)
        for c in reversed(self.den.coeffs):
            dacc = dacc * inner + c
        return acc / dacc

    def shift(self, c) -> "RatFun":
        c = as_rat(c)
        if c == 0 or self.is_const():
            return self
        return RatFun(self.num.shift(c), self.den.shift(c))

    def affine(self, m, r) -> "RatFun":
        return RatFun(self.num.affine(m, r), self.den.affine(m, r))

    def derivative(self) -> "RatFun":
        return RatFun(self.num.derivative() * self.den - self.num * self.den.derivative(), self.den * self.den)

    def poles(self) -> list[tuple[Fraction, int]]:
        return rational_roots(self.den)

    def to_str(self, var: str = "n") -> str:
        if self.den == ONE:
            return self.num.to_str(var)
        return f"({self.num.to_str(var)})/({self.den.to_str(var)})"

    def __str__(self):
        return self.to_str("n")

    def __repr__(self):
        return f"RatFun({self.to_str('x')})"


def poly_lcm(polys) -> Poly:
    acc = ONE
    for p in polys:
        if p.is_zero():
            continue
        acc = (acc * p).exact_div(acc.gcd(p)).monic()
    return acc


def poly_gcd(polys) -> Poly:
    acc = ZERO
    for p in polys:
        acc = acc.gcd(p) if acc else p.monic()
        if acc.degree == 0:
            return ONE
    return acc


@dataclass(frozen=True)
class PartialFractionForm:
    poly_part: Poly
    pole_terms: tuple  # of (beta, j, c)

    def recombine(self) -> RatFun:
        acc = RatFun(self.poly_part)
        for beta, j, c in self.pole_terms:
            acc = acc + RatFun(Poly.const(c), Poly((-beta, 1)) ** j)
        return acc


def partial_fractions(r: RatFun) -> PartialFractionForm:
    """Decompose r into a polynomial part plus sum of c/(x-beta)^j over Q."""
    q, rem = divmod(r.num, r.den)
    if r.den.degree == 0:
        return PartialFractionForm(r.num * (1 / r.den.lc), ())
    roots = rational_roots(r.den)
    if sum(m for _, m in roots) != r.den.degree:
        raise IrreducibleDenominator(f"denominator {r.den.to_str('x')} does not split over Q")
    unknowns = [(beta, j) for beta, m in roots for j in range(1, m + 1)]
    # rem(x) = sum c * den(x)/(x-beta)^j, sampled at deg(den) points
    basis = [r.den.exact_div(Poly((-beta, 1)) ** j) for beta, j in unknowns]
    pts = []
    x = 0
    pole_set = {beta for beta, _ in roots}
    while len(pts) < len(unknowns):
        if Fraction(x) not in pole_set:
            pts.append(Fraction(x))
        x += 1
    rows = [[b(pt) for b in basis] for pt in pts]
    rhs = [rem(pt) for pt in pts]
    sol = solve_linear(rows, rhs)
    terms = tuple((beta, j, c) for (beta, j), c in zip(unknowns, sol) if c != 0)
    return PartialFractionForm(q, terms)


def solve_linear(rows, rhs):
    """Solve a square nonsingular system over Q by Gaussian elimination."""
    n = len(rows)
    aug = [list(map(as_rat, row)) + [as_rat(b)] for row, b in zip(rows, rhs)]
    for col in range(n):
        piv = next((i for i in range(col, n) if aug[i][col] != 0), None)
        if piv is None:
            raise ValueError("singular linear system")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[col])]
    return [aug[i][n] for i in range(n)]


def _is_zero(v) -> bool:
    if isinstance(v, RatFun):
        return v.is_zero()
    return v == 0


def nullspace_vector(columns):
    """A nonzero vector c with sum_k c[k] * columns[k] = 0, or None.

    Entries may be Fractions or RatFuns (any exact field elements).
    """
    ncols = len(columns)
    if ncols == 0:
        return None
    nrows = max(len(c) for c in columns)
    zero = Fraction(0)
    mat = [[(columns[k][i] if i < len(columns[k]) else zero) for k in range(ncols)] for i in range(nrows)]
    pivots = []
    row = 0
    for col in range(ncols):
        piv = next((i for i in range(row, nrows) if not _is_zero(mat[i][col])), None)
        if piv is None:
            continue
        mat[row], mat[piv] = mat[piv], mat[row]
        inv = 1 / mat[row][col]
        mat[row] = [v * inv for v in mat[row]]
        for i in range(nrows):
            if i != row and not _is_zero(mat[i][col]):
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[row])]
        pivots.append(col)
        row += 1
        if row == nrows:
            break
    free = next((c for c in range(ncols) if c not in pivots), None)
    if free is None:
        return None
    vec = [Fraction(0)] * ncols
    vec[free] = Fraction(1)
    for r, pc in enumerate(pivots):
        vec[pc] = -mat[r][free]
    return vec
