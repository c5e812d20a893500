"""Convolution of d'Alembertian sequences with (quasi-)rationally
d'Alembertian ones, producing nested-sum representations together with
annihilators factored into first-order operators.

Inputs on the left are linear combinations of nested sums of hypergeometric,
rational or quasi-rational atoms; inputs on the right use rational or
quasi-rational atoms only.  Interlacings of such sequences are handled by
resectioning both operands to a common period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .closure import op_multisect_rep
from .errors import (
    IrregularInput,
    NotDAlembertian,
    NotRationallyDAlembertian,
    PoleAtIndex,
    SingularLeading,
)
from .exact import ONE, Poly, RatFun, as_rat, partial_fractions, rational_roots
from .ore import ShiftOp
from .seqrep import (
    Delta,
    Evaluator,
    FinSupport,
    Hypergeom,
    Interlace,
    InvShift,
    LinComb,
    NestedSum,
    PartialSum,
    PolePower,
    PolyPower,
    Product,
    QuasiAtom,
    RationalSeq,
    SeqExpr,
    Shift,
    as_nest_terms,
    atom_threshold,
    brute_conv,
    nest_constants,
    simplify,
    zero_pad,
)

_N = Poly.x()
_ZERO = LinComb((), ())


def _rf(c) -> RatFun:
    if isinstance(c, RatFun):
        return c
    if isinstance(c, Poly):
        return RatFun(c, _reduced=True)
    return RatFun.const(as_rat(c))


def _first(lead, trail) -> ShiftOp:
    """lead(n)*E - trail(n)"""
    return ShiftOp({1: _rf(lead), 0: -_rf(trail)})


def _nat_roots(p: Poly) -> list:
    return [int(r) for r, _ in rational_roots(p) if r.denominator == 1 and r >= 0] if p.degree > 0 else []


# ---------------------------------------------------------------------------
# factored annihilators


@dataclass(frozen=True)
class FactoredAnnihilator:
    """Composition factors[0] * factors[1] * ... of first-order operators."""

    factors: tuple

    def expand(self) -> ShiftOp:
        return ShiftOp.compose(self.factors)

    def canonical(self) -> ShiftOp:
        return self.expand().canonical()

    def to_str(self) -> str:
        if not self.factors:
            return "1"
        return "".join(f"({f.to_str()})" for f in self.factors)

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)


def flclm(F, G) -> list:
    """A common left multiple of two factored operators, again factored.

    The result is G-or-F-shaped on the right with one extra first-order
    factor per factor of the shorter operand that is not already absorbed.
    """
    F, G = list(monic_chain(F)), list(monic_chain(G))
    if len(F) > len(G):
        F, G = G, F
    if not F or G[len(G) - len(F):] == F:
        return G
    k = 0
    while F[len(F) - 1 - k] == G[len(G) - 1 - k]:
        k += 1
    if k:
        # lclm(A*R, B*R) = lclm(A, B)*R
        return flclm(F[: len(F) - k], G[: len(G) - k]) + G[len(G) - k:]
    # process F from the right; Q*F[i+1:] = H throughout
    H = G
    Q = ShiftOp.compose(G)
    for f in reversed(F):
        quo, R = Q.right_divmod(f)
        if R.is_zero():
            Q = quo
            continue
        r = R.coeff(0)
        rho = -f.coeff(0) / f.coeff(1)
        new = _first(1, rho * r.shift(1) / r)
        H = [new] + H
        Q, rem = (new * Q).right_divmod(f)
        if not rem.is_zero():
            raise ArithmeticError("internal error: lclm is not right-divisible")
    return H


def monic_chain(factors) -> tuple:
    """The same operator up to a left scalar, with every factor of the form E - s(n)."""
    out = []
    carry = RatFun.const(1)
    for f in reversed(factors):
        lead, trail = f.coeff(1) * carry.shift(1), f.coeff(0) * carry
        out.append(_first(1, -trail / lead))
        carry = lead
    return tuple(reversed(out))


@dataclass(frozen=True)
class Dal:
    """A sequence expression together with a factored annihilator that holds
    for all large enough n."""

    expr: SeqExpr
    factors: tuple = ()


def _conj(factors, rho: RatFun):
    """Factors for f*y given factors for y and f(n+1) = rho(n)*f(n)."""
    return tuple(_first(F.coeff(1) / rho, -F.coeff(0)) for F in factors)


def dal_lin(pairs) -> Dal:
    pairs = [(as_rat(c), d) for c, d in pairs if c]
    if not pairs:
        return Dal(_ZERO, ())
    if len(pairs) == 1 and pairs[0][0] == 1:
        return pairs[0][1]
    factors = []
    for _, d in sorted(pairs, key=lambda cd: -len(cd[1].factors)):
        factors = flclm(factors, d.factors)
    return Dal(LinComb(tuple(c for c, _ in pairs), tuple(d.expr for _, d in pairs)), tuple(factors))


def dal_shift(d: Dal, k: int) -> Dal:
    return Dal(Shift(d.expr, k), tuple(F.shift_coeffs(k) for F in d.factors))


def dal_zero_pad(d: Dal, k: int) -> Dal:
    if k == 0:
        return d
    return Dal(zero_pad(d.expr, k), tuple(F.shift_coeffs(-k) for F in d.factors))


def dal_times_atom(atom: SeqExpr, d: Dal) -> Dal:
    return Dal(times_atom(atom, d.expr), _conj(d.factors, atom_ratio(atom)))


def atom_pq(atom) -> tuple:
    """(p, q) with q(n)*a(n+1) = p(n)*a(n) for large n."""
    if isinstance(atom, Hypergeom):
        return atom.p, atom.q
    if isinstance(atom, RationalSeq):
        u, v = atom.r.num, atom.r.den
        if u.is_zero():
            return Poly(), ONE
        p, q = u.shift(1) * v, u * v.shift(1)
        g = p.gcd(q)
        return p.exact_div(g), q.exact_div(g)
    if isinstance(atom, QuasiAtom):
        j = atom.form.j
        if isinstance(atom.form, PolyPower):
            return Poly((1, 1)) ** j * atom.alpha, _N ** j
        b = atom.form.beta
        return Poly((-b, 1)) ** j * atom.alpha, Poly((1 - b, 1)) ** j
    if isinstance(atom, Product):
        p1, q1 = atom_pq(atom.left)
        p2, q2 = atom_pq(atom.right)
        return p1 * p2, q1 * q2
    raise NotDAlembertian(f"not a hypergeometric-type atom: {type(atom).__name__}")


def atom_ratio(atom) -> RatFun:
    p, q = atom_pq(atom)
    return RatFun(p, q)


def dal_of(expr: SeqExpr) -> Dal:
    """A factored annihilator built from the structure of a representation."""
    return Dal(expr, tuple(_factors_of(expr)))


def _factors_of(e) -> list:
    if isinstance(e, (Hypergeom, RationalSeq, QuasiAtom, Product)) and _is_hyper_atom(e):
        p, q = atom_pq(e)
        if p.is_zero():
            return []
        return [_first(RatFun(q), RatFun(p))]
    if isinstance(e, (Delta, FinSupport)):
        return []
    if isinstance(e, NestedSum):
        if e.depth == 1:
            return _factors_of(e.factors[0])
        inner = PartialSum(NestedSum(e.factors[1:], e.offsets[1:]))
        inner_f = _factors_of(inner)
        if e.offsets[0]:
            inner_f = [F.shift_coeffs(e.offsets[0]) for F in inner_f]
        return list(_conj(inner_f, atom_ratio(e.factors[0])))
    if isinstance(e, PartialSum):
        inner = _factors_of(e.inner)
        return [F.shift_coeffs(1) for F in inner] + [_first(1, 1)]
    if isinstance(e, Shift):
        return [F.shift_coeffs(e.k) for F in _factors_of(e.inner)]
    if isinstance(e, InvShift):
        return [F.shift_coeffs(-1) for F in _factors_of(e.inner)]
    if isinstance(e, LinComb):
        out = []
        for c, t in zip(e.coeffs, e.terms):
            if c:
                out = flclm(out, _factors_of(t))
        return out
    if isinstance(e, Product):
        for atom, other in ((e.left, e.right), (e.right, e.left)):
            if _is_hyper_atom(atom):
                return list(_conj(_factors_of(other), atom_ratio(atom)))
    raise NotDAlembertian(f"no factored annihilator rule for {type(e).__name__}")


def _is_hyper_atom(e) -> bool:
    if isinstance(e, Product):
        return _is_hyper_atom(e.left) and _is_hyper_atom(e.right)
    return isinstance(e, (Hypergeom, RationalSeq, QuasiAtom))


def times_atom(atom: SeqExpr, e: SeqExpr) -> SeqExpr:
    """atom * e, pushed into the leading factors of nested sums where possible."""
    if isinstance(e, LinComb):
        return LinComb(e.coeffs, tuple(times_atom(atom, t) for t in e.terms))
    if isinstance(e, NestedSum):
        return NestedSum((Product(atom, e.factors[0]),) + e.factors[1:], e.offsets)
    if isinstance(e, FinSupport):
        try:
            vals = Evaluator().terms(atom, len(e.values))
        except (ZeroDivisionError, ValueError):
            return Product(atom, e)
        return FinSupport(tuple(a * v for a, v in zip(vals, e.values)))
    return Product(atom, e)


def nest_with_head(head: SeqExpr, e: SeqExpr, offset: int = 0) -> SeqExpr:
    """head(n) * sum_{k <= n + offset} e(k), distributed over linear combinations."""
    if isinstance(e, LinComb):
        return LinComb(e.coeffs, tuple(nest_with_head(head, t, offset) for t in e.terms))
    if isinstance(e, NestedSum):
        return NestedSum((head,) + e.factors, (offset,) + e.offsets)
    return NestedSum((head, e), (offset,))


# ---------------------------------------------------------------------------
# first-order solving


def _solve(L0: ShiftOp, rhs: Dal, y0) -> Dal:
    y0 = as_rat(y0)
    qt = L0.coeff(1).num * L0.coeff(0).den
    pt = -(L0.coeff(0).num * L0.coeff(1).den)
    if L0.coeff(1).is_zero():
        raise SingularLeading("first-order operator has no E term")
    if qt.degree > 0 and _nat_roots(qt):
        raise SingularLeading(f"leading coefficient {qt} vanishes at n = {_nat_roots(qt)}")
    factors = tuple(rhs.factors) + (_first(RatFun(qt), RatFun(pt)),)
    roots = _nat_roots(pt) if not pt.is_zero() else []
    if pt.is_zero():
        # y(n+1) = f(n)/q(n): y is y0 followed by the shifted quotient
        body = times_atom(RationalSeq(RatFun(ONE, qt)), rhs.expr)
        return Dal(InvShift(body, y0), factors)
    if not roots:
        return Dal(_regular_solution(qt, pt, rhs.expr, y0), factors)
    # split where the trailing coefficient vanishes
    Np = max(roots) + 1
    f = Evaluator().terms(rhs.expr, Np)
    ys = [y0]
    for n in range(Np):
        ys.append((pt(n) * ys[-1] + f[n]) / qt(n))
    shifted = _regular_solution(qt.shift(Np), pt.shift(Np), Shift(rhs.expr, Np), ys[Np])
    expr = LinComb((1, 1), (FinSupport(tuple(ys[:Np])), zero_pad(shifted, Np)))
    return Dal(expr, factors)


def _regular_solution(qt: Poly, pt: Poly, f: SeqExpr, y0) -> SeqExpr:
    """y(n) = h(n) * (y0 + sum_{k<n} f(k) / (q(k) h(k+1))) with h(n+1)/h(n) = p(n)/q(n)."""
    h = Hypergeom(pt, qt, (1,))
    w = Hypergeom(qt, pt.shift(1), (1 / pt(0),))
    coeffs, nodes = [], []
    if y0:
        coeffs.append(y0)
        nodes.append(h)
    coeffs += [1, -1]
    nodes += [nest_with_head(h, times_atom(w, f)), times_atom(RationalSeq(RatFun(ONE, pt)), f)]
    return LinComb(tuple(coeffs), tuple(nodes))


def solve_first_order(L0: ShiftOp, rhs, y0) -> SeqExpr:
    """The solution of L0(y) = rhs with y(0) = y0, as a sequence expression."""
    d = rhs if isinstance(rhs, Dal) else Dal(rhs, ())
    return _solve(L0, d, y0).expr


def unshift_conv(conv_rep: SeqExpr, a: SeqExpr, b: SeqExpr, k: int = 1) -> SeqExpr:
    """A representation of a*b from one of E^k(a) * E^k(b)."""
    ev = Evaluator()
    rep = conv_rep
    for s in range(k - 1, -1, -1):
        A, B = (Shift(a, s), Shift(b, s)) if s else (a, b)
        a0, a1 = ev.terms(A, 2)
        b0, b1 = ev.terms(B, 2)
        pieces = [(1, rep)]
        if a0:
            pieces.append((a0, Shift(B, 2)))
        if b0:
            pieces.append((b0, Shift(A, 2)))
        inner = LinComb(tuple(c for c, _ in pieces), tuple(t for _, t in pieces))
        rep = InvShift(InvShift(inner, a0 * b1 + a1 * b0), a0 * b0)
    return rep


# ---------------------------------------------------------------------------
# atom bookkeeping for both operand sides


def _hyper_shift(atom, N: int) -> Hypergeom:
    """E^N of a hypergeometric-type atom as a Hypergeom node with one initial value."""
    p, q = atom_pq(atom)
    val = Evaluator().value(atom, N)
    return Hypergeom(p.shift(N), q.shift(N), (val,))


def _quasi_dict(atom, N: int) -> dict:
    """E^N of a quasi-rational atom as {alpha: rational function}."""
    if isinstance(atom, RationalSeq):
        return {Fraction(1): atom.r.shift(N)} if not atom.r.is_zero() else {}
    if isinstance(atom, QuasiAtom):
        a, j = atom.alpha, atom.form.j
        if isinstance(atom.form, PolyPower):
            return {a: RatFun(Poly((N, 1)) ** j * a ** N)}
        return {a: RatFun(Poly.const(a ** N), Poly((N - atom.form.beta, 1)) ** j)}
    if isinstance(atom, Hypergeom) and atom.p.degree <= 0 and atom.q.degree <= 0:
        val = Evaluator().value(atom, N)
        if atom.p.is_zero() or val == 0:
            return {}
        return {atom.p.coeff(0) / atom.q.coeff(0): RatFun.const(val)}
    if isinstance(atom, Product):
        left, right = _quasi_dict(atom.left, N), _quasi_dict(atom.right, N)
        out = {}
        for a1, r1 in left.items():
            for a2, r2 in right.items():
                out[a1 * a2] = out.get(a1 * a2, RatFun.const(0)) + r1 * r2
        return {a: r for a, r in out.items() if not r.is_zero()}
    raise NotRationallyDAlembertian(
        f"{type(atom).__name__} atom is not rational or quasi-rational"
    )


def _phis(atom, N: int = 0) -> list:
    """E^N of a quasi-rational atom as [(coef, QuasiAtom)] in partial-fraction form."""
    if isinstance(atom, QuasiAtom) and N == 0:
        return [(Fraction(1), atom)]
    out = []
    for alpha, r in _quasi_dict(atom, N).items():
        pf = partial_fractions(r)
        for i, c in enumerate(pf.poly_part.coeffs):
            if c:
                out.append((c, QuasiAtom(alpha, PolyPower(i))))
        for beta, j, c in pf.pole_terms:
            out.append((c, QuasiAtom(alpha, PolePower(beta, j))))
    return out


def _shift_phi(phi: QuasiAtom, s: int) -> list:
    """E^s of a quasi-rational atom, as [(coef, QuasiAtom)]."""
    return _phis(phi, s) if s else [(Fraction(1), phi)]


def _b_threshold(atom) -> int:
    if isinstance(atom, RationalSeq):
        poles = _nat_roots(atom.r.den)
        return max([len(atom.prefix)] + [p + 1 for p in poles])
    if isinstance(atom, QuasiAtom):
        return 0
    if isinstance(atom, Hypergeom):
        return max(0, len(atom.initial) - 1)
    if isinstance(atom, Product):
        return max(_b_threshold(atom.left), _b_threshold(atom.right))
    raise NotRationallyDAlembertian(f"{type(atom).__name__} atom is not rational or quasi-rational")


def _check_b_atom(atom):
    if isinstance(atom, Product):
        _check_b_atom(atom.left)
        _check_b_atom(atom.right)
        return
    if isinstance(atom, (RationalSeq, QuasiAtom)):
        return
    if isinstance(atom, Hypergeom):
        if atom.p.degree <= 0 and atom.q.degree <= 0:
            return
        raise NotRationallyDAlembertian(
            f"hypergeometric atom with ratio ({atom.p})/({atom.q}) is not quasi-rational"
        )
    raise NotRationallyDAlembertian(f"{type(atom).__name__} is not a quasi-rational atom")


def _check_a_atom(atom):
    if not _is_hyper_atom(atom):
        raise NotDAlembertian(f"{type(atom).__name__} is not a hypergeometric-type atom")


def _pole_set(atom, N: int) -> list:
    """Poles (in n) of the quasi-rational parts of E^N(atom)."""
    out = []
    for r in _quasi_dict(atom, N).values():
        if r.den.degree > 0:
            out.extend(b for b, _ in rational_roots(r.den))
    return out


def _pair_threshold(a_atoms, b_atoms) -> int:
    N = max([atom_threshold(f) for f in a_atoms] + [_b_threshold(f) for f in b_atoms] + [0])
    _, q = atom_pq(a_atoms[0])
    rhos = [r for r, _ in rational_roots(q)] if q.degree > 0 else []
    if not rhos:
        return N
    betas = _pole_set(b_atoms[0], 0)
    while True:
        bad = False
        for rho in rhos:
            for beta in betas:
                s = rho + beta - 2 * N
                if s.denominator == 1 and s >= 0:
                    bad = True
        if not bad:
            return N
        N += 1


# ---------------------------------------------------------------------------
# the recursive construction


@dataclass(frozen=True)
class MainStepResult:
    """L0(y) = rhs for the convolution y handled at this step."""

    L0: ShiftOp
    rhs: SeqExpr
    case: str
    rhs_factors: tuple = ()


@dataclass(frozen=True)
class ConvResult:
    expr: SeqExpr
    annihilator: FactoredAnnihilator
    steps: tuple = ()

    def __iter__(self):
        return iter((self.expr, self.annihilator))


class _Builder:
    def __init__(self):
        self.memo = {}
        self.steps = []
        self.ev = Evaluator()

    # general operands -------------------------------------------------

    def expr_conv(self, A: SeqExpr, B: SeqExpr) -> Dal:
        nests_a, fins_a = as_nest_terms(A)
        nests_b, fins_b = as_nest_terms(B)
        pieces = []
        for ca, na in nests_a:
            for cb, nb in nests_b:
                pieces.append((ca * cb, self.nest_conv(na, nb)))
        eps_a = self._fin_values(fins_a)
        eps_b = self._fin_values(fins_b)
        if eps_a and nests_b:
            B_n = LinComb(tuple(c for c, _ in nests_b), tuple(n for _, n in nests_b))
            pieces.append((1, self.fin_conv(eps_a, dal_of(B_n))))
        if eps_b and nests_a:
            A_n = LinComb(tuple(c for c, _ in nests_a), tuple(n for _, n in nests_a))
            pieces.append((1, self.fin_conv(eps_b, dal_of(A_n))))
        if eps_a and eps_b:
            pieces.append((1, Dal(FinSupport(tuple(_fin_conv_values(eps_a, eps_b))), ())))
        return dal_lin(pieces)

    def _fin_values(self, fins) -> list:
        if not fins:
            return []
        length = max(len(f.values) if isinstance(f, FinSupport) else 1 for _, f in fins)
        acc = [Fraction(0)] * length
        for c, f in fins:
            for i, v in enumerate(self.ev.terms(f, length)):
                acc[i] += c * v
        while acc and acc[-1] == 0:
            acc.pop()
        return acc

    def fin_conv(self, eps, d: Dal) -> Dal:
        """eps * y = sum_k eps_k E_0^{-k}(y) for a finitely supported eps."""
        return dal_lin([(e, dal_zero_pad(d, k)) for k, e in enumerate(eps) if e])

    # a single pair of nested sums -------------------------------------

    def nest_conv(self, na: NestedSum, nb: NestedSum) -> Dal:
        key = (na, nb)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        for f in na.factors:
            _check_a_atom(f)
        for f in nb.factors:
            _check_b_atom(f)
        N = _pair_threshold(na.factors, nb.factors)
        if N > 0:
            out = self._irregular(na, nb, N)
        else:
            heads = tuple(f if isinstance(f, Hypergeom) else _hyper_shift(f, 0) for f in na.factors)
            a = NestedSum(heads, na.offsets)
            out = dal_lin([(c, self.regular_conv(a, phis)) for c, phis in self._phi_nests(nb, 0)])
        self.memo[key] = out
        return out

    def _phi_nests(self, nb: NestedSum, N: int) -> list:
        """E^N of a right-hand nest, expanded into nests of quasi-rational atoms."""
        expansions = [_phis(f, N) for f in nb.factors]
        out = []

        def rec(i, coef, chosen):
            if i == len(expansions):
                out.append((coef, NestedSum(tuple(chosen), nb.offsets)))
                return
            for c, phi in expansions[i]:
                rec(i + 1, coef * c, chosen + [phi])

        rec(0, Fraction(1), [])
        return out

    def _irregular(self, na: NestedSum, nb: NestedSum, N: int) -> Dal:
        ca = nest_constants(na.factors, na.offsets, N, self.ev)
        cb = nest_constants(nb.factors, nb.offsets, N, self.ev)
        pieces = []
        for i, ci in enumerate(ca, start=1):
            if not ci:
                continue
            a_sh = NestedSum(tuple(_hyper_shift(f, N) for f in na.factors[:i]), na.offsets[: i - 1])
            for j, cj in enumerate(cb, start=1):
                if not cj:
                    continue
                b_nest = NestedSum(nb.factors[:j], nb.offsets[: j - 1])
                inner = dal_lin([(c, self.regular_conv(a_sh, phis)) for c, phis in self._phi_nests(b_nest, N)])
                pieces.append((ci * cj, dal_zero_pad(inner, 2 * N)))
        eta_a = [v for v in self.ev.terms(na, N)]
        eta_b = [v for v in self.ev.terms(nb, N)]
        if any(eta_a):
            pieces.append((1, self.fin_conv(eta_a, dal_of(nb))))
        if any(eta_b):
            pieces.append((1, self.fin_conv(eta_b, dal_of(na))))
        if any(eta_a) and any(eta_b):
            pieces.append((-1, Dal(FinSupport(tuple(_fin_conv_values(eta_a, eta_b))), ())))
        return dal_lin(pieces)

    # the main step ----------------------------------------------------

    def regular_conv(self, a: NestedSum, b: NestedSum) -> Dal:
        key = ("regular", a, b)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        for h in a.factors:
            if not isinstance(h, Hypergeom) or len(h.initial) != 1 or _nat_roots(h.q):
                return self.nest_conv(a, b)
        slot = len(self.steps)
        self.steps.append(None)
        step = self.main_step(a, b)
        self.steps[slot] = MainStepResult(step[0], step[1].expr, step[2], step[1].factors)
        L0, rhs, case = step
        if case == "case2":
            out = rhs
        else:
            y0 = self.ev.value(a, 0) * self.ev.value(b, 0)
            out = _solve(L0, rhs, y0)
        self.memo[key] = out
        return out

    def main_step(self, a: NestedSum, b: NestedSum):
        h = a.factors[0]
        phi = b.factors[0]
        alpha = phi.alpha
        d, e = a.depth, b.depth
        if isinstance(phi.form, PolyPower) and phi.form.j == 0:
            return self._case1(a, b, h, phi, alpha, d, e)
        if isinstance(phi.form, PolyPower):
            return self._case2(a, b, h, phi, alpha)
        return self._case3(a, b, h, phi, alpha, d, e)

    def _shift_a(self, a: NestedSum) -> NestedSum:
        """E(a) as a nest: first factor shifted, first offset raised by one."""
        h = a.factors[0]
        h1 = Hypergeom(h.p.shift(1), h.q.shift(1), (self.ev.value(h, 1),))
        if a.depth == 1:
            return NestedSum((h1,))
        return NestedSum((h1,) + a.factors[1:], (a.offsets[0] + 1,) + a.offsets[1:])

    def _case1(self, a, b, h, phi, alpha, d, e):
        L0 = _first(1, alpha)
        if e == 1:
            S = Fraction(1)
        else:
            tail = NestedSum(b.factors[1:], b.offsets[1:])
            S = sum(self.ev.terms(tail, b.offsets[0] + 1), Fraction(0))
        pieces = [(S, dal_of(self._shift_a(a)))]
        if e >= 2:
            xi = b.offsets[0]
            phi2 = b.factors[1]
            rest_offsets = b.offsets[2:]
            new_off = xi + 1 + (b.offsets[1] if e >= 3 else 0)
            for c, f in _shift_phi(phi2, xi + 1):
                head = QuasiAtom(alpha * f.alpha, f.form)
                if e == 2:
                    bp = NestedSum((head,))
                else:
                    bp = NestedSum((head,) + b.factors[2:], (new_off,) + rest_offsets)
                pieces.append((alpha * c, self.nest_conv(a, bp)))
        return L0, dal_lin(pieces), "case1"

    def _case2(self, a, b, h, phi, alpha):
        j = phi.form.j
        c_nest = NestedSum((QuasiAtom(alpha, PolyPower(0)),) + b.factors[1:], b.offsets)
        h0, h1 = self.ev.terms(h, 2)
        pieces = []
        for i in range(j + 1):
            if i == 0:
                hi = h
            else:
                hi = Hypergeom(Poly((1, 1)) ** i * h.p, _N ** i * h.q, (0, h1))
            ai = NestedSum((hi,) + a.factors[1:], a.offsets)
            conv = self.nest_conv(ai, c_nest)
            coef = (-1) ** i * math.comb(j, i)
            if j - i:
                conv = dal_times_atom(QuasiAtom(1, PolyPower(j - i)), conv)
            pieces.append((coef, conv))
        return ShiftOp.const(1), dal_lin(pieces), "case2"

    def _case3(self, a, b, h, phi, alpha, d, e):
        beta, j = phi.form.beta, phi.form.j
        p, q = h.p, h.q
        q_t, p_t = q.shift(-beta), p.shift(-beta)
        if _nat_roots(q_t):
            raise IrregularInput("q(n - beta) vanishes on the natural numbers; normalize first")
        L0 = _first(RatFun(q_t), RatFun(p_t))
        h0, h1 = self.ev.terms(h, 2)
        a0 = self.ev.value(a, 0)
        pieces = []
        # A: q(n-beta) * a_0 * E(b)
        if a0:
            head = QuasiAtom(alpha, PolePower(beta - 1, j))
            if e == 1:
                Eb = NestedSum((head,))
            else:
                Eb = NestedSum((head,) + b.factors[1:], (b.offsets[0] + 1,) + b.offsets[1:])
            pieces.append((a0 * alpha, dal_times_atom(RationalSeq(RatFun(q_t)), dal_of(Eb))))
        # B: q(n-beta) * (E(h E^eta(a~)) * b)
        if d >= 2:
            eta = a.offsets[0]
            h2 = a.factors[1]
            val = h1 * self.ev.value(h2, 1 + eta)
            head = Hypergeom(p.shift(1) * h2.p.shift(1 + eta), q.shift(1) * h2.q.shift(1 + eta), (val,))
            if d == 2:
                ap = NestedSum((head,))
            else:
                ap = NestedSum((head,) + a.factors[2:], (1 + eta + a.offsets[1],) + a.offsets[2:])
            pieces.append((1, dal_times_atom(RationalSeq(RatFun(q_t)), self.nest_conv(ap, b))))
        # C: sum_i c_i(n) * (u^(i) * (n - beta) b)
        if j == 1:
            head = QuasiAtom(alpha, PolyPower(0))
        else:
            head = QuasiAtom(alpha, PolePower(beta, j - 1))
        b_low = NestedSum((head,) + b.factors[1:], b.offsets)
        for i, ci in enumerate(_case3_coeffs(p, q, beta)):
            if ci.is_zero():
                continue
            if i == 0:
                U = Hypergeom(p, q.shift(1), (h0 / q(0),))
            else:
                U = Hypergeom(Poly((1, 1)) ** i * p, _N ** i * q.shift(1), (0, h1 / q(1)))
            u = NestedSum((U,) + a.factors[1:], a.offsets)
            conv = self.nest_conv(u, b_low)
            if ci.degree <= 0:
                pieces.append((ci.coeff(0), conv))
            else:
                pieces.append((1, dal_times_atom(RationalSeq(RatFun(ci)), conv)))
        return L0, dal_lin(pieces), "case3"


def _case3_coeffs(p: Poly, q: Poly, beta) -> list:
    """c_i(n) with q(n-beta)p(k) - p(n-beta)q(k) = (n - k - beta) * sum_i c_i(n) k^i."""
    qt, pt = q.shift(-beta), p.shift(-beta)
    D = max(p.degree, q.degree)
    P = [qt * p.coeff(m) - pt * q.coeff(m) for m in range(D + 1)]
    t = Poly((-beta, 1))  # the root k = n - beta
    quot = [Poly()] * D
    if D == 0:
        return []
    quot[D - 1] = P[D]
    for m in range(D - 1, 0, -1):
        quot[m - 1] = P[m] + t * quot[m]
    if not (P[0] + t * quot[0]).is_zero():
        raise ArithmeticError("internal error: P(k) not divisible by (n - k - beta)")
    return [-c for c in quot]


def _fin_conv_values(x, y) -> list:
    n = len(x) + len(y) - 1
    xs = list(x) + [Fraction(0)] * (n - len(x))
    ys = list(y) + [Fraction(0)] * (n - len(y))
    return brute_conv(xs, ys)


# ---------------------------------------------------------------------------
# validity of the assembled annihilator from index 0 on


def _critical_index(factors) -> int:
    top = 0
    for F in factors:
        for c in F.terms.values():
            for poly in (c.num, c.den):
                roots = _nat_roots(poly)
                if roots:
                    top = max(top, max(roots))
    return top


def finalize_factors(d: Dal, margin: int = 40, extra: int = 0) -> tuple:
    """Make the factored annihilator hold termwise for every n >= 0.

    The operator built by the construction is guaranteed only for large n;
    we check it termwise past every singular index and multiply the leftmost
    factor by a falling factorial that vanishes at the remaining failures.
    """
    factors = list(d.factors)
    if not factors:
        factors = [ShiftOp.const(1)]
    expanded = ShiftOp.compose(factors)
    P = expanded.canonical()
    k0 = P.hi
    unit = P.coeff(k0) / expanded.coeff(k0)
    top = max(_critical_index(factors), extra) + margin
    ev = Evaluator()
    while True:
        vals = ev.terms(d.expr, top + P.hi + 1)
        fails = []
        for n in range(top + 1):
            try:
                if P.apply(lambda k: vals[k], n) != 0:
                    fails.append(n)
            except PoleAtIndex:
                fails.append(n)
        if not fails or fails[-1] < top - margin // 2:
            break
        if top > 8 * (margin + extra + 50):
            raise ArithmeticError("assembled annihilator does not stabilise")
        top *= 2
    v = fails[-1] + 1 if fails else 0
    scale = unit * RatFun(Poly.falling(v)) if v else unit
    if len(factors) == 1 and factors[0].order == 0:
        return (scale * factors[0],)
    return (scale * factors[0],) + tuple(factors[1:])


# ---------------------------------------------------------------------------
# public drivers


def _expr(x):
    return getattr(x, "expr", x)


def _collect_atoms(e, side: str):
    nests, _ = as_nest_terms(e)
    for _, ns in nests:
        for f in ns.factors:
            if side == "b":
                _check_b_atom(f)
            else:
                _check_a_atom(f)


def conv_dalembert(a, b) -> ConvResult:
    """a * b for a d'Alembertian a and a (quasi-)rationally d'Alembertian b."""
    A, B = _expr(a), _expr(b)
    try:
        _collect_atoms(B, "b")
    except TypeError as exc:
        raise NotRationallyDAlembertian(str(exc)) from None
    try:
        _collect_atoms(A, "a")
    except TypeError as exc:
        raise NotDAlembertian(str(exc)) from None
    builder = _Builder()
    d = builder.expr_conv(A, B)
    factors = finalize_factors(d)
    return ConvResult(simplify(d.expr), FactoredAnnihilator(factors), tuple(builder.steps))


def theorem_main_step(a: NestedSum, b: NestedSum) -> MainStepResult:
    """One reduction step for regular nests (hypergeometric left, quasi-rational right)."""
    for h in a.factors:
        if not isinstance(h, Hypergeom) or _nat_roots(h.q) or len(h.initial) != 1:
            raise IrregularInput("left operand must be a nest of hypergeometric atoms with q free of natural roots")
    for phi in b.factors:
        if not isinstance(phi, QuasiAtom):
            raise IrregularInput("right operand must be a nest of quasi-rational atoms")
    builder = _Builder()
    L0, rhs, case = builder.main_step(a, b)
    return MainStepResult(L0, rhs.expr, case, rhs.factors)


def _parts(e):
    return list(e.parts) if isinstance(e, Interlace) else [e]


def _liouvillian_parts(u, v) -> list:
    us, vs = _parts(_expr(u)), _parts(_expr(v))
    m, k = len(us), len(vs)
    ell = m * k // math.gcd(m, k)
    a_secs = [op_multisect_rep(us[j % m], ell // m, j // m) for j in range(ell)]
    b_secs = [op_multisect_rep(vs[j % k], ell // k, j // k) for j in range(ell)]
    builder = _Builder()
    groups = [[] for _ in range(ell)]
    for j in range(ell):
        for i in range(ell):
            q, t = divmod(i + j, ell)
            groups[t].append((1, dal_zero_pad(builder.expr_conv(a_secs[j], b_secs[i]), q)))
    return [dal_lin(g) for g in groups]


def conv_liouvillian(u, v) -> SeqExpr:
    """u * v for interlacings of d'Alembertian parts (u) and (quasi-)rationally
    d'Alembertian parts (v); the result is an interlacing of lcm(m, k) parts."""
    parts = [simplify(d.expr) for d in _liouvillian_parts(u, v)]
    if len(parts) == 1:
        return parts[0]
    return Interlace(tuple(parts))


def conv_liouvillian_parts(u, v) -> list:
    """Like conv_liouvillian but returns (expr, factored annihilator) per part."""
    return [(simplify(d.expr), FactoredAnnihilator(finalize_factors(d))) for d in _liouvillian_parts(u, v)]
