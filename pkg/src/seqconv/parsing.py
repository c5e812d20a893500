"""Text forms for rational functions, recurrence/differential operators and
sequence expressions, with printers whose output parses back."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import ExprSyntaxError
from .exact import Poly, RatFun
from .ore import DiffOp, ShiftOp
from .seqrep import (
    Conv,
    Delta,
    FinSupport,
    Hypergeom,
    Interlace,
    InvShift,
    LinComb,
    Multisect,
    NestedSum,
    PartialSum,
    PolePower,
    PolyPower,
    Product,
    QuasiAtom,
    RationalSeq,
    SeqExpr,
    Shift,
    ZeroInterlace,
)

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "name", "sym" or "end"
    text: str
    pos: int


def tokenize(text: str) -> list:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # only whitespace left
            break
        if m.group(1) is not None:
            out.append(Token("num", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            out.append(Token("name", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch not in "+-*/^(),;":
                raise ExprSyntaxError(f"unexpected character {ch!r}", m.start(3))
            out.append(Token("sym", ch, m.start(3)))
        pos = m.end()
    out.append(Token("end", "", len(text)))
    return out


# ---------------------------------------------------------------------------
# rings the arithmetic grammar can evaluate into


class _RatRing:
    def __init__(self, var):
        self.var = var

    def symbol(self, name):
        return RatFun.x() if name == self.var else None

    def const(self, c):
        return RatFun.const(c)

    def inverse(self, v):
        return v.inverse()


class _ShiftRing:
    def symbol(self, name):
        if name == "n":
            return ShiftOp({0: RatFun.x()})
        if name == "E":
            return ShiftOp.E()
        return None

    def const(self, c):
        return ShiftOp.const(c)

    def inverse(self, v):
        if not v.terms:
            raise ZeroDivisionError("division by zero")
        if len(v.terms) == 1:
            (k, c), = v.terms.items()
            # (c E^k)^-1 = E^-k c^-1 = c(n-k)^-1 E^-k
            return ShiftOp({-k: c.shift(-k).inverse()})
        return None


class _DiffRing:
    def symbol(self, name):
        if name == "x":
            return DiffOp({0: RatFun.x()})
        if name == "D":
            return DiffOp.D()
        return None

    def const(self, c):
        return DiffOp.const(c)

    def inverse(self, v):
        if v.terms and set(v.terms) == {0}:
            return DiffOp({0: v.terms[0].inverse()})
        return None


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, message, expected=()):
        raise ExprSyntaxError(message, self.tok.pos, expected)

    def at(self, text) -> bool:
        return self.tok.kind in ("sym", "name") and self.tok.text == text

    def take(self, text) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}", (text,))
        t = self.tok
        self.i += 1
        return t

    def take_int(self) -> int:
        sign = 1
        if self.at("-"):
            self.i += 1
            sign = -1
        if self.tok.kind != "num":
            self.error("expected an integer", ("integer",))
        v = int(self.tok.text)
        self.i += 1
        return sign * v

    def finish(self):
        if self.tok.kind != "end":
            self.error(f"unexpected {self.tok.text!r}", ("end of input",))

    # arithmetic: sum > product > unary minus > power > primary

    def arith(self, ring):
        v = self.arith_term(ring)
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.i += 1
            w = self.arith_term(ring)
            v = v + w if op == "+" else v - w
        return v

    def arith_term(self, ring):
        v = self.arith_unary(ring)
        while self.at("*") or self.at("/"):
            op = self.tok.text
            pos = self.tok.pos
            self.i += 1
            w = self.arith_unary(ring)
            if op == "*":
                v = v * w
            else:
                inv = self._invert(ring, w, pos)
                v = v * inv
        return v

    def _invert(self, ring, w, pos):
        try:
            inv = ring.inverse(w)
        except ZeroDivisionError:
            raise ExprSyntaxError("division by zero", pos) from None
        if inv is None:
            raise ExprSyntaxError("can only divide by a coefficient", pos)
        return inv

    def arith_unary(self, ring):
        if self.at("-"):
            self.i += 1
            return -self.arith_unary(ring)
        if self.at("+"):
            self.i += 1
            return self.arith_unary(ring)
        return self.arith_power(ring)

    def arith_power(self, ring):
        base = self.arith_primary(ring)
        if self.at("^"):
            pos = self.tok.pos
            self.i += 1
            k = self.take_int()
            if k < 0:
                base = self._invert(ring, base, pos)
                k = -k
            out = ring.const(1)
            for _ in range(k):
                out = out * base
            return out
        return base

    def arith_primary(self, ring):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return ring.const(int(t.text))
        if t.kind == "name":
            v = ring.symbol(t.text)
            if v is None:
                self.error(f"unknown symbol {t.text!r}", ("number", "variable", "("))
            self.i += 1
            return v
        if self.at("("):
            self.i += 1
            v = self.arith(ring)
            self.take(")")
            return v
        self.error("expected a number, a variable or '('", ("number", "variable", "("))

    # small helpers for sequence arguments

    def ratfun(self) -> RatFun:
        return self.arith(_RatRing("n"))

    def rational(self) -> Fraction:
        start = self.tok.pos
        v = self.arith(_RatRing(None))
        if not v.is_const():
            raise ExprSyntaxError("expected a rational constant", start)
        return v.const_value()

    def poly(self) -> Poly:
        start = self.tok.pos
        v = self.ratfun()
        if not v.is_poly():
            raise ExprSyntaxError("expected a polynomial in n", start)
        return v.num

    def values(self, closer=")") -> tuple:
        out = []
        if self.at(closer):
            return ()
        out.append(self.rational())
        while self.at(","):
            self.i += 1
            out.append(self.rational())
        return tuple(out)

    # sequence expressions

    def seq(self) -> SeqExpr:
        parts = [self.seq_term(1)]
        while self.at("+") or self.at("-"):
            sign = 1 if self.tok.text == "+" else -1
            self.i += 1
            parts.append(self.seq_term(sign))
        if len(parts) == 1 and parts[0][0] == 1:
            return parts[0][1]
        return LinComb(tuple(c for c, _ in parts), tuple(e for _, e in parts))

    def seq_term(self, sign):
        while self.at("-"):
            self.i += 1
            sign = -sign
        if self.tok.kind == "num":
            c = Fraction(self.take_int())
            if self.at("/"):
                self.i += 1
                pos = self.tok.pos
                d = self.take_int()
                if d == 0:
                    raise ExprSyntaxError("division by zero", pos)
                c /= d
            if self.at("*"):
                self.i += 1
                c2, e = self.seq_term(1)
                return sign * c * c2, e
            if c == 0:
                return Fraction(1), LinComb((), ())
            return Fraction(sign), RationalSeq(RatFun.const(c))
        return Fraction(sign), self.seq_primary()

    def seq_primary(self) -> SeqExpr:
        if self.at("("):
            self.i += 1
            e = self.seq()
            self.take(")")
            return e
        t = self.tok
        if t.kind != "name" or t.text not in _SEQ_FORMS:
            self.error("expected a sequence expression", tuple(_SEQ_FORMS) + ("number", "("))
        self.i += 1
        if t.text == "delta":
            return Delta()
        self.take("(")
        e = getattr(self, "_f_" + t.text)()
        self.take(")")
        return e

    def _int_arg(self) -> int:
        self.take(",")
        return self.take_int()

    def _f_hyper(self):
        p = self.poly()
        self.take(";")
        q = self.poly()
        self.take(";")
        return Hypergeom(p, q, self.values())

    def _f_rat(self):
        r = self.ratfun()
        prefix = ()
        if self.at(";"):
            self.i += 1
            prefix = self.values()
        return RationalSeq(r, prefix)

    def _f_quasi(self):
        alpha = self.rational()
        form = PolyPower(0)
        if self.at(";"):
            self.i += 1
            if self.at("pow"):
                self.i += 1
                form = PolyPower(self.take_int())
            elif self.at("pole"):
                self.i += 1
                beta = self.rational()
                form = PolePower(beta, self.take_int())
            else:
                self.error("expected 'pow' or 'pole'", ("pow", "pole"))
        return QuasiAtom(alpha, form)

    def _f_fin(self):
        return FinSupport(self.values())

    def _f_nsum(self):
        factors = [self.seq()]
        while self.at(","):
            self.i += 1
            factors.append(self.seq())
        offsets = ()
        if self.at(";"):
            self.i += 1
            offsets = [self.take_int()]
            while self.at(","):
                self.i += 1
                offsets.append(self.take_int())
        try:
            return NestedSum(tuple(factors), tuple(offsets))
        except ValueError as exc:
            self.error(str(exc))

    def _f_shift(self):
        e = self.seq()
        k = self._int_arg()
        if k < 0:
            self.error("shift amount must be nonnegative")
        return Shift(e, k)

    def _f_ishift(self):
        e = self.seq()
        self.take(",")
        return InvShift(e, self.rational())

    def _f_psum(self):
        return PartialSum(self.seq())

    def _pair(self):
        a = self.seq()
        self.take(",")
        return a, self.seq()

    def _f_had(self):
        return Product(*self._pair())

    def _f_conv(self):
        return Conv(*self._pair())

    def _f_interlace(self):
        parts = [self.seq()]
        while self.at(","):
            self.i += 1
            parts.append(self.seq())
        return Interlace(tuple(parts))

    def _f_lam(self):
        e = self.seq()
        m = self._int_arg()
        if m < 1:
            self.error("interlacing factor must be positive")
        return ZeroInterlace(e, m)

    def _f_msect(self):
        e = self.seq()
        m = self._int_arg()
        r = self._int_arg()
        try:
            return Multisect(e, m, r)
        except ValueError as exc:
            self.error(str(exc))


_SEQ_FORMS = (
    "hyper", "rat", "quasi", "delta", "fin", "nsum", "shift", "ishift",
    "psum", "had", "conv", "interlace", "lam", "msect",
)


def parse_ratfun(text: str, var: str = "n") -> RatFun:
    p = _Parser(text)
    v = p.arith(_RatRing(var))
    p.finish()
    return v


def parse_operator(text: str):
    """A ShiftOp (symbols n, E) or a DiffOp (symbols x, D)."""
    p = _Parser(text)
    names = {t.text for t in p.toks if t.kind == "name"}
    if names & {"x", "D"} and names & {"n", "E"}:
        raise ExprSyntaxError("cannot mix n/E with x/D", 0)
    ring = _DiffRing() if names & {"x", "D"} else _ShiftRing()
    v = p.arith(ring)
    p.finish()
    return v


def parse_seq_expr(text: str) -> SeqExpr:
    p = _Parser(text)
    e = p.seq()
    p.finish()
    return e


# ---------------------------------------------------------------------------
# printing


def rat_str(c) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _vals(values) -> str:
    return ", ".join(rat_str(v) for v in values)


def seq_to_str(e: SeqExpr) -> str:
    if isinstance(e, Hypergeom):
        return f"hyper({e.p.to_str('n')}; {e.q.to_str('n')}; {_vals(e.initial)})"
    if isinstance(e, RationalSeq):
        if e.prefix:
            return f"rat({e.r.to_str('n')}; {_vals(e.prefix)})"
        return f"rat({e.r.to_str('n')})"
    if isinstance(e, QuasiAtom):
        if isinstance(e.form, PolyPower):
            tail = f"; pow {e.form.j}" if e.form.j else ""
        else:
            tail = f"; pole {rat_str(e.form.beta)} {e.form.j}"
        return f"quasi({rat_str(e.alpha)}{tail})"
    if isinstance(e, Delta):
        return "delta"
    if isinstance(e, FinSupport):
        return f"fin({_vals(e.values)})"
    if isinstance(e, NestedSum):
        inner = ", ".join(seq_to_str(f) for f in e.factors)
        if any(e.offsets):
            inner += "; " + ", ".join(str(o) for o in e.offsets)
        return f"nsum({inner})"
    if isinstance(e, LinComb):
        if not e.terms:
            return "0"
        out = []
        for i, (c, t) in enumerate(zip(e.coeffs, e.terms)):
            body = seq_to_str(t)
            if isinstance(t, LinComb):
                body = f"({body})"
            mag = abs(c)
            if mag != 1:
                body = f"{rat_str(mag)}*{body}"
            if i == 0:
                out.append(f"-{body}" if c < 0 else body)
            else:
                out.append(f" - {body}" if c < 0 else f" + {body}")
        return "".join(out)
    if isinstance(e, Shift):
        return f"shift({seq_to_str(e.inner)}, {e.k})"
    if isinstance(e, InvShift):
        return f"ishift({seq_to_str(e.inner)}, {rat_str(e.lam)})"
    if isinstance(e, PartialSum):
        return f"psum({seq_to_str(e.inner)})"
    if isinstance(e, Product):
        return f"had({seq_to_str(e.left)}, {seq_to_str(e.right)})"
    if isinstance(e, Conv):
        return f"conv({seq_to_str(e.left)}, {seq_to_str(e.right)})"
    if isinstance(e, Interlace):
        return f"interlace({', '.join(seq_to_str(p) for p in e.parts)})"
    if isinstance(e, ZeroInterlace):
        return f"lam({seq_to_str(e.inner)}, {e.m})"
    if isinstance(e, Multisect):
        return f"msect({seq_to_str(e.inner)}, {e.m}, {e.r})"
    raise TypeError(f"cannot print {type(e).__name__}")
