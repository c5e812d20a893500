"""Command-line front end: parse, compute, verify and report exactly."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

from .closure import conv_annihilator_via_gf
from .conv import FactoredAnnihilator, conv_dalembert, conv_liouvillian_parts, dal_of
from .errors import PoleAtIndex, SeqConvError, UndefinedTerm
from .hyperexp import hyperexp_steps, reduce_padded
from .ore import ShiftOp, lclm
from .parsing import parse_operator, parse_ratfun, parse_seq_expr, rat_str, seq_to_str
from .seqrep import Evaluator, Interlace, gseries

# ---------------------------------------------------------------------------
# commands


@dataclass(frozen=True)
class Eval:
    expr: str
    N: int = 10


@dataclass(frozen=True)
class GSeries:
    expr: str
    N: int = 10


@dataclass(frozen=True)
class Annihilate:
    exprA: str
    exprB: str


@dataclass(frozen=True)
class Convolve:
    exprA: str
    exprB: str
    wantRep: bool = False
    wantAnn: bool = False
    N: int = 10


@dataclass(frozen=True)
class HyperExpFactor:
    op: str
    rate: str
    reduce: bool = False


@dataclass(frozen=True)
class Verify:
    op: str
    expr: str
    start: int = 0
    stop: int = 30


@dataclass(frozen=True)
class Lclm:
    op1: str
    op2: str


@dataclass
class Report:
    status: str = "ok"  # ok | fail | error
    payload: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return {"ok": 0, "fail": 1}.get(self.status, 2)

    def to_text(self) -> str:
        lines = list(self.payload)
        lines.extend(f"note: {d}" for d in self.diagnostics if self.status == "ok")
        if self.status != "ok":
            lines.extend(f"{self.status}: {d}" for d in self.diagnostics)
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(
            {"status": self.status, "payload": self.payload, "diagnostics": self.diagnostics},
            indent=2,
        )


# ---------------------------------------------------------------------------
# execution


def _shift_op(text: str) -> ShiftOp:
    op = parse_operator(text)
    if not isinstance(op, ShiftOp):
        raise SeqConvError("expected a recurrence operator in n and E")
    return op


def _terms_line(values) -> str:
    return ", ".join(rat_str(v) for v in values)


def _convolve(cmd: Convolve) -> Report:
    a = parse_seq_expr(cmd.exprA)
    b = parse_seq_expr(cmd.exprB)
    rep = Report()
    if isinstance(a, Interlace) or isinstance(b, Interlace):
        parts = conv_liouvillian_parts(a, b)
        expr = parts[0][0] if len(parts) == 1 else Interlace(tuple(e for e, _ in parts))
        anns = [ann for _, ann in parts]
    else:
        res = conv_dalembert(a, b)
        expr, anns = res.expr, [res.annihilator]
    rep.payload.append("terms: " + _terms_line(Evaluator().terms(expr, cmd.N)))
    if cmd.wantRep:
        rep.payload.append("rep: " + seq_to_str(expr))
    if cmd.wantAnn:
        for i, ann in enumerate(anns):
            label = "ann" if len(anns) == 1 else f"ann[{i}]"
            rep.payload.append(f"{label}: {ann.to_str()}")
            rep.payload.append(f"{label} expanded: {ann.canonical().to_str()}")
    return rep


def _annihilate(cmd: Annihilate) -> Report:
    a = parse_seq_expr(cmd.exprA)
    b = parse_seq_expr(cmd.exprB)
    L1 = FactoredAnnihilator(dal_of(a).factors).canonical()
    L2 = FactoredAnnihilator(dal_of(b).factors).canonical()
    L = conv_annihilator_via_gf(L1, L2, a, b)
    return Report(payload=[f"ann: {L.to_str()}"])


def _hyperexp(cmd: HyperExpFactor) -> Report:
    steps = hyperexp_steps(_shift_op(cmd.op), parse_ratfun(cmd.rate, "x"))
    rep = Report(payload=[
        f"M: {steps.M.to_str()}",
        f"M': {steps.M_gauged.to_str()}",
        f"L': {steps.result.to_str()}",
    ])
    if cmd.reduce:
        red = reduce_padded(steps.result)
        rep.payload.append(f"E-power: {red.e_power}")
        rep.payload.append(f"content: {red.content.to_str('n')}")
        rep.payload.append(f"reduced: {red.operator.to_str()}")
        if red.affected:
            rep.diagnostics.append("cancellation affects n = " + ", ".join(map(str, red.affected)))
        if red.singular:
            rep.diagnostics.append(
                "reduced leading coefficient vanishes at n = " + ", ".join(map(str, red.singular)))
    return rep


def _verify(cmd: Verify) -> Report:
    L = _shift_op(cmd.op).normalized_support()
    e = parse_seq_expr(cmd.expr)
    ev = Evaluator()
    for n in range(cmd.start, cmd.stop + 1):
        try:
            lhs = L.apply(lambda k: ev.value(e, k), n)
        except (PoleAtIndex, UndefinedTerm, ZeroDivisionError) as exc:
            return Report("fail", [f"FAIL at n = {n}"], [f"undefined at n = {n}: {exc}"])
        if lhs != 0:
            return Report(
                "fail",
                [f"FAIL at n = {n}"],
                [f"first violation at n = {n}: lhs = {rat_str(lhs)}, rhs = 0"],
            )
    return Report(payload=[f"PASS for n = {cmd.start}..{cmd.stop}"])


def run(cmd) -> Report:
    """Dispatch one command; library errors become error reports."""
    try:
        if isinstance(cmd, Eval):
            vals = Evaluator().terms(parse_seq_expr(cmd.expr), cmd.N)
            return Report(payload=[_terms_line(vals)])
        if isinstance(cmd, GSeries):
            s = gseries(parse_seq_expr(cmd.expr), cmd.N)
            return Report(payload=[_terms_line(s.coeffs[: cmd.N]) + f" + O(x^{cmd.N})"])
        if isinstance(cmd, Convolve):
            return _convolve(cmd)
        if isinstance(cmd, Annihilate):
            return _annihilate(cmd)
        if isinstance(cmd, HyperExpFactor):
            return _hyperexp(cmd)
        if isinstance(cmd, Verify):
            if cmd.start > cmd.stop:
                return Report("error", [], ["--from must not exceed --to"])
            return _verify(cmd)
        if isinstance(cmd, Lclm):
            L = lclm(_shift_op(cmd.op1), _shift_op(cmd.op2)).canonical()
            return Report(payload=[L.to_str()])
        raise TypeError(f"unknown command {cmd!r}")
    except (SeqConvError, ArithmeticError, ValueError) as exc:
        return Report("error", [], [f"{type(exc).__name__}: {exc}"])


# ---------------------------------------------------------------------------
# argument parsing


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="seqconv", description="Exact sequence convolution tools.")
    ap.add_argument("--json", action="store_true", help="machine-readable report")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="first terms of a sequence expression")
    p.add_argument("expr")
    p.add_argument("--terms", type=_nonneg, default=10)

    p = sub.add_parser("gseries", help="truncated generating series")
    p.add_argument("expr")
    p.add_argument("--terms", type=_nonneg, default=10)

    p = sub.add_parser("convolve", help="convolution with representation and annihilator")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--terms", type=_nonneg, default=10)
    p.add_argument("--rep", action="store_true", help="print the nested-sum representation")
    p.add_argument("--ann", action="store_true", help="print the factored annihilator")

    p = sub.add_parser("annihilate", help="annihilator of a*b via generating series")
    p.add_argument("a")
    p.add_argument("b")

    p = sub.add_parser("lclm", help="least common left multiple of two recurrence operators")
    p.add_argument("op1")
    p.add_argument("op2")

    p = sub.add_parser("hyperexpfactor", help="convolution factor operator for a hyperexponential rate")
    p.add_argument("--op", required=True)
    p.add_argument("--rate", required=True)
    p.add_argument("--reduce", action="store_true")

    p = sub.add_parser("verify", help="check that an operator annihilates a sequence termwise")
    p.add_argument("--op", required=True)
    p.add_argument("--expr", required=True)
    p.add_argument("--from", dest="start", type=_nonneg, default=0)
    p.add_argument("--to", dest="stop", type=_nonneg, default=30)

    for sp in sub.choices.values():
        sp.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="machine-readable report")
    return ap


def to_command(ns: argparse.Namespace):
    c = ns.command
    if c == "eval":
        return Eval(ns.expr, ns.terms)
    if c == "gseries":
        return GSeries(ns.expr, ns.terms)
    if c == "convolve":
        return Convolve(ns.a, ns.b, ns.rep, ns.ann, ns.terms)
    if c == "annihilate":
        return Annihilate(ns.a, ns.b)
    if c == "lclm":
        return Lclm(ns.op1, ns.op2)
    if c == "hyperexpfactor":
        return HyperExpFactor(ns.op, ns.rate, ns.reduce)
    return Verify(ns.op, ns.expr, ns.start, ns.stop)


def main(argv=None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    report = run(to_command(ns))
    out = report.to_json() if ns.json else report.to_text()
    stream = sys.stdout if report.status != "error" or ns.json else sys.stderr
    print(out, file=stream)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
