"""Exact convolution of d'Alembertian and Liouvillian sequences with
(quasi-)rationally d'Alembertian and Liouvillian ones."""

from .closure import AnnihilatedSeq, conv_annihilator_via_gf, op_unary
from .conv import (
    ConvResult,
    FactoredAnnihilator,
    conv_dalembert,
    conv_liouvillian,
    conv_liouvillian_parts,
    solve_first_order,
    theorem_main_step,
    unshift_conv,
)
from .errors import (
    ExprSyntaxError,
    NotDAlembertian,
    NotRationallyDAlembertian,
    OrderTooSmall,
    SeqConvError,
)
from .exact import Poly, RatFun
from .hyperexp import HyperExpRate, hyperexp_factor, reduce_padded
from .ore import DiffOp, ShiftOp, iso_R, iso_Rinv, lclm
from .parsing import parse_operator, parse_ratfun, parse_seq_expr, seq_to_str
from .seqrep import Conv, Evaluator, evaluate, terms

__all__ = [
    "AnnihilatedSeq",
    "Conv",
    "ConvResult",
    "DiffOp",
    "Evaluator",
    "ExprSyntaxError",
    "FactoredAnnihilator",
    "HyperExpRate",
    "NotDAlembertian",
    "NotRationallyDAlembertian",
    "OrderTooSmall",
    "Poly",
    "RatFun",
    "SeqConvError",
    "ShiftOp",
    "conv_annihilator_via_gf",
    "conv_dalembert",
    "conv_liouvillian",
    "conv_liouvillian_parts",
    "evaluate",
    "hyperexp_factor",
    "iso_R",
    "iso_Rinv",
    "lclm",
    "op_unary",
    "parse_operator",
    "parse_ratfun",
    "parse_seq_expr",
    "reduce_padded",
    "seq_to_str",
    "solve_first_order",
    "terms",
    "theorem_main_step",
    "unshift_conv",
]
