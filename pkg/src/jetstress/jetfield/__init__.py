"""Truncated Taylor arithmetic, smooth maps and jet points."""
from .series import TruncatedSeries, series_add, series_compose, series_mul, series_scale, variables
from .maps import (
    ComposedMap,
    ConstantMap,
    ExprMap,
    FuncMap,
    LinearDiffMap,
    NotPolynomial,
    PolyMap,
    Polynomial,
    SmoothMap,
    StackMap,
    eval_expr,
    linear_diff,
    map_from_json,
)
from .jets import (
    JetExtensionMap,
    JetPoint,
    NonHolJetPoint,
    holonomic_defect,
    include_holonomic,
    is_holonomic,
    prolong,
    prolong_batch,
    prolong_section_of_jets,
)

__all__ = [
    "TruncatedSeries",
    "series_add",
    "series_compose",
    "series_mul",
    "series_scale",
    "variables",
    "ComposedMap",
    "ConstantMap",
    "ExprMap",
    "FuncMap",
    "LinearDiffMap",
    "NotPolynomial",
    "PolyMap",
    "Polynomial",
    "SmoothMap",
    "StackMap",
    "eval_expr",
    "linear_diff",
    "map_from_json",
    "JetExtensionMap",
    "JetPoint",
    "NonHolJetPoint",
    "holonomic_defect",
    "include_holonomic",
    "is_holonomic",
    "prolong",
    "prolong_batch",
    "prolong_section_of_jets",
]
