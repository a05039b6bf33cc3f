"""Controllability certification toolkit for affine control systems with
constrained controls. Thin python layer over the C++ core."""

from _ccert import (  # noqa: F401
    ControlSet,
    System,
    area_property_test,
    bonnard_check,
    bracket_family,
    builtin_names,
    check_obstruction,
    check_sufficient,
    cone_full,
    diff_expr,
    eval_expr,
    flow_endpoint,
    goldfish,
    lie_bracket,
    mc_reach,
    period,
    polar_interior,
    pushforward,
    sample_E,
    span_consistency,
    span_rank,
    validate,
)

__version__ = "0.1.0"
