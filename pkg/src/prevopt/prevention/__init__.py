"""Effort sets and curves, plus the strategy types built on them."""

from prevopt.prevention.convexity import (
    ConditionVerdict,
    ConvexityReport,
    check_convexity_conditions,
    linear_self_insurance,
)
from prevopt.prevention.curves import (
    CallableCurve,
    Curve,
    ExpImpact,
    InverseImpact,
    LinearCost,
    LinearImpact,
    NoImpact,
    QuadraticCost,
    ShiftedQuadraticCost,
    TabulatedCurve,
    ZeroCost,
    make_cost,
    make_impact,
)
from prevopt.prevention.spec import Effort, PreventionSpec, effort_grid, validate_spec
from prevopt.prevention.strategies import (
    NULL_STRATEGY,
    CallableStrategy,
    ConstantStrategy,
    FieldStrategy,
    Strategy,
    TableStrategy,
    clipped_effort,
)

__all__ = [
    "CallableCurve",
    "CallableStrategy",
    "ConditionVerdict",
    "ConstantStrategy",
    "ConvexityReport",
    "Curve",
    "Effort",
    "ExpImpact",
    "FieldStrategy",
    "InverseImpact",
    "LinearCost",
    "LinearImpact",
    "NULL_STRATEGY",
    "NoImpact",
    "PreventionSpec",
    "QuadraticCost",
    "ShiftedQuadraticCost",
    "Strategy",
    "TableStrategy",
    "TabulatedCurve",
    "ZeroCost",
    "check_convexity_conditions",
    "clipped_effort",
    "effort_grid",
    "linear_self_insurance",
    "make_cost",
    "make_impact",
    "validate_spec",
]
