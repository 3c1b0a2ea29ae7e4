"""Sufficient conditions for strict convexity of the Hamiltonian in the effort.

Four conditions are checked pointwise on a 1001-point grid of the
self-protection effort (endpoints included):

(i)   the pre-control intensity is bounded by some finite Lambda > 0;
(ii)  c1'' >= 0, gamma'' > 0 on [0, zeta1] and c2'' >= 0 on [0, 1];
(iii) gamma'' gamma >= (gamma')^2 (log-convexity);
(iv)  gamma'' <= (eta / Lambda) c1''.

They only apply with the linear self-insurance impact 1 - u on [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from prevopt.prevention.curves import LinearImpact
from prevopt.prevention.spec import CHECK_GRID, PreventionSpec, effort_grid

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "not_applicable"

# relative slack for the equality cases (log-convexity of e^{-alpha u} is tight)
_REL_TOL = 1e-9


@dataclass(frozen=True)
class ConditionVerdict:
    status: str
    first_violation: Optional[float] = None
    detail: str = ""

    @property
    def passed(self):
        return self.status == PASS


@dataclass(frozen=True)
class ConvexityReport:
    conditions: dict = field(default_factory=dict)
    status: str = PASS
    reason: str = ""

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self):
        return {
            "status": self.status,
            "reason": self.reason,
            "conditions": {
                k: {"status": v.status, "first_violation": v.first_violation, "detail": v.detail}
                for k, v in self.conditions.items()
            },
        }


def _first(mask, grid):
    idx = np.flatnonzero(mask)
    return float(grid[idx[0]]) if idx.size else None


def _verdict(bad, grid, detail):
    u = _first(bad, grid)
    if u is None:
        return ConditionVerdict(PASS, None, detail)
    return ConditionVerdict(FAIL, u, detail)


def linear_self_insurance(spec: PreventionSpec) -> bool:
    """True when gamma2(u) = 1 - u on [0, 1]."""
    if spec.zeta2 != 1.0:
        return False
    if isinstance(spec.impact2, LinearImpact):
        return True
    g = effort_grid(1.0, 101)
    return bool(np.allclose(spec.impact2(g), 1.0 - g, rtol=0, atol=1e-12))


def check_convexity_conditions(spec: PreventionSpec, bound: float) -> ConvexityReport:
    if not linear_self_insurance(spec):
        return ConvexityReport(
            {}, NOT_APPLICABLE, "conditions are stated for gamma2(u) = 1 - u with zeta2 = 1"
        )
    g1 = effort_grid(spec.zeta1, CHECK_GRID)
    g2 = effort_grid(1.0, CHECK_GRID)
    gam, d1, d2 = spec.impact1(g1), spec.impact1.d1(g1), spec.impact1.d2(g1)
    c1pp = spec.cost1.d2(g1)
    c2pp = spec.cost2.d2(g2)

    out = {}
    if math.isfinite(bound) and bound > 0:
        out["bounded_intensity"] = ConditionVerdict(PASS, None, f"Lambda={bound!r}")
    else:
        out["bounded_intensity"] = ConditionVerdict(FAIL, None, f"Lambda={bound!r}")

    bad_c1 = c1pp < -_REL_TOL * np.maximum(1.0, np.abs(c1pp))
    bad_g = ~(d2 > 0)
    bad_c2 = c2pp < -_REL_TOL * np.maximum(1.0, np.abs(c2pp))
    first = [u for u in (_first(bad_c1, g1), _first(bad_g, g1)) if u is not None]
    if first or bad_c2.any():
        where = min(first) if first else _first(bad_c2, g2)
        out["convexity"] = ConditionVerdict(FAIL, where, "c1'' >= 0, gamma'' > 0, c2'' >= 0")
    else:
        out["convexity"] = ConditionVerdict(PASS, None, "c1'' >= 0, gamma'' > 0, c2'' >= 0")

    lhs, rhs = d2 * gam, d1**2
    out["log_convexity"] = _verdict(
        lhs < rhs - _REL_TOL * np.maximum(np.abs(lhs), np.abs(rhs)), g1, "gamma'' gamma >= gamma'^2"
    )

    if out["bounded_intensity"].passed:
        cap = (spec.eta / bound) * c1pp
        out["curvature_bound"] = _verdict(
            d2 > cap + _REL_TOL * np.maximum(np.abs(d2), np.abs(cap)), g1,
            "gamma'' <= (eta / Lambda) c1''",
        )
    else:
        out["curvature_bound"] = ConditionVerdict(FAIL, None, "requires a finite intensity bound")

    status = PASS if all(v.passed for v in out.values()) else FAIL
    return ConvexityReport(out, status, "")
