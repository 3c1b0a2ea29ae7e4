"""Prevention specification, effort values and the structural checks on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from prevopt.errors import PreconditionError
from prevopt.prevention.curves import Curve, ExpImpact, LinearImpact, QuadraticCost

#: points per effort interval used by the structural checks (endpoints included)
CHECK_GRID = 1001
_TOL = 1e-12


@dataclass(frozen=True)
class PreventionSpec:
    """Effort bounds and curves together with the agent's economics."""

    impact1: Curve = field(default_factory=lambda: ExpImpact(1.0))
    impact2: Curve = field(default_factory=LinearImpact)
    cost1: Curve = field(default_factory=QuadraticCost)
    cost2: Curve = field(default_factory=QuadraticCost)
    zeta1: float = 1.0
    zeta2: float = 1.0
    eta: float = 0.5
    r: float = 0.0
    T: float = 1.0
    x0: float = 1.0

    def __post_init__(self):
        if not (self.zeta1 > 0 and self.zeta2 > 0):
            raise PreconditionError("effort bounds zeta1, zeta2 must be positive")
        if not self.eta > 0:
            raise PreconditionError("risk aversion eta must be positive")
        if not self.r >= 0:
            raise PreconditionError("interest rate r must be nonnegative")
        if not self.T > 0:
            raise PreconditionError("horizon T must be positive")
        if not math.isfinite(self.x0):
            raise PreconditionError("initial wealth must be finite")

    def growth(self, t):
        """e^{r(T - t)}."""
        return np.exp(self.r * (self.T - np.asarray(t, dtype=float)))

    def risk_factor(self, t):
        """eta e^{r(T - t)}, the effective risk aversion at time t."""
        return self.eta * self.growth(t)

    @property
    def terminal_scale(self) -> float:
        """eta e^{rT}."""
        return self.eta * math.exp(self.r * self.T)

    def with_(self, **changes) -> "PreventionSpec":
        return replace(self, **changes)

    def describe(self) -> dict:
        return {
            "impact1": self.impact1.describe(),
            "impact2": self.impact2.describe(),
            "cost1": self.cost1.describe(),
            "cost2": self.cost2.describe(),
            "zeta1": self.zeta1,
            "zeta2": self.zeta2,
            "eta": self.eta,
            "r": self.r,
            "T": self.T,
            "x0": self.x0,
        }


@dataclass(frozen=True)
class Effort:
    u1: float
    u2: float

    def check(self, spec: PreventionSpec) -> "Effort":
        if not (0.0 <= self.u1 <= spec.zeta1 and 0.0 <= self.u2 <= spec.zeta2):
            raise PreconditionError(
                f"effort ({self.u1}, {self.u2}) outside [0, {spec.zeta1}] x [0, {spec.zeta2}]"
            )
        return self

    def as_tuple(self):
        return (self.u1, self.u2)


def effort_grid(zeta: float, n: int = CHECK_GRID) -> np.ndarray:
    g = np.linspace(0.0, zeta, n)
    g[-1] = zeta
    return g


def _first(mask, grid):
    idx = np.flatnonzero(mask)
    return float(grid[idx[0]]) if idx.size else None


def _impact_violations(label, fn, grid, strictly_positive):
    out = []
    v = np.asarray(fn(grid), dtype=float)
    if not np.all(np.isfinite(v)):
        out.append(f"{label} not finite (at u={_first(~np.isfinite(v), grid)})")
        return out
    if abs(v[0] - 1.0) > _TOL:
        out.append(f"{label}(0) = {v[0]!r} differs from 1")
    if np.any(v > 1.0 + _TOL):
        out.append(f"{label} exceeds 1 (at u={_first(v > 1.0 + _TOL, grid)})")
    if strictly_positive and np.any(v <= 0):
        out.append(f"{label} not strictly positive (at u={_first(v <= 0, grid)})")
    if not strictly_positive and np.any(v < -_TOL):
        out.append(f"{label} negative (at u={_first(v < -_TOL, grid)})")
    rises = np.diff(v) > _TOL * np.maximum(1.0, np.abs(v[:-1]))
    if np.any(rises):
        out.append(f"{label} not non-increasing (at u={_first(rises, grid[1:])})")
    return out


def _cost_violations(label, fn, grid):
    out = []
    v = np.asarray(fn(grid), dtype=float)
    if not np.all(np.isfinite(v)):
        out.append(f"{label} not finite (at u={_first(~np.isfinite(v), grid)})")
        return out
    if abs(v[0]) > _TOL:
        out.append(f"{label}(0) = {v[0]!r} differs from 0")
    if np.any(v < -_TOL):
        out.append(f"{label} negative (at u={_first(v < -_TOL, grid)})")
    falls = np.diff(v) < -_TOL * np.maximum(1.0, np.abs(v[:-1]))
    if np.any(falls):
        out.append(f"{label} not increasing (at u={_first(falls, grid[1:])})")
    return out


def validate_spec(spec: PreventionSpec) -> list[str]:
    """Return the list of violated structural requirements (empty if none).

    Impact functions must start at 1, stay in (0, 1] (first) or [0, 1]
    (second) and be non-increasing; costs must start at 0, be nonnegative and
    non-decreasing.  Everything is checked on a 1001-point grid per interval.
    """
    g1 = effort_grid(spec.zeta1)
    g2 = effort_grid(spec.zeta2)
    out = []
    out += _impact_violations("γ⁽¹⁾", spec.impact1, g1, strictly_positive=True)
    out += _impact_violations("γ⁽²⁾", spec.impact2, g2, strictly_positive=False)
    out += _cost_violations("c₁", spec.cost1, g1)
    out += _cost_violations("c₂", spec.cost2, g2)
    return out
