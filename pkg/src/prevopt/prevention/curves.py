"""Impact and cost function families.

Built-in families carry analytic first and second derivatives.  Tabulated and
user-supplied curves fall back to central finite differences with step
``1e-5 * zeta`` (one-sided at the ends of the effort interval).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from prevopt.errors import PreconditionError


def _arr(u):
    return np.asarray(u, dtype=float)


class Curve:
    """A scalar function of effort with first and second derivatives."""

    name = "curve"
    analytic = True

    def __call__(self, u):
        raise NotImplementedError

    def d1(self, u):
        raise NotImplementedError

    def d2(self, u):
        raise NotImplementedError

    def params(self) -> dict:
        return {}

    def describe(self) -> dict:
        return {"kind": self.name, **self.params()}


# -- impact functions ----------------------------------------------------------


@dataclass(frozen=True)
class ExpImpact(Curve):
    """gamma(u) = exp(-alpha u)."""

    alpha: float
    name = "exp"

    def __call__(self, u):
        return np.exp(-self.alpha * _arr(u))

    def d1(self, u):
        return -self.alpha * np.exp(-self.alpha * _arr(u))

    def d2(self, u):
        return self.alpha**2 * np.exp(-self.alpha * _arr(u))

    def params(self):
        return {"alpha": self.alpha}


@dataclass(frozen=True)
class InverseImpact(Curve):
    """gamma(u) = 1 / (1 + k u)."""

    k: float = 1.0
    name = "inverse"

    def __call__(self, u):
        return 1.0 / (1.0 + self.k * _arr(u))

    def d1(self, u):
        return -self.k / (1.0 + self.k * _arr(u)) ** 2

    def d2(self, u):
        return 2.0 * self.k**2 / (1.0 + self.k * _arr(u)) ** 3

    def params(self):
        return {"k": self.k}


@dataclass(frozen=True)
class LinearImpact(Curve):
    """gamma(u) = 1 - u, the linear self-insurance impact on [0, 1]."""

    name = "linear"

    def __call__(self, u):
        return 1.0 - _arr(u)

    def d1(self, u):
        return np.full_like(_arr(u), -1.0)

    def d2(self, u):
        return np.zeros_like(_arr(u))


@dataclass(frozen=True)
class NoImpact(Curve):
    """gamma(u) = 1: effort has no effect."""

    name = "none"

    def __call__(self, u):
        return np.ones_like(_arr(u))

    def d1(self, u):
        return np.zeros_like(_arr(u))

    def d2(self, u):
        return np.zeros_like(_arr(u))


# -- cost functions --------------------------------------------------------------


@dataclass(frozen=True)
class QuadraticCost(Curve):
    """c(u) = scale * u^2."""

    scale: float = 1.0
    name = "quadratic"

    def __call__(self, u):
        return self.scale * _arr(u) ** 2

    def d1(self, u):
        return 2.0 * self.scale * _arr(u)

    def d2(self, u):
        return np.full_like(_arr(u), 2.0 * self.scale)

    def params(self):
        return {"scale": self.scale}


@dataclass(frozen=True)
class ShiftedQuadraticCost(Curve):
    """c(u) = scale * ((1 + u)^2 - 1)."""

    scale: float = 1.0
    name = "shifted_quadratic"

    def __call__(self, u):
        u = _arr(u)
        return self.scale * (u * (2.0 + u))

    def d1(self, u):
        return 2.0 * self.scale * (1.0 + _arr(u))

    def d2(self, u):
        return np.full_like(_arr(u), 2.0 * self.scale)

    def params(self):
        return {"scale": self.scale}


@dataclass(frozen=True)
class LinearCost(Curve):
    """c(u) = scale * u."""

    scale: float = 1.0
    name = "linear_cost"

    def __call__(self, u):
        return self.scale * _arr(u)

    def d1(self, u):
        return np.full_like(_arr(u), self.scale)

    def d2(self, u):
        return np.zeros_like(_arr(u))

    def params(self):
        return {"scale": self.scale}


@dataclass(frozen=True)
class ZeroCost(Curve):
    name = "zero"

    def __call__(self, u):
        return np.zeros_like(_arr(u))

    def d1(self, u):
        return np.zeros_like(_arr(u))

    def d2(self, u):
        return np.zeros_like(_arr(u))


# -- numerically differentiated curves -------------------------------------------


class _FiniteDifference(Curve):
    analytic = False

    def __init__(self, fn: Callable, zeta: float, name: str):
        if not zeta > 0:
            raise PreconditionError("effort bound must be positive")
        self._fn = fn
        self.zeta = float(zeta)
        self.name = name
        self.step = 1e-5 * self.zeta

    def __call__(self, u):
        return np.asarray(self._fn(_arr(u)), dtype=float)

    def _stencil(self, u):
        # shift the stencil inward at the ends of [0, zeta]
        u = _arr(u)
        h = self.step
        return np.clip(u, h, self.zeta - h), h

    def d1(self, u):
        c, h = self._stencil(u)
        u = _arr(u)
        f0, fp, fm = self(c), self(c + h), self(c - h)
        f2 = (fp - 2 * f0 + fm) / h**2
        return (fp - fm) / (2 * h) + (u - c) * f2

    def d2(self, u):
        c, h = self._stencil(u)
        return (self(c + h) - 2 * self(c) + self(c - h)) / h**2


class TabulatedCurve(_FiniteDifference):
    """Cubic-spline interpolant of tabulated values on [0, zeta]."""

    def __init__(self, grid, values, name="tabulated"):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 4:
            raise PreconditionError("tabulated curve needs matching 1-D grid and values (>= 4 points)")
        if grid[0] != 0 or np.any(np.diff(grid) <= 0):
            raise PreconditionError("tabulation grid must start at 0 and increase strictly")
        self.grid = grid
        self.values = values
        spline = CubicSpline(grid, values)
        super().__init__(spline, grid[-1], name)

    def describe(self):
        return {"kind": self.name, "grid": self.grid.tolist(), "values": self.values.tolist()}


class CallableCurve(_FiniteDifference):
    def __init__(self, fn, zeta, name="callable"):
        super().__init__(fn, zeta, name)


IMPACTS = {"exp": ExpImpact, "inverse": InverseImpact, "linear": LinearImpact, "none": NoImpact}
COSTS = {
    "quadratic": QuadraticCost,
    "shifted_quadratic": ShiftedQuadraticCost,
    "linear": LinearCost,
    "zero": ZeroCost,
}


def make_impact(kind: str, **params) -> Curve:
    try:
        return IMPACTS[kind](**params)
    except KeyError:
        raise PreconditionError(f"unknown impact family {kind!r}; choose from {sorted(IMPACTS)}")


def make_cost(kind: str, **params) -> Curve:
    try:
        return COSTS[kind](**params)
    except KeyError:
        raise PreconditionError(f"unknown cost family {kind!r}; choose from {sorted(COSTS)}")
