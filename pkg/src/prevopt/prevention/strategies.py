"""Markovian effort strategies u(t, y).

``y`` is the pre-control intensity value just before ``t``; constant-intensity
strategies ignore it.  All strategies are evaluated vectorised and clip their
output to the effort box of the spec they are used with.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from prevopt.errors import PreconditionError


class Strategy:
    kind = "abstract"
    #: True when the effort depends on time only
    time_only = True

    def effort(self, t, y=None):
        """Return (u1, u2) arrays broadcast against t (and y)."""
        raise NotImplementedError

    def breakpoints(self) -> Optional[np.ndarray]:
        """Times where a piecewise-constant strategy may change value (None if not piecewise)."""
        return None

    def stored_values(self):
        """Stored effort values (u1, u2) used for bound validation, or None."""
        return None

    def check(self, spec) -> "Strategy":
        vals = self.stored_values()
        if vals is not None:
            u1, u2 = (np.asarray(v, dtype=float) for v in vals)
            tol = 1e-12
            if (
                np.any(u1 < -tol)
                or np.any(u1 > spec.zeta1 + tol)
                or np.any(u2 < -tol)
                or np.any(u2 > spec.zeta2 + tol)
            ):
                raise PreconditionError("strategy values fall outside the effort box")
        return self

    def describe(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class ConstantStrategy(Strategy):
    u1: float = 0.0
    u2: float = 0.0
    kind = "constant"

    def effort(self, t, y=None):
        t = np.asarray(t, dtype=float)
        return np.full(t.shape, float(self.u1)), np.full(t.shape, float(self.u2))

    def breakpoints(self):
        return np.array([0.0])

    def stored_values(self):
        return (self.u1, self.u2)

    @property
    def is_null(self):
        return self.u1 == 0.0 and self.u2 == 0.0

    def describe(self):
        return {"kind": self.kind, "u1": self.u1, "u2": self.u2}


NULL_STRATEGY = ConstantStrategy(0.0, 0.0)


class TableStrategy(Strategy):
    """Piecewise-constant in time: value of the last node at or before t."""

    kind = "table"

    def __init__(self, times, u1, u2):
        times = np.asarray(times, dtype=float)
        u1 = np.asarray(u1, dtype=float)
        u2 = np.asarray(u2, dtype=float)
        if times.ndim != 1 or times.size == 0 or times.shape != u1.shape or u1.shape != u2.shape:
            raise PreconditionError("table strategy needs matching 1-D arrays")
        if times[0] != 0.0 or np.any(np.diff(times) <= 0):
            raise PreconditionError("table times must start at 0 and increase strictly")
        self.times = times
        self.u1 = u1
        self.u2 = u2

    def _index(self, t):
        return np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, self.times.size - 1)

    def effort(self, t, y=None):
        i = self._index(np.asarray(t, dtype=float))
        return self.u1[i], self.u2[i]

    def breakpoints(self):
        return self.times

    def stored_values(self):
        return (self.u1, self.u2)

    def describe(self):
        return {"kind": self.kind, "nodes": int(self.times.size)}


class FieldStrategy(Strategy):
    """u(t, y) on a grid: left node in t, linear interpolation in y (clamped)."""

    kind = "field"
    time_only = False

    def __init__(self, times, ys, u1, u2, label="markovian"):
        times = np.asarray(times, dtype=float)
        ys = np.asarray(ys, dtype=float)
        u1 = np.asarray(u1, dtype=float)
        u2 = np.asarray(u2, dtype=float)
        if u1.shape != (times.size, ys.size) or u2.shape != u1.shape:
            raise PreconditionError("field values must have shape (len(times), len(ys))")
        if times[0] != 0.0 or np.any(np.diff(times) <= 0):
            raise PreconditionError("field times must start at 0 and increase strictly")
        if np.any(np.diff(ys) <= 0):
            raise PreconditionError("field y-grid must increase strictly")
        self.times, self.ys, self.u1, self.u2 = times, ys, u1, u2
        self.label = label

    def effort(self, t, y=None):
        t = np.asarray(t, dtype=float)
        y = np.broadcast_to(np.asarray(y, dtype=float), t.shape)
        i = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, self.times.size - 1)
        if self.ys.size == 1:
            return self.u1[i, 0], self.u2[i, 0]
        j = np.clip(np.searchsorted(self.ys, y, side="right") - 1, 0, self.ys.size - 2)
        w = np.clip((y - self.ys[j]) / (self.ys[j + 1] - self.ys[j]), 0.0, 1.0)
        u1 = (1 - w) * self.u1[i, j] + w * self.u1[i, j + 1]
        u2 = (1 - w) * self.u2[i, j] + w * self.u2[i, j + 1]
        return u1, u2

    def breakpoints(self):
        return self.times

    def stored_values(self):
        return (self.u1, self.u2)

    def describe(self):
        return {
            "kind": self.kind,
            "label": self.label,
            "t_nodes": int(self.times.size),
            "y_nodes": int(self.ys.size),
        }


class CallableStrategy(Strategy):
    """Wraps a vectorised ``fn(t, y) -> (u1, u2)``."""

    kind = "callable"

    def __init__(self, fn: Callable, time_only=True, grid=None):
        self._fn = fn
        self.time_only = time_only
        self._grid = None if grid is None else np.asarray(grid, dtype=float)

    def effort(self, t, y=None):
        t = np.asarray(t, dtype=float)
        u1, u2 = self._fn(t, y)
        return (np.broadcast_to(np.asarray(u1, dtype=float), t.shape),
                np.broadcast_to(np.asarray(u2, dtype=float), t.shape))

    def breakpoints(self):
        return self._grid


def clipped_effort(strategy: Strategy, spec, t, y=None):
    u1, u2 = strategy.effort(t, y)
    return np.clip(u1, 0.0, spec.zeta1), np.clip(u2, 0.0, spec.zeta2)
