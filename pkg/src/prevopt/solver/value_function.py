"""Value function for a constant pre-control intensity.

    phi(t) = exp( int_t^T inf_u psi^u(s) ds ),   v = exp(-eta x0 e^{rT}) phi(0)

inf psi is evaluated at the nodes of a uniform grid and integrated backward
with composite Simpson's rule; nodes at odd distance from T get the
three-point rule over one panel.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from prevopt.errors import DivergentMGF, PreconditionError
from prevopt.prevention.spec import PreventionSpec
from prevopt.prevention.strategies import TableStrategy
from prevopt.solver.hamiltonian import (
    DEFAULT_GRID,
    FOC_NEWTON,
    GRID,
    HamiltonianInputs,
    foc_applicable,
    grid_minimum_batch,
    minimize_psi,
)

DEFAULT_M = 512
CSV_COLUMNS = ("t", "phi", "u1_star", "u2_star", "psi_star")


def backward_simpson(f: np.ndarray, h: float) -> np.ndarray:
    """I[j] = integral from t_j to t_M of f on a uniform grid with even M."""
    M = f.size - 1
    if M < 2 or M % 2:
        raise PreconditionError("Simpson integration needs an even number of intervals")
    out = np.zeros(M + 1)
    panel = h / 3.0 * (f[:-2:2] + 4.0 * f[1:-1:2] + f[2::2])
    out[0:-1:2] = np.cumsum(panel[::-1])[::-1]
    # odd nodes: I[j] = I[j+1] + int_{t_j}^{t_{j+1}} using f[j-1], f[j], f[j+1]
    j = np.arange(1, M, 2)
    out[j] = out[j + 1] + h / 12.0 * (-f[j - 1] + 8.0 * f[j] + 5.0 * f[j + 1])
    return out


@dataclass(frozen=True)
class ValueFunctionTable:
    t: np.ndarray
    phi: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    psi_star: np.ndarray
    spec: PreventionSpec = field(repr=False)
    intensity: float = 1.0
    rule: str = "simpson"
    method: str = GRID

    @property
    def step(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def phi0(self) -> float:
        return float(self.phi[0])

    @property
    def value(self) -> float:
        """v = exp(-eta x0 e^{rT}) phi(0)."""
        s = self.spec
        return math.exp(-s.eta * s.x0 * math.exp(s.r * s.T)) * self.phi0

    def strategy(self) -> TableStrategy:
        """Piecewise-constant strategy holding u*(t_j) on [t_j, t_{j+1})."""
        return TableStrategy(self.t[:-1], self.u1[:-1], self.u2[:-1])

    def phi_at(self, t):
        """phi between nodes: cubic Hermite interpolation of log phi (slope -psi*)."""
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t[0] - 1e-12) or np.any(t > self.t[-1] + 1e-12):
            raise PreconditionError("time outside the table")
        spline = CubicHermiteSpline(self.t, np.log(self.phi), -self.psi_star)
        out = np.exp(spline(np.clip(t, self.t[0], self.t[-1])))
        # keep node values exact
        hit = np.searchsorted(self.t, t)
        hit = np.clip(hit, 0, self.t.size - 1)
        exact = self.t[hit] == t
        return np.where(exact, self.phi[hit], out)

    def ode_residual(self) -> np.ndarray:
        """phi'(t_j) + phi(t_j) psi*(t_j) at interior nodes, central differences."""
        h = self.step
        d = (self.phi[2:] - self.phi[:-2]) / (2.0 * h)
        return d + self.phi[1:-1] * self.psi_star[1:-1]

    def rows(self):
        for k in range(self.t.size):
            yield (self.t[k], self.phi[k], self.u1[k], self.u2[k], self.psi_star[k])

    def to_csv(self, header_lines=()) -> str:
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\n")
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for row in self.rows():
            buf.write(",".join(repr(float(v)) for v in row) + "\n")
        return buf.getvalue()


def value_function_constant(
    spec: PreventionSpec,
    rate: float,
    dist,
    grid_M: int = DEFAULT_M,
    method: str = GRID,
    grid=DEFAULT_GRID,
) -> ValueFunctionTable:
    """Tabulate phi and u* on M + 1 uniform nodes of [0, T]."""
    if not rate > 0:
        raise PreconditionError("intensity must be positive")
    top = spec.terminal_scale
    if top >= dist.mgf_limit:
        raise DivergentMGF(top, dist.mgf_limit)
    t = np.linspace(0.0, spec.T, grid_M + 1)
    t[-1] = spec.T
    report = foc_applicable(HamiltonianInputs(0.0, rate, spec, dist), rate) if method == FOC_NEWTON else None
    if method == GRID:
        risks = np.asarray(spec.risk_factor(t), dtype=float)
        u1, u2, ps = grid_minimum_batch(spec, float(rate), dist, risks, *grid)
    else:
        u1 = np.empty(t.size)
        u2 = np.empty(t.size)
        ps = np.empty(t.size)
        for j, tj in enumerate(t):
            res = minimize_psi(HamiltonianInputs(float(tj), rate, spec, dist), method, grid, rate, report)
            u1[j], u2[j] = res.effort.u1, res.effort.u2
            ps[j] = res.value
    h = spec.T / grid_M
    integral = backward_simpson(ps, h)
    phi = np.exp(integral)
    phi[-1] = 1.0
    return ValueFunctionTable(t, phi, u1, u2, ps, spec, float(rate), "simpson", method)
