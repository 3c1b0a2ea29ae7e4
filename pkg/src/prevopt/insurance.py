"""Self-protection combined with proportional market insurance.

The agent keeps a fraction theta of every loss, pays a premium Pi(theta) at
time 0 and receives a deterministic reimbursement xi at T.  Only the claim
frequency is controlled.  For a constant intensity, the inner value is

    v_theta = exp(-eta xi) phi_theta(0),

with phi_theta the value function for claims theta * Z.  The outer problem is

    v1 = min_theta exp(eta e^{rT} (Pi(theta) - x0)) v_theta.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from prevopt.errors import ContractError, PreconditionError
from prevopt.prevention.curves import NoImpact, ZeroCost
from prevopt.prevention.spec import PreventionSpec
from prevopt.risk_models.claims import ScaledClaim
from prevopt.solver.hamiltonian import DEFAULT_GRID
from prevopt.solver.value_function import DEFAULT_M, ValueFunctionTable, value_function_constant

THETA_POINTS = 101
REFINE_POINTS = 21
CURVE_COLUMNS = ("theta", "premium", "xi", "v_inner", "objective", "is_optimal")


@dataclass(frozen=True)
class InsuranceContract:
    """Proportional contract priced by the expected-value principle.

    Pi(theta) = (1 + kappa)(1 - theta) E[Z] lam_ref T e^{-rT},  xi = rho_r Pi e^{rT}.
    ``premium_fn``/``xi_fn`` replace the built-in rules when given.
    """

    kappa: float = 0.0
    rho_r: float = 0.0
    lam_ref: float = 1.0
    premium_fn: Optional[Callable[[float], float]] = field(default=None, compare=False)
    xi_fn: Optional[Callable[[float], float]] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.kappa >= 0:
            raise ContractError("loading kappa must be nonnegative")
        if not 0.0 <= self.rho_r <= 1.0:
            raise ContractError("reimbursement ratio must lie in [0, 1]")
        if not self.lam_ref >= 0:
            raise ContractError("reference intensity must be nonnegative")

    def premium(self, theta: float, spec: PreventionSpec, dist) -> float:
        _check_theta(theta)
        if self.premium_fn is not None:
            p = float(self.premium_fn(theta))
        else:
            p = (1.0 + self.kappa) * (1.0 - theta) * dist.mean * self.lam_ref * spec.T * math.exp(-spec.r * spec.T)
        if not p >= 0:
            raise ContractError(f"premium must be nonnegative (got {p!r} at theta={theta!r})")
        return p

    def reimbursement(self, theta: float, spec: PreventionSpec, dist) -> float:
        cap = self.premium(theta, spec, dist) * math.exp(spec.r * spec.T)
        xi = float(self.xi_fn(theta)) if self.xi_fn is not None else self.rho_r * cap
        if not (0.0 <= xi <= cap * (1.0 + 1e-15)):
            raise ContractError(f"reimbursement {xi!r} outside [0, {cap!r}] at theta={theta!r}")
        return xi


def _check_theta(theta):
    if not 0.0 <= theta <= 1.0:
        raise PreconditionError("retention must lie in [0, 1]")


def self_protection_spec(spec: PreventionSpec) -> PreventionSpec:
    """Same economics with severity effort switched off."""
    return spec.with_(impact2=NoImpact(), cost2=ZeroCost())


@dataclass(frozen=True)
class InnerValue:
    theta: float
    xi: float
    phi0: float
    value: float
    table: ValueFunctionTable = field(repr=False)

    @property
    def mean_effort(self) -> float:
        """(1/T) int u1*(t) dt for the piecewise-constant strategy."""
        tab = self.table
        return float(np.sum(tab.u1[:-1] * np.diff(tab.t)) / (tab.t[-1] - tab.t[0]))


def value_inner(theta: float, contract: InsuranceContract, spec: PreventionSpec, rate: float, dist,
                grid_M: int = DEFAULT_M, n_effort: int = DEFAULT_GRID[0]) -> InnerValue:
    _check_theta(theta)
    xi = contract.reimbursement(theta, spec, dist)
    inner = self_protection_spec(spec)
    table = value_function_constant(inner, rate, ScaledClaim(dist, theta), grid_M, grid=(n_effort, 2))
    return InnerValue(float(theta), xi, table.phi0, math.exp(-spec.eta * xi) * table.phi0, table)


@dataclass(frozen=True)
class RetentionResult:
    theta_star: float
    value: float
    thetas: np.ndarray
    premiums: np.ndarray
    xis: np.ndarray
    inner: np.ndarray
    objective: np.ndarray
    refined: tuple = ()
    mean_effort: float = 0.0

    def curve_csv(self, header_lines=()) -> str:
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\n")
        buf.write(",".join(CURVE_COLUMNS) + "\n")
        for k in range(self.thetas.size):
            row = (self.thetas[k], self.premiums[k], self.xis[k], self.inner[k], self.objective[k])
            flag = int(self.thetas[k] == self.theta_star)
            buf.write(",".join(repr(float(v)) for v in row) + f",{flag}\n")
        return buf.getvalue()


def optimal_retention(contract: InsuranceContract, spec: PreventionSpec, rate: float, dist,
                      thetas=None, grid_M: int = DEFAULT_M, refine: bool = True,
                      n_effort: int = DEFAULT_GRID[0]) -> RetentionResult:
    """Grid search over theta (101 points by default) with local refinement.

    Ties go to the smallest theta.
    """
    thetas = np.linspace(0.0, 1.0, THETA_POINTS) if thetas is None else np.asarray(thetas, dtype=float)
    if thetas.ndim != 1 or thetas.size == 0 or np.any((thetas < 0) | (thetas > 1)):
        raise PreconditionError("theta grid must be a nonempty subset of [0, 1]")
    thetas = np.unique(thetas)
    scale = spec.terminal_scale

    def evaluate(th):
        p = contract.premium(th, spec, dist)
        iv = value_inner(th, contract, spec, rate, dist, grid_M, n_effort)
        obj = math.exp(scale * (p - spec.x0)) * iv.value
        return p, iv, obj

    rows = [evaluate(float(th)) for th in thetas]
    prem = np.array([p for p, _, _ in rows])
    xis = np.array([iv.xi for _, iv, _ in rows])
    inner = np.array([iv.value for _, iv, _ in rows])
    obj = np.array([o for _, _, o in rows])
    i = int(np.argmin(obj))
    best_theta, best_obj, best_iv = float(thetas[i]), float(obj[i]), rows[i][1]
    refined = []
    if refine and thetas.size > 2:
        lo = thetas[max(i - 1, 0)]
        hi = thetas[min(i + 1, thetas.size - 1)]
        for th in np.linspace(lo, hi, REFINE_POINTS):
            th = float(th)
            if np.any(thetas == th):
                continue
            _, iv, o = evaluate(th)
            refined.append((th, o))
            if o < best_obj or (o == best_obj and th < best_theta):
                best_theta, best_obj, best_iv = th, o, iv
    return RetentionResult(best_theta, best_obj, thetas, prem, xis, inner, obj, tuple(refined),
                           best_iv.mean_effort)


def comparative_statics(kappas, contract: InsuranceContract, spec: PreventionSpec, rate: float, dist,
                        thetas=None, grid_M: int = DEFAULT_M, n_effort: int = DEFAULT_GRID[0]):
    """Rows (kappa, theta*, mean effort) across loadings; exploratory output only."""
    out = []
    for k in kappas:
        c = InsuranceContract(float(k), contract.rho_r, contract.lam_ref)
        res = optimal_retention(c, spec, rate, dist, thetas, grid_M, True, n_effort)
        out.append((float(k), res.theta_star, res.mean_effort))
    return out
