"""The pointwise Hamiltonian and its minimisation over the effort box.

    psi(u) = eta e^{r(T-t)} (c1(u1) + c2(u2)) + gamma1(u1) Gamma (M(eta e^{r(T-t)} gamma2(u2)) - 1)

with M the claim moment-generating function and Gamma the current pre-control
intensity.  Arguments outside the mgf domain give psi = +inf (infeasible).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from prevopt.errors import DivergentMGF, NotApplicable, PreconditionError
from prevopt.prevention.convexity import check_convexity_conditions, linear_self_insurance
from prevopt.prevention.spec import Effort, PreventionSpec

GRID = "grid"
FOC_NEWTON = "foc_newton"
DEFAULT_GRID = (201, 201)
NEWTON_TOL = 1e-10
_NEWTON_START_GRID = (41, 41)
_MAX_NEWTON = 100


@dataclass(frozen=True)
class HamiltonianInputs:
    t: float
    intensity: float
    spec: PreventionSpec
    dist: object

    def __post_init__(self):
        if not self.intensity > 0:
            raise PreconditionError("intensity value must be positive")
        if not (0.0 <= self.t <= self.spec.T):
            raise PreconditionError("time must lie in [0, T]")

    @property
    def risk(self) -> float:
        """eta e^{r(T - t)}."""
        return float(self.spec.risk_factor(self.t))


def psi_array(inputs: HamiltonianInputs, u1, u2) -> np.ndarray:
    """Vectorised psi; +inf where the mgf diverges."""
    spec = inputs.spec
    a0 = inputs.risk
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    mgf = inputs.dist.mgf_array(a0 * spec.impact2(u2))
    cost = a0 * (spec.cost1(u1) + spec.cost2(u2))
    with np.errstate(invalid="ignore"):
        out = cost + spec.impact1(u1) * inputs.intensity * (mgf - 1.0)
    return np.where(np.isfinite(mgf), out, np.inf)


def psi(inputs: HamiltonianInputs, u: Effort) -> float:
    u.check(inputs.spec)
    a = inputs.risk * float(inputs.spec.impact2(u.u2))
    if a >= inputs.dist.mgf_limit:
        raise DivergentMGF(a, inputs.dist.mgf_limit)
    return float(psi_array(inputs, u.u1, u.u2))


def psi_gradient(inputs: HamiltonianInputs, u1: float, u2: float) -> np.ndarray:
    """Gradient for gamma2(u) = 1 - u."""
    spec, a0, lam = inputs.spec, inputs.risk, inputs.intensity
    a = a0 * (1.0 - u2)
    m0 = float(inputs.dist.mgf_array(a))
    m1 = float(inputs.dist.mgf_moment(a, 1))
    g = float(spec.impact1(u1))
    g1 = float(spec.impact1.d1(u1))
    return np.array([
        a0 * float(spec.cost1.d1(u1)) + lam * g1 * (m0 - 1.0),
        a0 * float(spec.cost2.d1(u2)) - a0 * lam * g * m1,
    ])


def psi_hessian(inputs: HamiltonianInputs, u1: float, u2: float) -> np.ndarray:
    """Hessian for gamma2(u) = 1 - u."""
    spec, a0, lam = inputs.spec, inputs.risk, inputs.intensity
    a = a0 * (1.0 - u2)
    m0 = float(inputs.dist.mgf_array(a))
    m1 = float(inputs.dist.mgf_moment(a, 1))
    m2 = float(inputs.dist.mgf_moment(a, 2))
    g = float(spec.impact1(u1))
    g1 = float(spec.impact1.d1(u1))
    g2 = float(spec.impact1.d2(u1))
    h11 = a0 * float(spec.cost1.d2(u1)) + lam * g2 * (m0 - 1.0)
    h22 = a0 * float(spec.cost2.d2(u2)) + a0 * a0 * lam * g * m2
    h12 = -a0 * lam * g1 * m1
    return np.array([[h11, h12], [h12, h22]])


@dataclass(frozen=True)
class Minimum:
    effort: Effort
    value: float
    method: str
    converged: bool = True
    iterations: int = 0
    gradient: Optional[tuple] = None


def lattice(spec: PreventionSpec, n1: int, n2: int):
    if n1 < 2 or n2 < 2:
        raise PreconditionError("grid needs at least two points per axis")
    g1 = np.linspace(0.0, spec.zeta1, n1)
    g2 = np.linspace(0.0, spec.zeta2, n2)
    g1[-1], g2[-1] = spec.zeta1, spec.zeta2
    return g1, g2


def grid_minimum_batch(spec: PreventionSpec, intensity: float, dist, risks, n1: int, n2: int):
    """Lattice argmin for many values of eta e^{r(T-t)} at once.

    Returns (u1, u2, psi) arrays; ties go to the smallest u1, then u2.
    """
    g1, g2 = lattice(spec, n1, n2)
    risks = np.atleast_1d(np.asarray(risks, dtype=float))
    uniq, inv = np.unique(risks, return_inverse=True)
    if uniq.size < risks.size:
        u1, u2, v = grid_minimum_batch(spec, intensity, dist, uniq, n1, n2)
        return u1[inv], u2[inv], v[inv]
    c1, c2 = spec.cost1(g1), spec.cost2(g2)
    scaled = spec.impact1(g1) * intensity
    imp2 = spec.impact2(g2)
    out1, out2, outv = (np.empty(risks.size) for _ in range(3))
    chunk = max(1, (1 << 21) // (n1 * n2))
    for s in range(0, risks.size, chunk):
        a0 = risks[s:s + chunk, None]
        # separable evaluation: mgf only depends on u2, cost splits
        col = dist.mgf_array(a0 * imp2[None, :]) - 1.0
        vals = (a0 * c1[None, :])[:, :, None] + (a0 * c2[None, :])[:, None, :]
        with np.errstate(invalid="ignore"):
            vals = vals + scaled[None, :, None] * col[:, None, :]
        vals = np.where(np.isfinite(col)[:, None, :], vals, np.inf)
        k = np.argmin(vals.reshape(vals.shape[0], -1), axis=1)
        i, j = np.divmod(k, n2)
        best = vals[np.arange(k.size), i, j]
        if not np.all(np.isfinite(best)):
            raise DivergentMGF(float(a0[~np.isfinite(best)][0, 0]), dist.mgf_limit)
        out1[s:s + chunk], out2[s:s + chunk], outv[s:s + chunk] = g1[i], g2[j], best
    return out1, out2, outv


def grid_minimum(inputs: HamiltonianInputs, n1: int, n2: int) -> Minimum:
    """Argmin over the n1 x n2 lattice; ties go to the smallest u1, then u2."""
    u1, u2, v = grid_minimum_batch(inputs.spec, inputs.intensity, inputs.dist, [inputs.risk], n1, n2)
    return Minimum(Effort(float(u1[0]), float(u2[0])), float(v[0]), GRID)


def foc_applicable(inputs: HamiltonianInputs, bound: Optional[float] = None):
    """Return the convexity report used to gate the Newton solver."""
    lam_bar = inputs.intensity if bound is None else bound
    return check_convexity_conditions(inputs.spec, lam_bar)


def foc_newton(inputs: HamiltonianInputs, bound: Optional[float] = None, report=None) -> Minimum:
    """Projected Newton on the box; KKT conditions define convergence.

    Written for gamma2(u) = 1 - u.  The start is a coarse grid argmin.  A
    coordinate is held on its bound while the gradient pushes outward;
    convergence means every free gradient component is at most 1e-10.
    """
    spec = inputs.spec
    if not linear_self_insurance(spec):
        raise NotApplicable("first-order solver needs gamma2(u) = 1 - u with zeta2 = 1")
    rep = foc_applicable(inputs, bound) if report is None else report
    if not rep.passed:
        raise NotApplicable(f"convexity conditions do not hold: {rep.to_dict()['conditions']}")
    lo = np.array([0.0, 0.0])
    hi = np.array([spec.zeta1, spec.zeta2])
    start = grid_minimum(inputs, *_NEWTON_START_GRID)
    x = np.array(start.effort.as_tuple())

    def value(v):
        return float(psi_array(inputs, v[0], v[1]))

    def projected(g, x):
        pg = g.copy()
        pg[(x <= lo) & (g > 0)] = 0.0
        pg[(x >= hi) & (g < 0)] = 0.0
        return pg

    f = value(x)
    for it in range(1, _MAX_NEWTON + 1):
        g = psi_gradient(inputs, *x)
        pg = projected(g, x)
        if np.max(np.abs(pg)) <= NEWTON_TOL:
            return Minimum(Effort(float(x[0]), float(x[1])), f, FOC_NEWTON, True, it - 1, tuple(g))
        free = ~(((x <= lo) & (g > 0)) | ((x >= hi) & (g < 0)))
        H = psi_hessian(inputs, *x)
        d = np.zeros(2)
        Hf = H[np.ix_(free, free)]
        try:
            step = -np.linalg.solve(Hf, g[free])
            if g[free] @ step >= 0:
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            step = -g[free]
        d[free] = step
        s = 1.0
        while True:
            xn = np.clip(x + s * d, lo, hi)
            fn = value(xn)
            if fn <= f + 1e-4 * float(g @ (xn - x)) or s < 1e-12:
                break
            s *= 0.5
        if np.array_equal(xn, x):
            break
        x, f = xn, fn
    g = psi_gradient(inputs, *x)
    if np.max(np.abs(projected(g, x))) <= NEWTON_TOL:
        return Minimum(Effort(float(x[0]), float(x[1])), f, FOC_NEWTON, True, _MAX_NEWTON, tuple(g))
    fallback = grid_minimum(inputs, *DEFAULT_GRID)
    return Minimum(fallback.effort, fallback.value, GRID, False, _MAX_NEWTON, tuple(g))


def minimize_psi(inputs: HamiltonianInputs, method: str = GRID, grid=DEFAULT_GRID,
                 bound: Optional[float] = None, report=None) -> Minimum:
    """Minimise psi over U by lattice search or by the first-order solver."""
    if method == GRID:
        return grid_minimum(inputs, *grid)
    if method == FOC_NEWTON:
        return foc_newton(inputs, bound, report)
    raise PreconditionError(f"unknown minimisation method {method!r}")
