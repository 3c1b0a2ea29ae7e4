"""BSDE generator and the explicit solution for a constant intensity.

The generator at effort u, with a = eta e^{r(T-t)} and k = a (1 - gamma2(u2)):

    f = -R a (c1 + c2) + lambda int Theta dF
        - gamma1 lambda int [ (Theta + R)(e^{-k z} - 1) + Theta ] dF

For the explicit jump field Theta(z) = K (e^{b z} - 1) every integral reduces
to mgf values:

    int Theta dF                    = K (M(b) - 1)
    int (Theta + R)(e^{-kz} - 1) dF = K (M(b - k) - M(b)) + (R - K)(M(-k) - 1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from prevopt.errors import DivergentMGF, NonfiniteIntegral
from prevopt.prevention.spec import Effort, PreventionSpec
from prevopt.solver.hamiltonian import HamiltonianInputs, lattice, psi_array


@dataclass(frozen=True)
class ExplicitJump:
    """Theta(z) = scale * (exp(rate * z) - 1)."""

    scale: float
    rate: float

    def __call__(self, z):
        return self.scale * np.expm1(self.rate * np.asarray(z, dtype=float))


JumpField = Union[ExplicitJump, Callable]


def _mgf(dist, a):
    try:
        return dist.mgf(a)
    except DivergentMGF as exc:
        raise NonfiniteIntegral(str(exc)) from exc


def _integrals(theta, R, k, dist):
    """Return (int Theta dF, int (Theta + R)(e^{-kz} - 1) dF)."""
    if isinstance(theta, ExplicitJump):
        K, b = theta.scale, theta.rate
        mb = _mgf(dist, b)
        i_theta = K * (mb - 1.0)
        if k == 0.0:
            return i_theta, 0.0
        i_adj = K * (_mgf(dist, b - k) - mb) + (R - K) * (_mgf(dist, -k) - 1.0)
        return i_theta, i_adj
    i_theta = dist.expect(lambda z: theta(z))
    if k == 0.0:
        return i_theta, 0.0
    i_adj = dist.expect(lambda z: (theta(z) + R) * np.expm1(-k * z))
    return i_theta, i_adj


def generator_f(t: float, R: float, theta: JumpField, u: Effort, lam: float,
                spec: PreventionSpec, dist) -> float:
    a = float(spec.risk_factor(t))
    g1 = float(spec.impact1(u.u1))
    k = a * (1.0 - float(spec.impact2(u.u2)))
    cost = float(spec.cost1(u.u1) + spec.cost2(u.u2))
    i_theta, i_adj = _integrals(theta, R, k, dist)
    total = -R * a * cost + lam * i_theta - g1 * lam * (i_adj + i_theta)
    if not math.isfinite(total):
        raise NonfiniteIntegral("generator is not finite")
    return total


def generator_f_self_protection(t: float, R: float, theta: JumpField, u1: float, lam: float,
                                spec: PreventionSpec, dist) -> float:
    """Generator when effort only lowers the claim frequency.

        f1 = -R eta e^{r(T-t)} c1(u1) + (1 - gamma1(u1)) lambda int Theta dF
    """
    a = float(spec.risk_factor(t))
    g1 = float(spec.impact1(u1))
    i_theta, _ = _integrals(theta, R, 0.0, dist)
    return -R * a * float(spec.cost1(u1)) + (1.0 - g1) * lam * i_theta


def generator_sup(t: float, R: float, theta: JumpField, lam: float, spec: PreventionSpec, dist,
                  grid=(101, 101)):
    """sup of f over the effort lattice; returns (value, argmax effort)."""
    g1, g2 = lattice(spec, *grid)
    best, arg = -math.inf, None
    for x in g1:
        for y in g2:
            v = generator_f(t, R, theta, Effort(float(x), float(y)), lam, spec, dist)
            if v > best:
                best, arg = v, Effort(float(x), float(y))
    return best, arg


def generator_sup_identity(t: float, R: float, lam: float, spec: PreventionSpec, dist,
                           grid=(101, 101)) -> float:
    """R (lambda (M(eta e^{r(T-t)}) - 1) - inf psi) with inf psi over the same lattice."""
    inputs = HamiltonianInputs(t, lam, spec, dist)
    g1, g2 = lattice(spec, *grid)
    vals = psi_array(inputs, g1[:, None], g2[None, :])
    a = float(spec.risk_factor(t))
    return R * (lam * (_mgf(dist, a) - 1.0) - float(np.min(vals)))


# -- explicit solution ----------------------------------------------------------------


@dataclass(frozen=True)
class BSDEState:
    """Explicit solution at time t along one path prefix (orthogonal part M = 0)."""

    t: float
    W0: float
    W0_minus: float
    theta: ExplicitJump
    ybar: float
    ybar_minus: float
    M: float = 0.0


def discounted_losses(times, marks, r, t, strict=False):
    """Ybar^0_t = -sum_{T_i <= t} e^{-r T_i} Z_i (T_i < t when strict)."""
    times = np.asarray(times, dtype=float)
    marks = np.asarray(marks, dtype=float)
    keep = times < t if strict else times <= t
    return -float(np.sum(np.exp(-r * times[keep]) * marks[keep]))


def explicit_bsde_triple(t: float, path_prefix, table, spec: PreventionSpec) -> BSDEState:
    """W0_t = phi(t) exp(-eta Ybar_t e^{rT}),  Theta(t, z) = K (e^{eta z e^{r(T-t)}} - 1).

    K = phi(t) exp(-eta Ybar_{t-} e^{rT}).
    """
    if not (0.0 <= t <= spec.T):
        raise ValueError("t must lie in [0, T]")
    r = spec.r
    scale = spec.terminal_scale
    phi_t = float(table.phi_at(t))
    yb = discounted_losses(path_prefix.times, path_prefix.marks, r, t)
    yb_minus = discounted_losses(path_prefix.times, path_prefix.marks, r, t, strict=True)
    W0 = phi_t * math.exp(-scale * yb)
    K = phi_t * math.exp(-scale * yb_minus)
    theta = ExplicitJump(K, float(spec.risk_factor(t)))
    return BSDEState(float(t), W0, K, theta, yb, yb_minus)


def terminal_condition(path, spec: PreventionSpec) -> float:
    """Xi = exp(-eta Y^0_T) with Y^0_T = -sum e^{r(T - T_i)} Z_i."""
    y0 = -float(np.sum(np.exp(spec.r * (spec.T - path.times)) * path.marks))
    return math.exp(-spec.eta * y0)
