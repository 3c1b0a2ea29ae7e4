"""Single marked paths: sampling, likelihood weights and terminal wealth."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from prevopt.errors import PreconditionError
from prevopt.prevention.strategies import ConstantStrategy, Strategy, clipped_effort
from prevopt.risk_models.intensity import IntensityModel, MarkovModulated
from prevopt.rng import RandomStream
from prevopt.simulate.engine import CONTROLLED, P0, simulate_block
from prevopt.simulate.integrals import StrategyIntegrator


@dataclass(frozen=True)
class MarkedPath:
    """One trajectory on [0, horizon].

    ``lam_minus`` holds the pre-control intensity just before each claim.
    ``exo_times``/``exo_marks``/``exo_states`` hold shocks (shot-noise models)
    or chain switches (Markov-modulated models).
    """

    times: np.ndarray
    marks: np.ndarray
    horizon: float
    model: IntensityModel
    measure: str = P0
    strategy: Optional[Strategy] = None
    lam_minus: Optional[np.ndarray] = None
    exo_times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    exo_marks: np.ndarray = field(default_factory=lambda: np.zeros(0))
    exo_states: Optional[np.ndarray] = None
    log_weight: Optional[float] = None
    n_candidates: int = 0
    n_rejected: int = 0

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        marks = np.asarray(self.marks, dtype=float)
        if times.shape != marks.shape:
            raise PreconditionError("times and marks must have equal length")
        if np.any(np.diff(times) <= 0):
            raise PreconditionError("claim times must be strictly increasing")
        if times.size and (times[0] <= 0 or times[-1] > self.horizon):
            raise PreconditionError("claim times must lie in (0, horizon]")
        if np.any(marks <= 0):
            raise PreconditionError("claim sizes must be positive")
        exo_t = np.asarray(self.exo_times, dtype=float)
        if np.any(np.diff(exo_t) <= 0):
            raise PreconditionError("exogenous event times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "marks", marks)
        object.__setattr__(self, "exo_times", exo_t)
        object.__setattr__(self, "exo_marks", np.asarray(self.exo_marks, dtype=float))

    @property
    def n_claims(self) -> int:
        return int(self.times.size)

    def prefix(self, t: float) -> "MarkedPath":
        """The path observed up to time t (events at t included)."""
        keep = self.times <= t
        ek = self.exo_times <= t
        return MarkedPath(
            self.times[keep], self.marks[keep], self.horizon, self.model, self.measure,
            self.strategy, None if self.lam_minus is None else self.lam_minus[keep],
            self.exo_times[ek], self.exo_marks[ek],
            None if self.exo_states is None else np.asarray(self.exo_states)[ek],
        )

    def with_claim(self, t: float, z: float) -> "MarkedPath":
        """Copy with one extra claim (used for sensitivity checks)."""
        times = np.append(self.times, t)
        marks = np.append(self.marks, z)
        order = np.argsort(times, kind="stable")
        return MarkedPath(times[order], marks[order], self.horizon, self.model, self.measure,
                          self.strategy, None, self.exo_times, self.exo_marks, self.exo_states)


def _single(model, dist, T, rng, strategy, spec, measure):
    if not T > 0:
        raise PreconditionError("horizon must be positive")
    integ = StrategyIntegrator(strategy, spec, T, model.alpha)
    res = simulate_block(model, dist, T, rng, 1, integ, measure, record=True)
    ev, ex = res.events, res.exogenous
    log_w = float(-(res.Iu[0] - res.I0[0]) + res.log_gamma[0]) if strategy is not None else 0.0
    return MarkedPath(
        ev["time"], ev["mark"], T, model, measure, strategy, ev["lam_minus"],
        ex["time"], ex["mark"], ex["state"], log_w,
        int(res.n_candidates[0]), int(res.n_rejected[0]),
    )


def simulate_path_P0(model: IntensityModel, dist, T: float, rng: RandomStream,
                     strategy=None, spec=None) -> MarkedPath:
    """Sample under P0.  With a strategy the path also carries log L^u_T."""
    return _single(model, dist, T, rng, strategy, spec, P0)


def simulate_path_controlled(model, dist, strategy, spec, T: float, rng: RandomStream) -> MarkedPath:
    """Sample under the controlled measure: claims thinned at gamma1(u1) lambda."""
    return _single(model, dist, T, rng, strategy, spec, CONTROLLED)


# -- replay along a stored path ---------------------------------------------------


def _segments(path: MarkedPath):
    """Yield (a, b, base, exc, claim_mark_or_None) along the path in time order."""
    model = path.model
    base, exc, chain = (np.asarray(v, dtype=float) for v in model.init_block(1))
    base, exc = float(base[0]), float(exc[0])
    state = None
    events = [(t, 0, i) for i, t in enumerate(path.times)]
    events += [(t, 1, i) for i, t in enumerate(path.exo_times)]
    events.sort()
    a = 0.0
    alpha = float(model.alpha)
    for t, kind, i in events:
        yield a, t, base, exc, (path.marks[i] if kind == 0 else None)
        exc = exc * math.exp(-alpha * (t - a))
        if kind == 0:
            exc += float(model.excitation(np.array([path.marks[i]]))[0])
        elif isinstance(model, MarkovModulated):
            state = int(path.exo_states[i])
            base = model.levels[state]
        else:
            exc += float(path.exo_marks[i])
        a = t
    yield a, path.horizon, base, exc, None


def _lam(base, exc, alpha, a, s):
    return base + exc * math.exp(-alpha * (s - a))


def _controlled_integral(strategy, spec, a, b, base, exc, alpha):
    """Integral of (gamma1(u1(s, lambda_s)) - 1) lambda_s over [a, b]."""
    if b <= a:
        return 0.0
    if isinstance(strategy, ConstantStrategy):
        g = float(spec.impact1(np.clip(strategy.u1, 0, spec.zeta1)))
        if alpha > 0:
            mass = base * (b - a) - exc * math.expm1(-alpha * (b - a)) / alpha
        else:
            mass = (base + exc) * (b - a)
        return (g - 1.0) * mass

    def integrand(s):
        lam = _lam(base, exc, alpha, a, s)
        u1, _ = clipped_effort(strategy, spec, np.array([s]), np.array([lam]))
        return (float(spec.impact1(u1)[0]) - 1.0) * lam

    bp = strategy.breakpoints()
    pts = [] if bp is None else [p for p in np.asarray(bp, dtype=float) if a < p < b]
    edges = [a, *pts, b]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(integrand, lo, hi, limit=200, epsabs=1e-13, epsrel=1e-12)
        total += val
    return total


def log_likelihood_weight(path: MarkedPath, strategy: Strategy, model: IntensityModel, spec) -> float:
    """log L^u_T = -int (gamma1(u1) - 1) lambda0 ds + sum log gamma1(u1(T_i)).

    Recomputed from the stored events; closed form for constant strategies,
    adaptive quadrature on each inter-event piece otherwise.
    """
    if path.measure != P0:
        raise PreconditionError("likelihood weights are defined for paths sampled under P0")
    if model is not path.model and model != path.model:
        raise PreconditionError("path was sampled from a different intensity model")
    strategy.check(spec)
    alpha = float(model.alpha)
    total = 0.0
    for a, b, base, exc, mark in _segments(path):
        total -= _controlled_integral(strategy, spec, a, b, base, exc, alpha)
        if mark is not None:
            lam = _lam(base, exc, alpha, a, b)
            u1, _ = clipped_effort(strategy, spec, np.array([b]), np.array([lam]))
            total += math.log(float(spec.impact1(u1)[0]))
    return total


def wealth_terminal(path: MarkedPath, strategy: Strategy, spec):
    """Return (X^u_T, Y^u_T) along a stored path; X = x0 e^{rT} + Y."""
    strategy.check(spec)
    T, r = path.horizon, spec.r
    if abs(T - spec.T) > 1e-12 * max(1.0, T):
        raise PreconditionError("path horizon differs from the spec horizon")
    model = path.model
    alpha = float(model.alpha)
    cost = 0.0
    loss = 0.0
    integ = StrategyIntegrator(strategy, spec, T, alpha)
    for a, b, base, exc, mark in _segments(path):
        if not integ.deterministic_cost:
            _, c = integ.segment(np.array([a]), np.array([b]), np.array([base]), np.array([exc]))
            cost += float(c[0])
        if mark is not None:
            lam = _lam(base, exc, alpha, a, b)
            _, u2 = clipped_effort(strategy, spec, np.array([b]), np.array([lam]))
            loss += float(spec.impact2(u2)[0]) * math.exp(r * (T - b)) * mark
    if integ.deterministic_cost:
        cost = float(integ.cost_until(np.array(T)))
    Y = -cost - loss
    X = spec.x0 * math.exp(r * T) + Y
    return X, Y
