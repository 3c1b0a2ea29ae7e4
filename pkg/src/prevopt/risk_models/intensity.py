"""Pre-control claim-arrival intensity models.

Four families are supported: constant, Markov-modulated (finite-state chain),
shot-noise Cox, and the contagion model that adds self-exciting kicks to the
shot-noise intensity.  Besides the scalar evaluation API (``intensity_at``)
each model exposes the small set of vectorised hooks used by the path engine in
:mod:`prevopt.simulate.engine`: an initial block state, a pre-simulation of the
exogenous events (chain switches or shocks), and the per-claim excitation.

Between events every intensity in this module has the form
``base + excess * exp(-alpha * (s - t))``; the engine relies on that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from prevopt.errors import PreconditionError
from prevopt.risk_models.claims import ClaimDistribution


# -- self-exciting mark maps -------------------------------------------------


@dataclass(frozen=True)
class LinearExcitation:
    """l(z) = c * z."""

    c: float

    def __post_init__(self):
        if self.c < 0:
            raise PreconditionError("excitation coefficient must be nonnegative")

    def __call__(self, z):
        return self.c * np.asarray(z, dtype=float)

    def params(self):
        return {"kind": "linear", "c": self.c}


@dataclass(frozen=True)
class CappedExcitation:
    """l(z) = c * min(z, cap)."""

    c: float
    cap: float

    def __post_init__(self):
        if self.c < 0 or self.cap <= 0:
            raise PreconditionError("capped excitation needs c >= 0 and cap > 0")

    def __call__(self, z):
        return self.c * np.minimum(np.asarray(z, dtype=float), self.cap)

    def params(self):
        return {"kind": "capped", "c": self.c, "cap": self.cap}


# -- exogenous event container -----------------------------------------------


@dataclass
class ExogenousEvents:
    """Padded per-path exogenous events; unused slots hold time = +inf."""

    times: np.ndarray
    marks: np.ndarray
    states: Optional[np.ndarray] = None

    @classmethod
    def empty(cls, n_paths):
        return cls(np.full((n_paths, 1), np.inf), np.zeros((n_paths, 1)))


# -- models -------------------------------------------------------------------


class IntensityModel:
    """Base class; subclasses define ``alpha`` (decay rate, 0 for flat models)."""

    kind = "abstract"
    bounded = True

    @property
    def bound(self) -> float:
        """Deterministic sup of the intensity (inf when unbounded)."""
        raise NotImplementedError

    def init_block(self, n):
        """Return (base, excess, chain state) arrays at time 0."""
        raise NotImplementedError

    def exogenous(self, gen: np.random.Generator, n: int, horizon: float) -> ExogenousEvents:
        return ExogenousEvents.empty(n)

    def apply_exogenous(self, mask, marks, states, base, excess, chain):
        pass

    def excitation(self, z):
        return np.zeros_like(np.asarray(z, dtype=float))

    def params(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantIntensity(IntensityModel):
    rate: float
    kind = "constant"
    alpha = 0.0

    def __post_init__(self):
        if not self.rate > 0:
            raise PreconditionError("constant intensity must be positive")

    @property
    def bound(self):
        return self.rate

    def init_block(self, n):
        return np.full(n, self.rate), np.zeros(n), np.zeros(n, dtype=np.int64)

    def params(self):
        return {"kind": self.kind, "rate": self.rate}


@dataclass(frozen=True)
class MarkovModulated(IntensityModel):
    generator: tuple
    levels: tuple
    initial_state: int = 0
    kind = "markov"
    alpha = 0.0

    def __post_init__(self):
        q = np.asarray(self.generator, dtype=float)
        n = len(self.levels)
        if q.shape != (n, n):
            raise PreconditionError("generator must be n x n with n = number of levels")
        off = q - np.diag(np.diag(q))
        if np.any(off < 0):
            raise PreconditionError("generator off-diagonal entries must be nonnegative")
        if np.any(np.abs(q.sum(axis=1)) > 1e-12 * max(1.0, np.abs(q).max())):
            raise PreconditionError("generator rows must sum to zero")
        if any(not lv > 0 for lv in self.levels):
            raise PreconditionError("intensity levels must be positive")
        if not 0 <= self.initial_state < n:
            raise PreconditionError("initial state out of range")
        object.__setattr__(self, "generator", tuple(tuple(float(v) for v in row) for row in q))
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))

    @property
    def bound(self):
        return max(self.levels)

    @property
    def q(self):
        return np.asarray(self.generator)

    def init_block(self, n):
        lv = np.asarray(self.levels)
        chain = np.full(n, self.initial_state, dtype=np.int64)
        return lv[chain].copy(), np.zeros(n), chain

    def exogenous(self, gen, n, horizon):
        q = self.q
        leave = -np.diag(q)
        with np.errstate(divide="ignore", invalid="ignore"):
            jump = np.where(leave[:, None] > 0, q / leave[:, None], 0.0)
        np.fill_diagonal(jump, 0.0)
        cum = np.cumsum(jump, axis=1)
        t = np.zeros(n)
        chain = np.full(n, self.initial_state, dtype=np.int64)
        times, states = [], []
        alive = np.ones(n, dtype=bool)
        while alive.any():
            e = gen.standard_exponential(n)
            u = gen.random(n)
            rate = leave[chain]
            with np.errstate(divide="ignore"):
                t = np.where(alive, t + np.where(rate > 0, e / rate, np.inf), t)
            alive &= t <= horizon
            nxt = (u[:, None] >= cum[chain]).sum(axis=1)
            nxt = np.minimum(nxt, len(self.levels) - 1)
            chain = np.where(alive, nxt, chain)
            times.append(np.where(alive, t, np.inf))
            states.append(chain.copy())
        if not times:
            return ExogenousEvents.empty(n)
        return ExogenousEvents(
            np.column_stack(times), np.zeros((n, len(times))), np.column_stack(states)
        )

    def apply_exogenous(self, mask, marks, states, base, excess, chain):
        chain[mask] = states[mask]
        base[mask] = np.asarray(self.levels)[states[mask]]

    def params(self):
        return {
            "kind": self.kind,
            "generator": [list(r) for r in self.generator],
            "levels": list(self.levels),
            "initial_state": self.initial_state,
        }


@dataclass(frozen=True)
class ShotNoiseCox(IntensityModel):
    """beta + (lambda0 - beta) e^{-alpha t} + sum of decaying exogenous shocks."""

    beta: float
    alpha: float
    lambda0: float
    rho: float
    shock: ClaimDistribution
    kind = "shot_noise"
    bounded = False

    def __post_init__(self):
        if not (self.beta > 0 and self.alpha > 0 and self.lambda0 > 0):
            raise PreconditionError("beta, alpha and lambda0 must be positive")
        if self.rho < 0:
            raise PreconditionError("shock rate must be nonnegative")

    @property
    def bound(self):
        return math.inf

    def init_block(self, n):
        return (
            np.full(n, self.beta),
            np.full(n, self.lambda0 - self.beta),
            np.zeros(n, dtype=np.int64),
        )

    def exogenous(self, gen, n, horizon):
        if self.rho == 0:
            return ExogenousEvents.empty(n)
        t = np.zeros(n)
        times, marks = [], []
        alive = np.ones(n, dtype=bool)
        while alive.any():
            e = gen.standard_exponential(n)
            z = self.shock.sample(gen, n)
            t = t + e / self.rho
            alive &= t <= horizon
            times.append(np.where(alive, t, np.inf))
            marks.append(np.where(alive, z, 0.0))
        return ExogenousEvents(np.column_stack(times), np.column_stack(marks))

    def apply_exogenous(self, mask, marks, states, base, excess, chain):
        excess[mask] += marks[mask]

    def _kick(self, z):
        return 0.0

    def params(self):
        return {
            "kind": self.kind,
            "beta": self.beta,
            "alpha": self.alpha,
            "lambda0": self.lambda0,
            "rho": self.rho,
            "shock": {"kind": self.shock.kind, **self.shock.params()},
        }


@dataclass(frozen=True)
class Contagion(ShotNoiseCox):
    """Shot-noise Cox intensity plus self-exciting kicks l(Z_i) at claims."""

    excite: object = field(default_factory=lambda: LinearExcitation(1.0))
    kind = "contagion"

    def excitation(self, z):
        return self.excite(z)

    def _kick(self, z):
        return float(self.excite(z))

    def params(self):
        out = super().params()
        out["kind"] = self.kind
        out["excite"] = self.excite.params()
        return out


# -- scalar evaluation along a history ----------------------------------------


@dataclass(frozen=True)
class HistoryState:
    """Observed history up to ``time``: claim events, shock events, chain state."""

    time: float
    claims: tuple = ()
    shocks: tuple = ()
    state: Optional[int] = None

    def __post_init__(self):
        for name in ("claims", "shocks"):
            ev = tuple(tuple(map(float, e)) for e in getattr(self, name))
            times = [e[0] for e in ev]
            if any(b <= a for a, b in zip(times, times[1:])):
                raise PreconditionError(f"{name} event times must be strictly increasing")
            if times and times[-1] > self.time:
                raise PreconditionError(f"{name} events after the history time {self.time}")
            object.__setattr__(self, name, ev)


def _check_time(h: HistoryState, t: float):
    if t < h.time:
        raise PreconditionError(f"evaluation time {t} precedes history time {h.time}")


def intensity_at(model: IntensityModel, h: HistoryState, t: float) -> float:
    """Right-continuous pre-control intensity at ``t`` given no events in (h.time, t]."""
    _check_time(h, t)
    if isinstance(model, ConstantIntensity):
        return model.rate
    if isinstance(model, MarkovModulated):
        state = model.initial_state if h.state is None else h.state
        return model.levels[state]
    if isinstance(model, ShotNoiseCox):
        a = model.alpha
        lam = model.beta + (model.lambda0 - model.beta) * math.exp(-a * t)
        for ti, zi in h.claims:
            lam += math.exp(-a * (t - ti)) * model._kick(zi)
        for ti, zi in h.shocks:
            lam += math.exp(-a * (t - ti)) * zi
        return lam
    raise TypeError(f"unsupported intensity model {type(model).__name__}")


def intensity_dominating_bound(model: IntensityModel, h: HistoryState, horizon: float) -> float:
    """Upper bound for the intensity on (h.time, horizon] when no further events occur."""
    if not horizon > h.time:
        raise PreconditionError("horizon must exceed the history time")
    if isinstance(model, ConstantIntensity):
        return model.rate
    if isinstance(model, MarkovModulated):
        return model.bound
    # excess over beta decays monotonically toward zero between events
    return max(intensity_at(model, h, h.time), model.beta)


def intensity_floor(model: IntensityModel) -> float:
    """Deterministic positive lower bound of the intensity along any history."""
    if isinstance(model, ConstantIntensity):
        return model.rate
    if isinstance(model, MarkovModulated):
        return min(model.levels)
    return min(model.beta, model.lambda0)


def make_markov(generator: Sequence[Sequence[float]], levels: Sequence[float], initial_state=0):
    return MarkovModulated(tuple(map(tuple, generator)), tuple(levels), initial_state)
