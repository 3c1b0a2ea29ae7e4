"""Segment integrals of the controlled intensity and of the discounted effort cost.

Between events the pre-control intensity is ``base + exc * exp(-alpha (s - a))``
on a segment [a, b].  For a strategy that is piecewise constant in time the
integrals of gamma1(u1) * lambda and of e^{r(T-s)} (c1 + c2) are evaluated in
closed form piece by piece.  Feedback strategies (which read the intensity
value) use the midpoint of each time piece when the intensity is flat on the
segment, and 6-point Gauss-Legendre per piece when it decays.
"""

from __future__ import annotations

import numpy as np

from prevopt.prevention.strategies import ConstantStrategy, Strategy, clipped_effort

_GL6 = np.polynomial.legendre.leggauss(6)
# element budget for (paths x pieces x nodes) temporaries
_CHUNK = 1 << 20
# time pieces used for feedback strategies that carry no grid of their own
DEFAULT_PIECES = 128


def base_integral(base, exc, alpha, a, b):
    """Closed-form integral of base + exc e^{-alpha (s - a)} over [a, b]."""
    d = b - a
    if alpha > 0:
        return base * d - exc * np.expm1(-alpha * d) / alpha
    return (base + exc) * d


def _discounted_length(r, T, lo, hi):
    """Integral of e^{r(T - s)} over [lo, hi]."""
    if r == 0:
        return hi - lo
    return np.exp(r * (T - lo)) * -np.expm1(-r * (hi - lo)) / r


class StrategyIntegrator:
    """Evaluates a strategy along engine segments.

    ``mode`` is one of ``null`` (no strategy), ``constant``, ``piecewise``
    (time-only with a grid) or ``feedback``.
    """

    def __init__(self, strategy: Strategy | None, spec, T: float, alpha: float):
        self.strategy = strategy
        self.spec = spec
        self.T = float(T)
        self.alpha = float(alpha)
        if strategy is None:
            self.mode = "null"
            return
        strategy.check(spec)
        if isinstance(strategy, ConstantStrategy):
            self.mode = "constant"
            u1 = float(np.clip(strategy.u1, 0, spec.zeta1))
            u2 = float(np.clip(strategy.u2, 0, spec.zeta2))
            self.u = (u1, u2)
            self.g1 = float(spec.impact1(u1))
            self.g2 = float(spec.impact2(u2))
            self.crate = float(spec.cost1(u1) + spec.cost2(u2))
            return
        bp = strategy.breakpoints()
        if bp is None:
            edges = np.linspace(0.0, self.T, DEFAULT_PIECES + 1)
        else:
            bp = np.asarray(bp, dtype=float)
            edges = np.concatenate([bp[bp < self.T], [self.T]])
            if edges[0] > 0:
                edges = np.concatenate([[0.0], edges])
        self.edges = edges
        if strategy.time_only and bp is not None:
            self.mode = "piecewise"
            u1, u2 = clipped_effort(strategy, spec, edges[:-1])
            self.pu1, self.pu2 = np.asarray(u1, float), np.asarray(u2, float)
            self.pg1 = np.asarray(spec.impact1(self.pu1), float)
            self.pg2 = np.asarray(spec.impact2(self.pu2), float)
            self.pc = np.asarray(spec.cost1(self.pu1) + spec.cost2(self.pu2), float)
            lengths = np.diff(edges)
            self.G = np.concatenate([[0.0], np.cumsum(self.pg1 * lengths)])
            seg_cost = self.pc * _discounted_length(spec.r, self.T, edges[:-1], edges[1:])
            self.CC = np.concatenate([[0.0], np.cumsum(seg_cost)])
        else:
            self.mode = "feedback"

    # -- effort at claim instants ----------------------------------------------

    def at(self, t, lam):
        """(u1, u2, gamma1, gamma2) at times t with left-limit intensities lam."""
        t = np.asarray(t, dtype=float)
        if self.mode == "null":
            one = np.ones(t.shape)
            return np.zeros(t.shape), np.zeros(t.shape), one, one.copy()
        if self.mode == "constant":
            return (np.full(t.shape, self.u[0]), np.full(t.shape, self.u[1]),
                    np.full(t.shape, self.g1), np.full(t.shape, self.g2))
        if self.mode == "piecewise":
            j = self._piece(t)
            return self.pu1[j], self.pu2[j], self.pg1[j], self.pg2[j]
        u1, u2 = clipped_effort(self.strategy, self.spec, t, lam)
        return u1, u2, self.spec.impact1(u1), self.spec.impact2(u2)

    def _piece(self, t):
        return np.clip(np.searchsorted(self.edges, t, side="right") - 1, 0, self.edges.size - 2)

    # -- deterministic cost for time-only strategies -------------------------

    @property
    def deterministic_cost(self) -> bool:
        return self.mode in ("null", "constant", "piecewise")

    def cost_until(self, t):
        """Integral of e^{r(T-s)} (c1 + c2) over [0, t] (time-only strategies)."""
        t = np.asarray(t, dtype=float)
        if self.mode == "null":
            return np.zeros(t.shape)
        r = self.spec.r
        if self.mode == "constant":
            return self.crate * _discounted_length(r, self.T, np.zeros(t.shape), t)
        if self.mode == "piecewise":
            j = self._piece(t)
            return self.CC[j] + self.pc[j] * _discounted_length(r, self.T, self.edges[j], t)
        raise ValueError("cost of a feedback strategy depends on the path")

    # -- segment integrals -----------------------------------------------------

    def segment(self, a, b, base, exc):
        """Return (integral of gamma1 lambda, discounted cost) over [a_i, b_i]."""
        if self.mode == "null":
            return base_integral(base, exc, self.alpha, a, b), None
        if self.mode == "constant":
            return self.g1 * base_integral(base, exc, self.alpha, a, b), None
        if self.mode == "piecewise":
            if self.alpha == 0:
                return (base + exc) * (self._G(b) - self._G(a)), None
            return self._pieces_exact(a, b, base, exc), None
        return self._pieces_quadrature(a, b, base, exc)

    def _G(self, t):
        j = self._piece(t)
        return self.G[j] + self.pg1[j] * (t - self.edges[j])

    def _piece_range(self, a, b):
        if a.size == 0:
            return 0, 0
        j0 = int(self._piece(np.min(a)))
        j1 = int(self._piece(np.max(b))) + 1
        return j0, j1

    def _chunks(self, n, width):
        step = max(1, _CHUNK // max(1, width))
        for s in range(0, n, step):
            yield slice(s, min(n, s + step))

    def _pieces_exact(self, a, b, base, exc):
        alpha = self.alpha
        out = np.zeros(a.shape)
        j0, j1 = self._piece_range(a, b)
        lo_e, hi_e, g = self.edges[j0:j1], self.edges[j0 + 1 : j1 + 1], self.pg1[j0:j1]
        for sl in self._chunks(a.size, j1 - j0):
            aa, bb = a[sl, None], b[sl, None]
            lo = np.clip(lo_e, aa, bb)
            hi = np.clip(hi_e, aa, bb)
            decay = np.exp(-alpha * (lo - aa)) - np.exp(-alpha * (hi - aa))
            part = base[sl, None] * (hi - lo) + exc[sl, None] * decay / alpha
            out[sl] = part @ g
        return out

    def _pieces_quadrature(self, a, b, base, exc):
        spec, alpha, T = self.spec, self.alpha, self.T
        if alpha > 0:
            x, w = _GL6
        else:
            x, w = np.array([0.0]), np.array([2.0])
        iu = np.zeros(a.shape)
        cost = np.zeros(a.shape)
        j0, j1 = self._piece_range(a, b)
        lo_e, hi_e = self.edges[j0:j1], self.edges[j0 + 1 : j1 + 1]
        for sl in self._chunks(a.size, (j1 - j0) * x.size):
            aa, bb = a[sl, None], b[sl, None]
            lo = np.clip(lo_e, aa, bb)[..., None]
            hi = np.clip(hi_e, aa, bb)[..., None]
            half = 0.5 * (hi - lo)
            s = lo + half * (x + 1.0)
            lam = base[sl, None, None] + exc[sl, None, None] * np.exp(-alpha * (s - aa[..., None]))
            u1, u2 = clipped_effort(self.strategy, spec, s, lam)
            wt = half * w
            iu[sl] = np.sum(wt * spec.impact1(u1) * lam, axis=(1, 2))
            rate = (spec.cost1(u1) + spec.cost2(u2)) * np.exp(spec.r * (T - s))
            cost[sl] = np.sum(wt * rate, axis=(1, 2))
        return iu, cost
