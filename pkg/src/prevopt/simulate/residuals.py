"""Time-change residual test for simulated point processes.

If claims arrive with compensator A(t) = int lambda ds, the transformed times
A(T_1) < A(T_2) < ... form a unit-rate Poisson process, so their increments
are i.i.d. Exp(1).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from prevopt.risk_models.intensity import intensity_floor
from prevopt.simulate.engine import simulate_paths


@dataclass(frozen=True)
class TimeChangeReport:
    n_events: int
    n_paths: int
    statistic: float
    pvalue: float
    level: float
    horizon: float

    @property
    def passed(self) -> bool:
        return self.pvalue > self.level

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


def transformed_interarrivals(events: dict) -> np.ndarray:
    """Increments of the compensator between successive claims of each path."""
    path = events["path"]
    Lam = events["I0"]
    if path.size == 0:
        return np.zeros(0)
    first = np.ones(path.size, dtype=bool)
    first[1:] = path[1:] != path[:-1]
    prev = np.where(first, 0.0, np.roll(Lam, 1))
    return Lam - prev


def time_change_test(model, dist, min_events: int, seed: int, level: float = 0.01,
                     n_paths: int = 4, threads: int = 1) -> TimeChangeReport:
    """KS test of the time-changed interarrivals of P0 paths against Exp(1).

    A few long paths are used rather than many short ones: gaps cut off by the
    horizon are dropped, and on short paths that censoring biases the
    remaining gaps downward.  The horizon is doubled until at least
    ``min_events`` claims are collected.
    """
    T = 1.2 * min_events / (n_paths * intensity_floor(model))
    while True:
        batch = simulate_paths(model, dist, T, n_paths, seed, threads=threads, record=True,
                               block_size=n_paths)
        if batch.events["path"].size >= min_events:
            break
        T *= 2.0
    x = transformed_interarrivals(batch.events)
    res = stats.kstest(x, "expon")
    return TimeChangeReport(int(x.size), n_paths, float(res.statistic), float(res.pvalue), level, T)
