"""Monte Carlo estimators built on the path engine."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from prevopt.errors import NonfiniteSample, PreconditionError
from prevopt.simulate.engine import BLOCK, CONTROLLED, P0, PathBatch, simulate_paths

DIRECT = "direct"
WEIGHTED = "weighted"
MIN_PATHS = 100

CSV_COLUMNS = ("mode", "n_paths", "seed", "estimate", "stderr")


@dataclass(frozen=True)
class MCResult:
    estimate: float
    stderr: float
    n_paths: int
    mode: str
    seed: int

    def csv_row(self):
        return [self.mode, str(self.n_paths), str(self.seed), repr(self.estimate), repr(self.stderr)]

    def to_dict(self):
        return asdict(self)


def mean_and_stderr(x):
    x = np.asarray(x, dtype=float)
    n = x.size
    mean = float(np.sum(x) / n)
    if n < 2:
        return mean, 0.0
    var = float(np.sum((x - mean) ** 2) / (n - 1))
    return mean, math.sqrt(var / n)


def utility_samples(batch: PathBatch, spec, mode: str) -> np.ndarray:
    """Per-path e^{-eta X_T}, times L^u_T in weighted mode."""
    X = spec.x0 * math.exp(spec.r * spec.T) + batch.Y()
    expo = -spec.eta * X
    if mode == WEIGHTED:
        expo = expo + batch.log_weight
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.exp(expo)
    bad = ~np.isfinite(out)
    if bad.any():
        raise NonfiniteSample(
            f"{int(bad.sum())} path(s) produced a non-finite utility (first at path {int(np.argmax(bad))})"
        )
    return out


def estimate_expected_utility(
    model, dist, strategy, spec, n_paths: int, mode: str = DIRECT, seed: int = 0,
    threads: int = 1, block_size: int = BLOCK,
) -> MCResult:
    """Estimate E^{P^u}[exp(-eta X^u_T)].

    ``direct`` samples under the controlled measure; ``weighted`` samples under
    P0 and multiplies by the likelihood weight L^u_T.
    """
    if n_paths < MIN_PATHS:
        raise PreconditionError(f"n_paths must be at least {MIN_PATHS}")
    if mode not in (DIRECT, WEIGHTED):
        raise PreconditionError(f"unknown estimator mode {mode!r}")
    measure = CONTROLLED if mode == DIRECT else P0
    batch = simulate_paths(model, dist, spec.T, n_paths, seed, strategy, spec, measure,
                           threads=threads, block_size=block_size)
    est, se = mean_and_stderr(utility_samples(batch, spec, mode))
    return MCResult(est, se, n_paths, mode, int(seed))


@dataclass(frozen=True)
class CompensatorReport:
    mean_count: float
    mean_compensator: float
    diff: float
    stderr: float
    n_paths: int

    @property
    def passed(self) -> bool:
        return abs(self.diff) <= 3.0 * self.stderr

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


def compensator_check(model, dist, strategy, spec, n_paths: int, seed: int, threads: int = 1,
                      block_size: int = BLOCK) -> CompensatorReport:
    """Compare E[N_T] with E[int gamma1(u1) lambda0 ds] under the controlled measure."""
    batch = simulate_paths(model, dist, spec.T, n_paths, seed, strategy, spec, CONTROLLED,
                           threads=threads, block_size=block_size)
    d = batch.counts - batch.Iu
    diff, se = mean_and_stderr(d)
    return CompensatorReport(float(np.mean(batch.counts)), float(np.mean(batch.Iu)), diff, se, n_paths)
