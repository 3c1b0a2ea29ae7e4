"""Integrability conditions on the pre-control intensity and the loss process.

For a bounded intensity (sup lambda0 <= Lambda) every exponential moment of
``int lambda0 dt`` is at most ``exp(a Lambda T)`` and, with claims independent
of the counting process, ``E[exp(a J_T)] <= exp((E[e^{aZ}] - 1) Lambda T)``.
These give analytic verdicts.  For unbounded intensities the report carries
Monte Carlo estimates with standard errors and no verdict: a finite sample
mean cannot certify that an exponential moment is finite.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from prevopt.errors import NoAdmissibleBeta, PreconditionError
from prevopt.rng import RandomStream

ANALYTIC_PASS = "analytic_pass"
ANALYTIC_FAIL = "analytic_fail"
MC_ESTIMATE = "mc_estimate"

#: candidate epsilons reported for the (1 + eps) exponential moment
EPSILON_CANDIDATES = (0.01, 0.1, 1.0)
#: exponents used for the "for every a > 0" family when it must be sampled
GEN_EXPONENTS = (1.0, 2.0, 4.0, 8.0)
#: default gate parameter, inside the admissible region Phi < 1 / (18 e)
DEFAULT_PHI = 0.9 / (18.0 * math.e)

BETA_GRID = np.geomspace(1e-2, 1e8, 200)


# -- gate function -------------------------------------------------------------


def pps_gate(phi: float, beta: float) -> float:
    """M^Phi(beta) evaluated as written."""
    if not (phi > 0 and beta > 0):
        raise PreconditionError("Phi and beta must be positive")
    root = math.sqrt(beta**2 * phi**2 + 4.0)
    return 9.0 / beta + phi**2 * (2.0 + 9.0 * beta) / (root - 2.0) * math.exp(
        (beta * phi + 2.0 - root) / 2.0
    )


def pps_gate_log(phi: float, beta: float) -> float:
    """M^Phi(beta) via the rationalised differences, second term in log space.

    Uses sqrt(x^2 + 4) - 2 = x^2 / (sqrt(x^2 + 4) + 2) with x = beta * Phi,
    which avoids the cancellation of the written form for small x.
    """
    if not (phi > 0 and beta > 0):
        raise PreconditionError("Phi and beta must be positive")
    x = beta * phi
    root = math.hypot(x, 2.0)
    excess = x - x * x / (root + 2.0)  # = x + 2 - sqrt(x^2 + 4)
    log_term = (
        math.log(2.0 + 9.0 * beta) - 2.0 * math.log(beta) + math.log(root + 2.0) + 0.5 * excess
    )
    return 9.0 / beta + math.exp(log_term)


def gate_limit(phi: float) -> float:
    """Limit of M^Phi(beta) as beta grows without bound: 9 e Phi."""
    return 9.0 * math.e * phi


@dataclass(frozen=True)
class BetaScan:
    phi: float
    grid: np.ndarray
    values: np.ndarray
    min_value: float
    argmin_beta: float
    beta_star: Optional[float]
    value_star: Optional[float]

    @property
    def admissible(self) -> bool:
        return self.beta_star is not None

    def to_dict(self):
        return {
            "phi": self.phi,
            "grid_min": float(self.grid[0]),
            "grid_max": float(self.grid[-1]),
            "grid_points": int(self.grid.size),
            "min_value": self.min_value,
            "argmin_beta": self.argmin_beta,
            "beta_star": self.beta_star,
            "value_star": self.value_star,
            "limit": gate_limit(self.phi),
        }


def scan_beta(phi: float, grid=None) -> BetaScan:
    """Evaluate the gate on a geometric grid; beta* is the smallest grid point below 1/2."""
    grid = BETA_GRID if grid is None else np.asarray(grid, dtype=float)
    values = np.array([pps_gate_log(phi, b) for b in grid])
    i = int(np.argmin(values))
    ok = np.flatnonzero(values < 0.5)
    star = (float(grid[ok[0]]), float(values[ok[0]])) if ok.size else (None, None)
    return BetaScan(float(phi), grid, values, float(values[i]), float(grid[i]), *star)


def find_admissible_beta(phi: float, grid=None) -> BetaScan:
    scan = scan_beta(phi, grid)
    if not scan.admissible:
        raise NoAdmissibleBeta(phi, scan)
    return scan


# -- report ----------------------------------------------------------------------


@dataclass(frozen=True)
class ConditionResult:
    name: str
    status: str
    exponent: Optional[float] = None
    bound: Optional[float] = None
    estimate: Optional[float] = None
    stderr: Optional[float] = None
    detail: str = ""

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class ConditionReport:
    results: list = field(default_factory=list)
    gate: Optional[BetaScan] = None
    intensity_bound: float = math.inf
    n_paths: int = 0

    def by_name(self, name) -> ConditionResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def group(self, prefix):
        return [r for r in self.results if r.name.startswith(prefix)]

    @property
    def verdicts(self) -> dict:
        return {r.name: r.status for r in self.results}

    @property
    def any_fail(self) -> bool:
        return any(r.status == ANALYTIC_FAIL for r in self.results)

    def to_dict(self):
        return {
            "intensity_bound": None if math.isinf(self.intensity_bound) else self.intensity_bound,
            "n_paths": self.n_paths,
            "conditions": [r.to_dict() for r in self.results],
            "gate": None if self.gate is None else self.gate.to_dict(),
        }


def _mc_moment(x, a):
    with np.errstate(over="ignore"):
        s = np.exp(a * x)
    n = s.size
    mean = float(np.sum(s) / n)
    if not math.isfinite(mean):
        return mean, math.inf
    se = math.sqrt(float(np.sum((s - mean) ** 2)) / max(1, n - 1) / n) if n > 1 else 0.0
    return mean, se


def admissibility_report(model, dist, spec, n_paths: int, rng, phi: float = DEFAULT_PHI,
                         threads: int = 1) -> ConditionReport:
    """Check every integrability condition for (model, dist, spec).

    ``rng`` is a :class:`RandomStream` or an integer seed; it is only used when
    the intensity is unbounded.
    """
    if n_paths < 1:
        raise PreconditionError("n_paths must be at least 1")
    seed = rng.seed if isinstance(rng, RandomStream) else int(rng)
    T = spec.T
    scale = spec.terminal_scale
    scan = scan_beta(phi)
    beta_hat = scan.beta_star

    # (name, kind, exponent); kind "int" is E[e^{a int lambda}], "loss" is E[e^{a J_T}]
    checks = [(f"ass1_eps_{eps:g}", "int", 1.0 + eps) for eps in EPSILON_CANDIDATES]
    checks += [("ass2_intensity", "int", 2.0), ("ass2_loss", "loss", 2.0 * scale)]
    checks += [("lambda_cond_exp", "int", 4.0), ("lambda_cond_square", "square", None)]
    checks += [("weak_loss", "loss", 4.0 * scale)]
    if beta_hat is not None:
        checks += [("weak_intensity", "int", 8.0 * beta_hat)]

    bounded = bool(model.bounded)
    lam_bar = float(model.bound) if bounded else math.inf
    results = []

    if bounded:
        for name, kind, a in checks:
            results.append(_analytic(name, kind, a, lam_bar, T, dist))
        results.append(ConditionResult("gen_intensity", ANALYTIC_PASS, None, None, None, None,
                                       "exp(a Lambda T) finite for every a"))
        if math.isinf(dist.mgf_limit):
            results.append(ConditionResult("gen_loss", ANALYTIC_PASS, None, None, None, None,
                                           "claim mgf finite on the whole line"))
        else:
            results.append(ConditionResult(
                "gen_loss", ANALYTIC_FAIL, dist.mgf_limit, math.inf, None, None,
                f"claim mgf diverges for a >= {dist.mgf_limit!r}",
            ))
    else:
        from prevopt.simulate.engine import simulate_paths

        batch = simulate_paths(model, dist, T, n_paths, seed, threads=threads)
        integral = batch.I0
        J = batch.loss_raw
        sq = None
        for name, kind, a in checks:
            if kind == "square":
                if sq is None:
                    sq = _square_integral(model, dist, T, n_paths, seed, threads)
                m, se = float(np.mean(sq)), float(np.std(sq, ddof=1) / math.sqrt(sq.size)) if sq.size > 1 else 0.0
                results.append(ConditionResult(name, MC_ESTIMATE, None, None, m, se,
                                               "E[int lambda^2 dt] sampled"))
                continue
            x = integral if kind == "int" else J
            m, se = _mc_moment(x, a)
            results.append(ConditionResult(name, MC_ESTIMATE, a, None, m, se, "sampled under P0"))
        for a in GEN_EXPONENTS:
            for kind, x in (("intensity", integral), ("loss", J)):
                m, se = _mc_moment(x, a)
                results.append(ConditionResult(f"gen_{kind}_a_{a:g}", MC_ESTIMATE, a, None, m, se,
                                               "sampled under P0"))
    if beta_hat is None:
        results.append(ConditionResult("weak_intensity", ANALYTIC_FAIL, None, None, None, None,
                                       f"no admissible beta for Phi={phi!r}"))
    return ConditionReport(results, scan, lam_bar, 0 if bounded else n_paths)


def _analytic(name, kind, a, lam_bar, T, dist) -> ConditionResult:
    if kind == "square":
        return ConditionResult(name, ANALYTIC_PASS, None, lam_bar**2 * T, None, None,
                               "E[int lambda^2] <= Lambda^2 T")
    if kind == "int":
        return ConditionResult(name, ANALYTIC_PASS, a, math.exp(min(a * lam_bar * T, 700.0)),
                               None, None, "E[exp(a int lambda)] <= exp(a Lambda T)")
    if a >= dist.mgf_limit:
        return ConditionResult(name, ANALYTIC_FAIL, a, math.inf, None, None,
                               f"claim mgf diverges at a={a!r}")
    m = float(dist.mgf_array(a))
    expo = (m - 1.0) * lam_bar * T
    return ConditionResult(name, ANALYTIC_PASS, a, math.exp(min(expo, 700.0)), None, None,
                           "E[exp(a J_T)] <= exp((E[e^{aZ}] - 1) Lambda T)")


def _square_integral(model, dist, T, n_paths, seed, threads):
    """Per-path int_0^T lambda0^2 dt, by replaying recorded events."""
    from prevopt.simulate.engine import simulate_paths

    batch = simulate_paths(model, dist, T, n_paths, seed, threads=threads, record=True)
    alpha = float(model.alpha)
    out = np.zeros(n_paths)
    ev, ex = batch.events, batch.exogenous
    # event list per path: claims add l(Z), shocks add Z~
    times = np.concatenate([ev["time"], ex["time"]])
    paths = np.concatenate([ev["path"], ex["path"]])
    kicks = np.concatenate([model.excitation(ev["mark"]), ex["mark"]])
    order = np.lexsort((times, paths))
    times, paths, kicks = times[order], paths[order], kicks[order]
    start = np.searchsorted(paths, np.arange(n_paths), side="left")
    stop = np.searchsorted(paths, np.arange(n_paths), side="right")
    beta = model.beta
    for p in range(n_paths):
        a, exc, total = 0.0, model.lambda0 - beta, 0.0
        for t, kick in list(zip(times[start[p]:stop[p]], kicks[start[p]:stop[p]])) + [(T, 0.0)]:
            total += _square_piece(beta, exc, alpha, t - a)
            exc = exc * math.exp(-alpha * (t - a)) + kick
            a = t
        out[p] = total
    return out


def _square_piece(beta, exc, alpha, d):
    """Integral over [0, d] of (beta + exc e^{-alpha s})^2."""
    e1 = -math.expm1(-alpha * d) / alpha
    e2 = -math.expm1(-2.0 * alpha * d) / (2.0 * alpha)
    return beta * beta * d + 2.0 * beta * exc * e1 + exc * exc * e2
