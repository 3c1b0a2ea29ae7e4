"""Vectorised thinning engine for marked point processes.

Paths are simulated in blocks of ``BLOCK`` paths.  Block ``b`` draws from the
Philox stream ``(seed, b)``, and every iteration of the thinning loop draws a
full block-sized vector of exponentials, uniforms and marks, so path ``i`` of a
block sees the same draws however many paths are requested and however blocks
are scheduled across threads.

Within a block each path alternates between three kinds of steps:

* an exogenous event (chain switch or shock) that occurs before the next
  candidate point is applied and the candidate discarded;
* a candidate past the horizon ends the path;
* otherwise the candidate is accepted as a claim with probability
  ``target / bound`` where ``target`` is the pre-control intensity (measure P0)
  or gamma1(u1) times it (controlled measure).

The envelope ``bound = max(lambda(t), base)`` dominates the intensity until the
next event because between events the intensity relaxes monotonically toward
``base``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from prevopt.risk_models.claims import ClaimDistribution
from prevopt.risk_models.intensity import IntensityModel
from prevopt.rng import RandomStream
from prevopt.simulate.integrals import StrategyIntegrator, base_integral

BLOCK = 4096

P0 = "P0"
CONTROLLED = "Pu"


@dataclass
class BlockResult:
    """Per-path totals for one block plus optional flat event records."""

    counts: np.ndarray
    I0: np.ndarray
    Iu: np.ndarray
    cost: np.ndarray
    loss_u: np.ndarray
    loss_raw: np.ndarray
    log_gamma: np.ndarray
    n_candidates: np.ndarray
    n_rejected: np.ndarray
    events: Optional[dict] = None
    exogenous: Optional[dict] = None


_EVENT_KEYS = ("path", "time", "mark", "lam_minus", "lam_plus", "u1", "u2", "I0")


def simulate_block(
    model: IntensityModel,
    dist: ClaimDistribution,
    T: float,
    rng: RandomStream,
    width: int,
    integrator: StrategyIntegrator,
    measure: str = P0,
    record: bool = False,
) -> BlockResult:
    """Simulate ``width`` paths on [0, T] from one random stream."""
    gen = rng.claims
    exo = model.exogenous(rng.exogenous, width, T)
    K = exo.times.shape[1]
    alpha = float(model.alpha)
    spec = integrator.spec
    r = 0.0 if spec is None else spec.r
    controlled = measure == CONTROLLED

    t = np.zeros(width)
    base, exc, chain = model.init_block(width)
    base = base.astype(float)
    exc = exc.astype(float)
    k = np.zeros(width, dtype=np.int64)
    active = np.ones(width, dtype=bool)
    rows = np.arange(width)

    counts = np.zeros(width, dtype=np.int64)
    I0 = np.zeros(width)
    Iu = np.zeros(width)
    cost = np.zeros(width)
    loss_u = np.zeros(width)
    loss_raw = np.zeros(width)
    log_gamma = np.zeros(width)
    n_cand = np.zeros(width, dtype=np.int64)
    n_rej = np.zeros(width, dtype=np.int64)
    rec = {key: [] for key in _EVENT_KEYS} if record else None

    while active.any():
        E = gen.standard_exponential(width)
        U = gen.random(width)
        Z = dist.sample(gen, width)

        idx = np.flatnonzero(active)
        ta, ba, ea = t[idx], base[idx], exc[idx]
        bound = np.maximum(ba + ea, ba)
        cand = ta + E[idx] / bound
        kk = k[idx]
        te = np.where(kk < K, exo.times[idx, np.minimum(kk, K - 1)], np.inf)

        exo_first = te <= np.minimum(cand, T)
        ends = ~exo_first & (cand > T)
        is_cand = ~(exo_first | ends)
        tn = np.where(exo_first, te, np.where(ends, T, cand))

        I0[idx] += base_integral(ba, ea, alpha, ta, tn)
        iu, seg_cost = integrator.segment(ta, tn, ba, ea)
        Iu[idx] += iu
        if seg_cost is not None:
            cost[idx] += seg_cost
        ea = ea * np.exp(-alpha * (tn - ta)) if alpha > 0 else ea
        lam_minus = ba + ea

        # thinning decision for candidate points
        ci = np.flatnonzero(is_cand)
        u1, u2, g1, g2 = integrator.at(tn[ci], lam_minus[ci])
        target = lam_minus[ci] * g1 if controlled else lam_minus[ci]
        accept = U[idx[ci]] * bound[ci] <= target
        n_cand[idx[ci]] += 1
        n_rej[idx[ci[~accept]]] += 1

        acc = ci[accept]
        pa = idx[acc]
        za = Z[pa]
        ga1, ga2 = g1[accept], g2[accept]
        growth = np.exp(r * (T - tn[acc]))
        counts[pa] += 1
        loss_u[pa] += ga2 * growth * za
        loss_raw[pa] += growth * za
        log_gamma[pa] += np.log(ga1)
        kick = model.excitation(za)
        ea[acc] += kick

        t[idx] = tn
        exc[idx] = ea
        if record and acc.size:
            rec["path"].append(pa)
            rec["time"].append(tn[acc])
            rec["mark"].append(za)
            rec["lam_minus"].append(lam_minus[acc])
            rec["lam_plus"].append(lam_minus[acc] + kick)
            rec["u1"].append(u1[accept])
            rec["u2"].append(u2[accept])
            rec["I0"].append(I0[pa])

        hit = idx[exo_first]
        if hit.size:
            mask = np.zeros(width, dtype=bool)
            mask[hit] = True
            slot = np.minimum(k, K - 1)
            marks = exo.marks[rows, slot]
            states = None if exo.states is None else exo.states[rows, slot]
            model.apply_exogenous(mask, marks, states, base, exc, chain)
            k[hit] += 1

        active[idx[ends]] = False

    if integrator.deterministic_cost:
        cost[:] = float(integrator.cost_until(np.array(T)))

    events = None
    exogenous = None
    if record:
        events = _sort_events(rec)
        finite = np.isfinite(exo.times) & (exo.times <= T)
        p, s = np.nonzero(finite)
        exogenous = {
            "path": p,
            "time": exo.times[p, s],
            "mark": exo.marks[p, s],
            "state": None if exo.states is None else exo.states[p, s],
        }
    return BlockResult(
        counts, I0, Iu, cost, loss_u, loss_raw, log_gamma, n_cand, n_rej, events, exogenous
    )


def _sort_events(rec):
    if not rec["path"]:
        return {key: np.zeros(0, dtype=np.int64 if key == "path" else float) for key in _EVENT_KEYS}
    cat = {key: np.concatenate(v) for key, v in rec.items()}
    order = np.argsort(cat["path"], kind="stable")
    return {key: v[order] for key, v in cat.items()}


@dataclass
class PathBatch:
    """Totals for ``n`` paths in path order; events carry global path indices."""

    n: int
    T: float
    counts: np.ndarray
    I0: np.ndarray
    Iu: np.ndarray
    cost: np.ndarray
    loss_u: np.ndarray
    loss_raw: np.ndarray
    log_gamma: np.ndarray
    n_candidates: np.ndarray
    n_rejected: np.ndarray
    measure: str
    integrator: StrategyIntegrator
    events: Optional[dict] = None
    exogenous: Optional[dict] = None

    @property
    def log_weight(self):
        """log L^u_T for each path (meaningful for P0 samples)."""
        return -(self.Iu - self.I0) + self.log_gamma

    def Y(self):
        """Auxiliary terminal wealth Y^u_T."""
        return -self.cost - self.loss_u


def simulate_paths(
    model: IntensityModel,
    dist: ClaimDistribution,
    T: float,
    n_paths: int,
    seed: int,
    strategy=None,
    spec=None,
    measure: str = P0,
    threads: int = 1,
    record: bool = False,
    block_size: int = BLOCK,
) -> PathBatch:
    """Simulate ``n_paths`` paths; results depend only on (seed, path index)."""
    if n_paths < 1:
        raise ValueError("n_paths must be at least 1")
    alpha = float(model.alpha)
    integrator = StrategyIntegrator(strategy, spec, T, alpha)
    n_blocks = -(-n_paths // block_size)

    def run(b):
        res = simulate_block(
            model, dist, T, RandomStream(seed, b), block_size, integrator, measure, record
        )
        keep = min(block_size, n_paths - b * block_size)
        return b, keep, res

    if threads > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(n_blocks)))
    else:
        results = [run(b) for b in range(n_blocks)]

    fields = ("counts", "I0", "Iu", "cost", "loss_u", "loss_raw", "log_gamma",
              "n_candidates", "n_rejected")
    stacked = {f: np.concatenate([getattr(res, f)[:keep] for _, keep, res in results]) for f in fields}

    events = exogenous = None
    if record:
        events = _merge(results, block_size, "events")
        exogenous = _merge(results, block_size, "exogenous")
    return PathBatch(n_paths, T, measure=measure, integrator=integrator, events=events,
                     exogenous=exogenous, **stacked)


def _merge(results, block_size, attr):
    parts = []
    for b, keep, res in results:
        d = getattr(res, attr)
        sel = d["path"] < keep
        parts.append({k: (None if v is None else (v[sel] + b * block_size if k == "path" else v[sel]))
                      for k, v in d.items()})
    out = {}
    for key in parts[0]:
        if parts[0][key] is None:
            out[key] = None
        else:
            out[key] = np.concatenate([p[key] for p in parts])
    return out
