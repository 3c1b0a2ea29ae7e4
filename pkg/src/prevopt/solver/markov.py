"""Feedback strategies u*(t, y) for non-constant intensities.

When the intensity is a function of a Markov factor that never jumps together
with the claims (Markov-modulated chains, shot-noise Cox), minimising psi
pointwise at each (t, y) yields an optimal feedback strategy.  For the
contagion model the intensity jumps at the claim times themselves, so the
same construction is only a heuristic and is labelled as such.
"""

from __future__ import annotations

import numpy as np

from prevopt.prevention.strategies import FieldStrategy
from prevopt.risk_models.intensity import (
    ConstantIntensity,
    Contagion,
    IntensityModel,
    MarkovModulated,
    intensity_floor,
)
from prevopt.solver.hamiltonian import DEFAULT_GRID, GRID, HamiltonianInputs, minimize_psi

MARKOVIAN = "markovian"
HEURISTIC = "heuristic"


def strategy_label(model: IntensityModel) -> str:
    return HEURISTIC if isinstance(model, Contagion) else MARKOVIAN


def intensity_levels(model: IntensityModel, n_levels: int = 33, top: float | None = None):
    """y-grid for the field: chain levels, or a geometric grid for decaying models."""
    if isinstance(model, ConstantIntensity):
        return np.array([model.rate])
    if isinstance(model, MarkovModulated):
        return np.array(sorted(set(model.levels)))
    lo = intensity_floor(model)
    hi = top if top is not None else 10.0 * max(model.beta, model.lambda0)
    return np.geomspace(lo, hi, n_levels)


def strategy_field(model: IntensityModel, spec, dist, n_times: int = 65, levels=None,
                   method: str = GRID, grid=DEFAULT_GRID) -> FieldStrategy:
    """Tabulate the pointwise minimiser on a (t, y) grid."""
    times = np.linspace(0.0, spec.T, n_times)
    ys = intensity_levels(model) if levels is None else np.asarray(levels, dtype=float)
    u1 = np.empty((times.size, ys.size))
    u2 = np.empty_like(u1)
    bound = model.bound if model.bounded else None
    for i, t in enumerate(times):
        for j, y in enumerate(ys):
            res = minimize_psi(HamiltonianInputs(float(t), float(y), spec, dist), method, grid, bound)
            u1[i, j] = res.effort.u1
            u2[i, j] = res.effort.u2
    return FieldStrategy(times, ys, u1, u2, label=strategy_label(model))
