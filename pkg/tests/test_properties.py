"""Property-based checks of structural invariants."""

import math

import numpy as np
from hypothesis import HealthCheck, given, settings, strategies as st

from prevopt.prevention import ConstantStrategy, Effort
from prevopt.risk_models import (
    Contagion,
    Exponential,
    HistoryState,
    LinearExcitation,
    PointMass,
    Uniform,
    intensity_at,
    intensity_dominating_bound,
    intensity_floor,
)
from prevopt.rng import RandomStream
from prevopt.simulate import simulate_path_controlled, simulate_paths, wealth_terminal
from prevopt.solver import ExplicitJump, HamiltonianInputs, generator_f, grid_minimum, psi_array
from conftest import make_spec

FAST = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
pos = st.floats(0.05, 5.0)
unit = st.floats(0.0, 1.0)

laws = st.one_of(
    st.builds(Exponential, st.floats(1.0, 50.0)),
    st.builds(PointMass, st.floats(0.01, 3.0)),
    st.builds(lambda lo, w: Uniform(lo, lo + w), st.floats(0.0, 2.0), st.floats(0.01, 2.0)),
)


@FAST
@given(laws)
def test_mgf_at_zero_is_one(dist):
    assert float(dist.mgf_array(0.0)) == 1.0


@st.composite
def histories(draw):
    beta, lam0, alpha = draw(pos), draw(pos), draw(pos)
    model = Contagion(beta=beta, alpha=alpha, lambda0=lam0, rho=0.0, shock=PointMass(1.0),
                      excite=LinearExcitation(draw(st.floats(0.0, 2.0))))
    n = draw(st.integers(0, 6))
    gaps = draw(st.lists(st.floats(0.01, 0.5), min_size=n, max_size=n))
    times = np.cumsum(gaps)
    marks = draw(st.lists(st.floats(0.0, 2.0), min_size=n, max_size=n))
    now = float(times[-1]) if n else 0.0
    return model, HistoryState(now, tuple(zip(times, marks)))


@FAST
@given(histories(), st.lists(st.floats(0.0, 3.0), min_size=1, max_size=8))
def test_intensity_bound_dominates_and_floor_holds(hist, offsets):
    model, h = hist
    horizon = h.time + 3.0
    cap = intensity_dominating_bound(model, h, horizon)
    low = intensity_floor(model)
    for d in offsets:
        lam = intensity_at(model, h, h.time + d)
        assert lam <= cap * (1 + 1e-12)
        assert lam >= low * (1 - 1e-12)


@FAST
@given(st.floats(0.0, 1.0), st.floats(-3.0, 3.0), st.floats(-2.0, 2.0), st.floats(0.0, 0.4), pos, laws)
def test_generator_vanishes_without_effort(t, R, K, b, lam, dist):
    spec = make_spec(r=0.05)
    assert generator_f(t, R, ExplicitJump(K, b), Effort(0.0, 0.0), lam, spec, dist) == 0.0


@FAST
@given(st.floats(0.0, 1.0), pos, st.builds(Exponential, st.floats(2.0, 50.0)),
       st.integers(2, 15), st.integers(2, 15))
def test_grid_minimum_beats_every_lattice_point(t, lam, dist, n1, n2):
    spec = make_spec()
    inp = HamiltonianInputs(t, lam, spec, dist)
    res = grid_minimum(inp, n1, n2)
    u1 = np.linspace(0, spec.zeta1, n1)[:, None]
    u2 = np.linspace(0, spec.zeta2, n2)[None, :]
    vals = psi_array(inp, u1, u2)
    assert res.value <= vals.min() + 1e-15
    for c in (vals[0, 0], vals[0, -1], vals[-1, 0], vals[-1, -1]):
        assert res.value <= c


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 300))
def test_simulation_is_deterministic_in_seed(seed, n):
    dist = Exponential(5.0)
    model = Contagion(beta=1.0, alpha=2.0, lambda0=1.0, rho=0.5, shock=PointMass(0.5),
                      excite=LinearExcitation(0.5))
    a = simulate_paths(model, dist, 1.0, n, seed)
    a2 = simulate_paths(model, dist, 1.0, n, seed)
    assert np.array_equal(a.I0, a2.I0) and np.array_equal(a.log_gamma, a2.log_gamma)
    b = simulate_paths(model, dist, 1.0, n, seed, threads=2, block_size=64)
    c = simulate_paths(model, dist, 1.0, n, seed, block_size=64)
    assert np.array_equal(b.counts, c.counts) and np.array_equal(b.loss_raw, c.loss_raw)
    assert a.n == n and np.all(a.I0 > 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(-2.0, 2.0), st.floats(0.0, 0.3), unit, unit)
def test_wealth_decomposition(seed, x0, r, u1, u2):
    from prevopt.risk_models import ConstantIntensity

    spec = make_spec(x0=x0, r=r)
    strat = ConstantStrategy(u1, u2)
    path = simulate_path_controlled(ConstantIntensity(2.0), Exponential(4.0), strat, spec, 1.0,
                                    RandomStream(seed))
    X, Y = wealth_terminal(path, strat, spec)
    assert X == x0 * math.exp(r) + Y
    assert Y <= 0.0
