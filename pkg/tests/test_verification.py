import numpy as np
import pytest

from prevopt.errors import PreconditionError
from prevopt.prevention import NULL_STRATEGY, ConstantStrategy
from prevopt.risk_models import Contagion, Exponential, LinearExcitation, PointMass, make_markov
from prevopt.solver import (
    HEURISTIC,
    MARKOVIAN,
    HamiltonianInputs,
    bellman_residual_check,
    minimize_psi,
    strategy_field,
    strategy_label,
    value_function_constant,
)
from conftest import make_spec


@pytest.fixture(scope="module")
def setting():
    from prevopt.risk_models import ConstantIntensity

    spec, model, dist = make_spec(), ConstantIntensity(1.0), Exponential(10.0)
    return spec, model, dist, value_function_constant(spec, 1.0, dist)


def test_optimal_strategy_is_a_martingale(setting):
    spec, model, dist, tab = setting
    rep = bellman_residual_check(model, dist, spec, tab, tab.strategy(), 20_000, 4)
    assert rep.martingale_ok and rep.terminal_ok and rep.passed
    assert len(rep.mean_increments) == 20


def test_null_strategy_drifts_upward(setting):
    spec, model, dist, tab = setting
    rep = bellman_residual_check(model, dist, spec, tab, NULL_STRATEGY, 50_000, 5, expect_optimal=False)
    assert rep.submartingale_ok and rep.strict_drift and rep.passed


def test_wrong_corner_breaks_the_martingale(setting):
    spec, model, dist, tab = setting
    rep = bellman_residual_check(model, dist, spec, tab, ConstantStrategy(1.0, 1.0), 2000, 6)
    assert not rep.martingale_ok
    assert rep.total_drift > 0


def test_preconditions(setting):
    spec, model, dist, tab = setting
    with pytest.raises(PreconditionError):
        bellman_residual_check(model, dist, spec, tab, NULL_STRATEGY, 50, 1)
    m = Contagion(beta=1, alpha=1, lambda0=1, rho=0, shock=PointMass(1), excite=LinearExcitation(1))
    with pytest.raises(PreconditionError):
        bellman_residual_check(m, dist, spec, tab, NULL_STRATEGY, 500, 1)


def test_markov_field_is_pointwise_minimiser():
    spec, dist = make_spec(), Exponential(10.0)
    m = make_markov([[-1, 1], [1, -1]], [1.0, 4.0])
    fld = strategy_field(m, spec, dist, n_times=5, grid=(41, 41))
    assert fld.label == MARKOVIAN == strategy_label(m)
    res = minimize_psi(HamiltonianInputs(0.0, 4.0, spec, dist), grid=(41, 41))
    u1, u2 = fld.effort(np.array([0.0]), np.array([4.0]))
    assert (float(u1[0]), float(u2[0])) == res.effort.as_tuple()
    # more risk calls for at least as much self-protection
    assert np.all(fld.u1[:, 1] >= fld.u1[:, 0])


def test_contagion_field_is_labelled_heuristic():
    m = Contagion(beta=1, alpha=1, lambda0=1, rho=0, shock=PointMass(1), excite=LinearExcitation(1))
    fld = strategy_field(m, make_spec(), Exponential(10.0), n_times=3, levels=[1.0, 2.0], grid=(11, 11))
    assert fld.label == HEURISTIC == strategy_label(m)
