import math

import numpy as np
import pytest

from prevopt.errors import PreconditionError
from prevopt.risk_models import (
    CappedExcitation,
    ConstantIntensity,
    Contagion,
    HistoryState,
    LinearExcitation,
    PointMass,
    ShotNoiseCox,
    intensity_at,
    intensity_dominating_bound,
    intensity_floor,
    make_markov,
)

import oracles


def contagion(**kw):
    base = dict(beta=1.0, alpha=1.0, lambda0=3.0, rho=0.0, shock=PointMass(1.0),
                excite=LinearExcitation(1.0))
    base.update(kw)
    return Contagion(**base)


def test_constant_intensity_everywhere():
    m = ConstantIntensity(2.0)
    assert intensity_at(m, HistoryState(0.0), 5.0) == 2.0
    assert intensity_dominating_bound(m, HistoryState(0.0), 1.0) == 2.0


def test_contagion_baseline_decay():
    assert intensity_at(contagion(), HistoryState(0.0), math.log(2)) == pytest.approx(2.0, rel=1e-15)


def test_contagion_jumps_by_excitation_at_claim():
    m = contagion()
    before = intensity_at(m, HistoryState(0.0), 0.5)
    after = intensity_at(m, HistoryState(0.5, claims=((0.5, 1.0),)), 0.5)
    assert after - before == pytest.approx(1.0, abs=1e-14)


def test_shock_adds_its_mark():
    m = contagion(rho=1.0)
    before = intensity_at(m, HistoryState(0.0), 0.3)
    after = intensity_at(m, HistoryState(0.3, shocks=((0.3, 0.7),)), 0.3)
    assert after - before == pytest.approx(0.7, abs=1e-14)


def test_capped_excitation():
    ell = CappedExcitation(2.0, 1.5)
    assert float(ell(3.0)) == 3.0
    assert float(ell(0.5)) == 1.0


def test_intensity_matches_oracle_on_history():
    m = contagion(rho=0.5, excite=LinearExcitation(0.8))
    claims = ((0.2, 0.5), (0.9, 1.5))
    shocks = ((0.4, 2.0),)
    h = HistoryState(1.0, claims, shocks)
    ref = oracles.contagion_intensity(1.0, 3.0, 1.0, 1.7, claims, shocks, lambda z: 0.8 * z)
    assert intensity_at(m, h, 1.7) == pytest.approx(ref, rel=1e-14)


def test_contagion_bound_is_current_value_above_beta():
    m = contagion(lambda0=5.0)
    assert intensity_dominating_bound(m, HistoryState(0.0), 1.0) == 5.0
    low = contagion(lambda0=0.2)
    assert intensity_dominating_bound(low, HistoryState(0.0), 1.0) == 1.0


def test_markov_bound_and_levels():
    m = make_markov([[-1.0, 1.0], [2.0, -2.0]], [1.0, 4.0])
    assert intensity_dominating_bound(m, HistoryState(0.0), 1.0) == 4.0
    assert m.bounded and m.bound == 4.0
    assert intensity_at(m, HistoryState(0.0, state=1), 0.2) == 4.0
    assert intensity_floor(m) == 1.0


def test_markov_generator_is_validated():
    with pytest.raises(PreconditionError):
        make_markov([[-1.0, 2.0], [2.0, -2.0]], [1.0, 4.0])
    with pytest.raises(PreconditionError):
        make_markov([[1.0, -1.0], [2.0, -2.0]], [1.0, 4.0])


def test_history_must_be_ordered():
    with pytest.raises(PreconditionError):
        HistoryState(1.0, claims=((0.5, 1.0), (0.4, 1.0)))
    with pytest.raises(PreconditionError):
        HistoryState(0.3, claims=((0.5, 1.0),))
    with pytest.raises(PreconditionError):
        intensity_at(ConstantIntensity(1.0), HistoryState(1.0), 0.5)


def test_floor_of_shot_noise():
    m = ShotNoiseCox(beta=2.0, alpha=1.0, lambda0=0.5, rho=1.0, shock=PointMass(1.0))
    assert intensity_floor(m) == 0.5
    assert not m.bounded and np.isinf(m.bound)
