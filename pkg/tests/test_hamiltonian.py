import math

import numpy as np
import pytest

from prevopt.errors import DivergentMGF, NotApplicable
from prevopt.prevention import Effort, ExpImpact, NoImpact, ZeroCost
from prevopt.risk_models import Exponential, PointMass
from prevopt.solver import (
    FOC_NEWTON,
    HamiltonianInputs,
    foc_newton,
    grid_minimum,
    minimize_psi,
    psi,
    psi_gradient,
    psi_hessian,
)
from conftest import example_one, make_spec

import oracles


def test_null_effort_point_mass():
    spec = make_spec(eta=0.7)
    inp = HamiltonianInputs(0.0, 2.0, spec, PointMass(1.5))
    assert psi(inp, Effort(0.0, 0.0)) == pytest.approx(2.0 * math.expm1(0.7 * 1.5), rel=1e-14)


def test_full_severity_mitigation_leaves_costs_only():
    spec = make_spec(r=0.1)
    inp = HamiltonianInputs(0.3, 2.0, spec, Exponential(10.0))
    a = 0.5 * math.exp(0.1 * 0.7)
    assert psi(inp, Effort(0.4, 1.0)) == pytest.approx(a * (0.16 + 1.0), rel=1e-14)


def test_psi_matches_scalar_oracle():
    spec = make_spec(alpha=0.8, r=0.2)
    inp = HamiltonianInputs(0.25, 1.7, spec, Exponential(4.0))
    for u in [(0.0, 0.0), (0.3, 0.6), (1.0, 1.0)]:
        ref = oracles.psi_scalar(0.25, 1.7, 0.5, 0.2, 1.0, lambda a: 4 / (4 - a),
                                 lambda x: math.exp(-0.8 * x), lambda y: 1 - y,
                                 lambda x: x * x, lambda y: y * y, *u)
        assert psi(inp, Effort(*u)) == pytest.approx(ref, rel=1e-13)


def test_psi_divergence_is_raised():
    spec = make_spec(eta=2.0)
    with pytest.raises(DivergentMGF):
        psi(HamiltonianInputs(0.0, 1.0, spec, Exponential(1.0)), Effort(0.0, 0.0))


def test_zero_cost_psi_non_increasing_in_self_protection():
    spec = make_spec(cost1=ZeroCost(), cost2=ZeroCost())
    inp = HamiltonianInputs(0.0, 1.0, spec, Exponential(10.0))
    vals = [psi(inp, Effort(x, 0.2)) for x in np.linspace(0, 1, 50)]
    assert np.all(np.diff(vals) <= 0)


def test_grid_matches_brute_force_oracle(base_spec, base_dist):
    inp = HamiltonianInputs(0.0, 1.0, base_spec, base_dist)
    res = grid_minimum(inp, 201, 201)
    fn = lambda x, y: oracles.psi_scalar(0.0, 1.0, 0.5, 0.0, 1.0, lambda a: 10 / (10 - a),
                                         lambda u: math.exp(-u), lambda u: 1 - u,
                                         lambda u: u * u, lambda u: u * u, x, y)
    arg, best = oracles.lattice_argmin(fn, 1.0, 1.0, 201, 201)
    assert res.effort.as_tuple() == pytest.approx(arg, abs=1e-15)
    assert res.value == pytest.approx(best, rel=1e-14)
    # frozen from the oracle above
    assert res.effort.as_tuple() == pytest.approx((0.045, 0.055), abs=1e-15)
    assert res.value == pytest.approx(0.049936053284297115, rel=1e-13)


def test_grid_never_worse_than_corners(base_spec, base_dist):
    inp = HamiltonianInputs(0.0, 3.0, base_spec, base_dist)
    res = grid_minimum(inp, 37, 23)
    for c in [(0, 0), (0, 1), (1, 0), (1, 1)]:
        assert res.value <= psi(inp, Effort(*c))


def test_prohibitive_costs_give_no_effort():
    spec = make_spec(cost_scale=1e6)
    res = minimize_psi(HamiltonianInputs(0.0, 1.0, spec, Exponential(10.0)), grid=(200, 200))
    assert res.effort.as_tuple() == (0.0, 0.0)


def test_free_effort_removes_severity():
    spec = make_spec(cost_scale=1e-6)
    res = minimize_psi(HamiltonianInputs(0.0, 1.0, spec, Exponential(10.0)), grid=(200, 200))
    assert res.effort.u2 == 1.0


def test_ties_go_to_smallest_effort():
    spec = make_spec(impact1=NoImpact(), impact2=NoImpact(), cost1=ZeroCost(), cost2=ZeroCost())
    res = grid_minimum(HamiltonianInputs(0.0, 1.0, spec, Exponential(10.0)), 11, 11)
    assert res.effort.as_tuple() == (0.0, 0.0)


def test_derivatives_against_finite_differences():
    spec = example_one(r=0.2)
    inp = HamiltonianInputs(0.3, 1.0, spec, Exponential(10.0))
    x, h = np.array([0.4, 0.3]), 1e-5
    f = lambda v: psi(inp, Effort(*v))
    num_g = [(f(x + h * e) - f(x - h * e)) / (2 * h) for e in np.eye(2)]
    np.testing.assert_allclose(psi_gradient(inp, *x), num_g, rtol=1e-7)
    H = psi_hessian(inp, *x)
    num_H = np.array([[(f(x + h * (ei + ej)) - f(x + h * (ei - ej)) - f(x - h * (ei - ej))
                        + f(x - h * (ei + ej))) / (4 * h * h) for ej in np.eye(2)] for ei in np.eye(2)])
    np.testing.assert_allclose(H, num_H, rtol=1e-4, atol=1e-6)


def test_newton_matches_fine_grid_on_example_one():
    spec = example_one()
    inp = HamiltonianInputs(0.0, 1.0, spec, Exponential(10.0))
    n = minimize_psi(inp, FOC_NEWTON)
    g = grid_minimum(inp, 400, 400)
    assert abs(n.effort.u1 - g.effort.u1) <= spec.zeta1 / 399
    assert abs(n.effort.u2 - g.effort.u2) <= spec.zeta2 / 399
    assert n.value <= g.value + 1e-12


def test_newton_satisfies_clamped_first_order_conditions():
    cases = [
        (example_one(), Exponential(10.0)),
        (make_spec(alpha=0.5, eta=1.0, zeta1=2.0, cost_scale=50.0), Exponential(10.0)),
        (make_spec(alpha=0.5, eta=1.0, zeta1=0.1), Exponential(2.0)),
    ]
    for spec, dist in cases:
        inp = HamiltonianInputs(0.0, 1.0, spec, dist)
        res = foc_newton(inp)
        x = res.effort.as_tuple()
        g = psi_gradient(inp, *x)
        for k, top in enumerate((spec.zeta1, spec.zeta2)):
            interior = abs(g[k]) <= 1e-8
            low = x[k] == 0.0 and g[k] > 0
            high = x[k] == top and g[k] < 0
            assert interior or low or high


def test_newton_refuses_when_gate_fails():
    with pytest.raises(NotApplicable):
        foc_newton(HamiltonianInputs(0.0, 1.0, example_one(alpha=2.0), Exponential(10.0)))
    with pytest.raises(NotApplicable):
        foc_newton(HamiltonianInputs(0.0, 1.0, make_spec(impact2=ExpImpact(1.0)), Exponential(10.0)))
