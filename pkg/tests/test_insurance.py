import math

import numpy as np
import pytest

from prevopt.errors import ContractError, PreconditionError
from prevopt.insurance import (
    InsuranceContract,
    comparative_statics,
    optimal_retention,
    self_protection_spec,
    value_inner,
)
from prevopt.risk_models import Exponential
from prevopt.solver import value_function_constant
from conftest import make_spec

M = 128
N1 = 51
THETAS = np.linspace(0.0, 1.0, 11)


@pytest.fixture(scope="module")
def spec():
    return make_spec(r=0.05, x0=0.3)


@pytest.fixture(scope="module")
def dist():
    return Exponential(10.0)


def test_full_cover_gives_unit_inner_value(spec, dist):
    iv = value_inner(0.0, InsuranceContract(), spec, 1.0, dist, M, N1)
    assert iv.value == 1.0 and iv.phi0 == 1.0


def test_no_cover_matches_self_protection_solver(spec, dist):
    iv = value_inner(1.0, InsuranceContract(kappa=0.3), spec, 1.0, dist, M, N1)
    ref = value_function_constant(self_protection_spec(spec), 1.0, dist, M, grid=(N1, 2)).phi0
    assert iv.value == pytest.approx(ref, rel=1e-10)


def test_reimbursement_scales_by_exponential_factor(spec, dist):
    c0 = InsuranceContract(kappa=0.5)
    c1 = InsuranceContract(kappa=0.5, rho_r=0.4)
    a = value_inner(0.6, c0, spec, 1.0, dist, M, N1)
    b = value_inner(0.6, c1, spec, 1.0, dist, M, N1)
    delta = b.xi
    assert delta > 0
    assert b.value == pytest.approx(a.value * math.exp(-spec.eta * delta), rel=1e-12)


def test_inner_value_increases_with_retention(spec, dist):
    c = InsuranceContract()
    vals = [value_inner(float(t), c, spec, 1.0, dist, M, N1).value for t in THETAS]
    assert np.all(np.diff(vals) >= -1e-14)


def test_free_insurance_is_full_insurance(spec, dist):
    c = InsuranceContract(premium_fn=lambda th: 0.0, xi_fn=lambda th: 0.0)
    res = optimal_retention(c, spec, 1.0, dist, THETAS, M, n_effort=N1)
    assert res.theta_star == 0.0
    assert res.value == pytest.approx(math.exp(-spec.eta * spec.x0 * math.exp(spec.r * spec.T)), rel=1e-12)


def test_prohibitive_loading_means_no_cover(spec, dist):
    res = optimal_retention(InsuranceContract(kappa=1e3), spec, 1.0, dist, THETAS, M, n_effort=N1)
    assert res.theta_star == 1.0


def test_curve_csv_flags_the_optimum(spec, dist):
    res = optimal_retention(InsuranceContract(kappa=1e3), spec, 1.0, dist, THETAS, M, n_effort=N1)
    lines = res.curve_csv(["k=v"]).splitlines()
    assert lines[0] == "# k=v"
    assert lines[1] == "theta,premium,xi,v_inner,objective,is_optimal"
    flags = [int(l.rsplit(",", 1)[1]) for l in lines[2:]]
    assert sum(flags) == 1 and flags[-1] == 1


def test_premium_formula(spec, dist):
    c = InsuranceContract(kappa=0.2, lam_ref=2.0)
    expect = 1.2 * 0.5 * 0.1 * 2.0 * 1.0 * math.exp(-0.05)
    assert c.premium(0.5, spec, dist) == pytest.approx(expect, rel=1e-14)
    assert c.premium(1.0, spec, dist) == 0.0


@pytest.mark.parametrize("kw", [dict(kappa=-0.1), dict(rho_r=1.5), dict(rho_r=-0.1), dict(lam_ref=-1)])
def test_invalid_contract(kw):
    with pytest.raises(ContractError):
        InsuranceContract(**kw)


def test_excess_reimbursement_rejected(spec, dist):
    c = InsuranceContract(xi_fn=lambda th: 10.0)
    with pytest.raises(ContractError):
        c.reimbursement(0.5, spec, dist)
    with pytest.raises(ContractError):
        InsuranceContract(premium_fn=lambda th: -1.0).premium(0.5, spec, dist)


def test_retention_outside_unit_interval(spec, dist):
    with pytest.raises(PreconditionError):
        value_inner(1.2, InsuranceContract(), spec, 1.0, dist, M, N1)
    with pytest.raises(PreconditionError):
        optimal_retention(InsuranceContract(), spec, 1.0, dist, [0.5, 2.0], M)


def test_comparative_statics_rows(spec, dist):
    rows = comparative_statics([0.0, 1e3], InsuranceContract(), spec, 1.0, dist, THETAS, M, N1)
    assert [r[0] for r in rows] == [0.0, 1e3]
    assert rows[-1][1] == 1.0
    assert all(0.0 <= r[2] <= spec.zeta1 for r in rows)
