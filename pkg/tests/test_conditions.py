import math

import numpy as np
import pytest

from prevopt.errors import NoAdmissibleBeta
from prevopt.risk_models import (
    ANALYTIC_FAIL,
    ANALYTIC_PASS,
    MC_ESTIMATE,
    ConstantIntensity,
    Contagion,
    Exponential,
    LinearExcitation,
    PointMass,
    admissibility_report,
    find_admissible_beta,
    gate_limit,
    make_markov,
    pps_gate,
    pps_gate_log,
    scan_beta,
)
from conftest import make_spec

import oracles

PHI_OK = 0.9 / (18 * math.e)
PHI_BAD = 2.0 / (18 * math.e)


def test_gate_dual_evaluation_agrees():
    assert pps_gate(0.02, 100.0) == pytest.approx(pps_gate_log(0.02, 100.0), rel=1e-12, abs=0)


def test_gate_matches_high_precision():
    for phi, beta in [(0.02, 100.0), (0.01, 1e6), (PHI_OK, 3.0), (0.5, 1e-2)]:
        assert pps_gate_log(phi, beta) == pytest.approx(oracles.gate_mp(phi, beta), rel=1e-11)


def test_gate_large_beta_limit():
    assert abs(pps_gate(0.01, 1e6) - gate_limit(0.01)) < 1e-3
    assert gate_limit(0.01) == pytest.approx(9 * math.e * 0.01)


def test_scan_finds_admissible_beta():
    scan = find_admissible_beta(PHI_OK)
    assert scan.admissible
    assert scan.value_star < 0.5
    assert pps_gate(PHI_OK, scan.beta_star) == pytest.approx(scan.value_star, rel=1e-12)


def test_scan_fails_above_threshold():
    with pytest.raises(NoAdmissibleBeta):
        find_admissible_beta(PHI_BAD)
    scan = scan_beta(PHI_BAD)
    assert not scan.admissible
    assert np.all(scan.values >= scan.min_value)


def test_scan_grid_shape():
    scan = scan_beta(PHI_OK)
    assert scan.grid.size == 200
    assert scan.grid[0] == pytest.approx(1e-2) and scan.grid[-1] == pytest.approx(1e8)


def test_bounded_reference_setting_passes(base_model, base_dist, base_spec):
    rep = admissibility_report(base_model, base_dist, base_spec, 1, 0)
    for name in ("ass2_intensity", "ass2_loss", "lambda_cond_exp", "lambda_cond_square"):
        assert rep.by_name(name).status == ANALYTIC_PASS


def test_point_mass_bounded_all_general_conditions_pass():
    rep = admissibility_report(make_markov([[-1, 1], [1, -1]], [1, 3]), PointMass(1.0),
                               make_spec(), 1, 0)
    assert {r.status for r in rep.results} == {ANALYTIC_PASS}


def test_heavy_exponential_fails_second_condition():
    rep = admissibility_report(ConstantIntensity(1.0), Exponential(1.0), make_spec(eta=1.0), 1, 0)
    assert rep.by_name("ass2_loss").status == ANALYTIC_FAIL
    assert rep.any_fail


def test_unbounded_model_gives_estimates_only():
    m = Contagion(beta=1.0, alpha=2.0, lambda0=1.0, rho=0.5, shock=PointMass(0.2),
                  excite=LinearExcitation(0.3))
    rep = admissibility_report(m, Exponential(10.0), make_spec(), 500, 3)
    assert all(r.status == MC_ESTIMATE for r in rep.results)
    r = rep.by_name("ass2_intensity")
    assert r.estimate > 1 and r.stderr >= 0
    assert rep.gate.admissible
    assert rep.to_dict()["intensity_bound"] is None
