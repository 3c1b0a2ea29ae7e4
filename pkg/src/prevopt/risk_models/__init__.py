"""Claim-size laws, intensity models and integrability conditions."""

from prevopt.risk_models.claims import (
    ClaimDistribution,
    Exponential,
    PointMass,
    ScaledClaim,
    Uniform,
    claim_mgf,
    sample_claim,
)
from prevopt.risk_models.conditions import (
    ANALYTIC_FAIL,
    ANALYTIC_PASS,
    MC_ESTIMATE,
    BetaScan,
    ConditionReport,
    ConditionResult,
    admissibility_report,
    find_admissible_beta,
    gate_limit,
    pps_gate,
    pps_gate_log,
    scan_beta,
)
from prevopt.risk_models.intensity import (
    CappedExcitation,
    ConstantIntensity,
    Contagion,
    HistoryState,
    IntensityModel,
    LinearExcitation,
    MarkovModulated,
    ShotNoiseCox,
    intensity_at,
    intensity_dominating_bound,
    intensity_floor,
    make_markov,
)

__all__ = [
    "ANALYTIC_FAIL",
    "ANALYTIC_PASS",
    "BetaScan",
    "CappedExcitation",
    "ClaimDistribution",
    "ConditionReport",
    "ConditionResult",
    "ConstantIntensity",
    "Contagion",
    "Exponential",
    "HistoryState",
    "IntensityModel",
    "LinearExcitation",
    "MC_ESTIMATE",
    "MarkovModulated",
    "PointMass",
    "ScaledClaim",
    "ShotNoiseCox",
    "Uniform",
    "admissibility_report",
    "claim_mgf",
    "find_admissible_beta",
    "gate_limit",
    "intensity_at",
    "intensity_dominating_bound",
    "intensity_floor",
    "make_markov",
    "pps_gate",
    "pps_gate_log",
    "sample_claim",
    "scan_beta",
]
