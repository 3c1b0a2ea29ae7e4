"""Path simulation, likelihood weights and Monte Carlo estimators."""

from prevopt.simulate.engine import BLOCK, CONTROLLED, P0, PathBatch, simulate_paths
from prevopt.simulate.estimators import (
    CSV_COLUMNS,
    DIRECT,
    WEIGHTED,
    CompensatorReport,
    MCResult,
    compensator_check,
    estimate_expected_utility,
    mean_and_stderr,
)
from prevopt.simulate.paths import (
    MarkedPath,
    log_likelihood_weight,
    simulate_path_P0,
    simulate_path_controlled,
    wealth_terminal,
)
from prevopt.simulate.residuals import TimeChangeReport, time_change_test, transformed_interarrivals

__all__ = [
    "BLOCK",
    "CONTROLLED",
    "CSV_COLUMNS",
    "CompensatorReport",
    "DIRECT",
    "MCResult",
    "MarkedPath",
    "P0",
    "PathBatch",
    "TimeChangeReport",
    "WEIGHTED",
    "compensator_check",
    "estimate_expected_utility",
    "log_likelihood_weight",
    "mean_and_stderr",
    "simulate_path_P0",
    "simulate_path_controlled",
    "simulate_paths",
    "time_change_test",
    "transformed_interarrivals",
    "wealth_terminal",
]
