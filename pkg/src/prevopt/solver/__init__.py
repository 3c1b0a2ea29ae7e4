"""Hamiltonian minimisation, value functions, the BSDE generator and verification."""

from prevopt.solver.bsde import (
    BSDEState,
    ExplicitJump,
    explicit_bsde_triple,
    generator_f,
    generator_f_self_protection,
    generator_sup,
    generator_sup_identity,
    terminal_condition,
)
from prevopt.solver.hamiltonian import (
    DEFAULT_GRID,
    FOC_NEWTON,
    GRID,
    HamiltonianInputs,
    Minimum,
    foc_newton,
    grid_minimum,
    grid_minimum_batch,
    minimize_psi,
    psi,
    psi_array,
    psi_gradient,
    psi_hessian,
)
from prevopt.solver.markov import HEURISTIC, MARKOVIAN, strategy_field, strategy_label
from prevopt.solver.value_function import (
    ValueFunctionTable,
    backward_simpson,
    value_function_constant,
)
from prevopt.solver.verification import SubmartingaleReport, bellman_residual_check, value_process

__all__ = [
    "BSDEState",
    "DEFAULT_GRID",
    "ExplicitJump",
    "FOC_NEWTON",
    "GRID",
    "HEURISTIC",
    "HamiltonianInputs",
    "MARKOVIAN",
    "Minimum",
    "SubmartingaleReport",
    "ValueFunctionTable",
    "backward_simpson",
    "bellman_residual_check",
    "explicit_bsde_triple",
    "foc_newton",
    "generator_f",
    "generator_f_self_protection",
    "generator_sup",
    "generator_sup_identity",
    "grid_minimum",
    "grid_minimum_batch",
    "minimize_psi",
    "psi",
    "psi_array",
    "psi_gradient",
    "psi_hessian",
    "strategy_field",
    "strategy_label",
    "terminal_condition",
    "value_function_constant",
    "value_process",
]
