"""Entropy-dissipative DGSEM / finite volume solver for the stochastic Euler equations."""

from .experiments import ErrorReport, ProblemSpec, convergence_study, error_pair, eoc, initial_condition, problem
from .fluxes import central_flux, llf_flux, log_mean, ranocha_ec_flux
from .mesh import DiscreteField, Mesh, discrete_l2_norm, interpolate_to_reference, total_quantities
from .operators import OperatorSet, assemble_operator_set, gauss_lobatto, lagrange_diff_matrix
from .physics import GasModel, StateViolationError, cons_to_prim, prim_to_cons
from .semidisc import SchemeOptions, dg_rhs
from .stochastic import (MonitorFloors, NoiseSpec, SampleConfig, check_assumption, euler_maruyama_step,
                         evolve_sample, wiener_increments)

__version__ = "0.1.0"

__all__ = [
    "DiscreteField", "ErrorReport", "GasModel", "Mesh", "MonitorFloors", "NoiseSpec", "OperatorSet",
    "ProblemSpec", "SampleConfig", "SchemeOptions", "StateViolationError", "assemble_operator_set",
    "central_flux", "check_assumption", "cons_to_prim", "convergence_study", "dg_rhs", "discrete_l2_norm",
    "eoc", "error_pair", "euler_maruyama_step", "evolve_sample", "gauss_lobatto", "initial_condition",
    "interpolate_to_reference", "lagrange_diff_matrix", "llf_flux", "log_mean", "prim_to_cons",
    "problem", "ranocha_ec_flux", "total_quantities", "wiener_increments",
]
