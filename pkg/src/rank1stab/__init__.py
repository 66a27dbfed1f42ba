"""Diagonal stability of rank-1 interconnections and multi-area AGC analysis."""

from ._kernels import BACKEND
from .diagstab import (
    DiagStabReport,
    OracleResult,
    PerturbedSystem,
    Rank1System,
    SvdConditionReport,
    certificate,
    check_rank1,
    oracle_diagstab,
    perturbation_bound,
    svd_condition,
)
from .agc import (
    AreaSpec,
    GeneratorSpec,
    NetworkSpec,
    PlantState,
    TieLine,
    ace,
    agc_rhs,
    allocate,
    allocate_network,
    check_feasibility,
    plant_equilibrium,
    plant_matrix,
    plant_rhs,
)
from .reduced import (
    EquilibriumResult,
    MarginStudy,
    PhiMap,
    ReducedModel,
    build_reduced,
    equilibrium,
    hinf_ii,
    lyapunov_decrease,
    lyapunov_v,
    margin_study,
    phi_eval,
    phi_invert,
    reduced_certificate,
    reduced_is_stable,
    reduced_rhs,
    sensitivity,
    sweep_peak,
)
from .sim import SimConfig, SimTrace, compare_traces, run_full, run_reduced

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    # diagstab
    "Rank1System", "DiagStabReport", "PerturbedSystem", "SvdConditionReport",
    "OracleResult", "check_rank1", "certificate", "perturbation_bound",
    "svd_condition", "oracle_diagstab",
    # agc model
    "GeneratorSpec", "AreaSpec", "TieLine", "NetworkSpec", "PlantState",
    "plant_rhs", "ace", "agc_rhs", "allocate", "allocate_network",
    "plant_equilibrium", "plant_matrix", "check_feasibility",
    # reduced
    "ReducedModel", "PhiMap", "EquilibriumResult", "MarginStudy",
    "build_reduced", "reduced_is_stable", "reduced_certificate", "phi_eval",
    "phi_invert", "equilibrium", "reduced_rhs", "lyapunov_v",
    "lyapunov_decrease", "margin_study", "sensitivity", "hinf_ii",
    "sweep_peak",
    # sim
    "SimConfig", "SimTrace", "run_full", "run_reduced", "compare_traces",
]
