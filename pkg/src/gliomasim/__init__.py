"""Glioma growth dynamics under combined chemotherapy and
anti-angiogenic therapy: a seven-compartment ODE model with equilibrium
and stability analysis, an adaptive integrator aware of the treatment
switching surfaces, and a scenario/sweep command-line front end."""

from .equilibria import (
    CubicCoefficients,
    EquilibriumError,
    EquilibriumReport,
    cardano_cubic_roots,
    glioma_free_equilibrium,
    polynomial_root_oracle,
    positive_quadratic_root,
    resistant_burden_cap,
    resistant_equilibrium,
    trivial_equilibrium,
)
from .model import STATE_NAMES, heaviside, kill_rate, rhs, switching_distances
from .params import (
    DimensionalParams,
    NondimParams,
    ParameterError,
    bundled_params,
    dump_params,
    load_params,
    nondimensionalize,
)
from .scenarios import (
    DEFAULT_INITIAL_STATE,
    ScenarioError,
    ScenarioSpec,
    SweepSpec,
    run_scenario,
    run_sweep,
)
from .solver import (
    PortraitEnsemble,
    SimConfig,
    SolverError,
    Trajectory,
    convergence_order,
    integrate,
    integrate_fixed,
    phase_portrait,
)
from .stability import (
    NonSmoothPointWarning,
    StabilityReport,
    classify,
    critical_chemo_infusion,
    eigenvalues,
    jacobian,
    stability_report,
    theorem1_conditions,
    theorem2_conditions,
    trivial_eigenvalues,
)

__version__ = "1.0.0"

__all__ = [
    "CubicCoefficients", "EquilibriumError", "EquilibriumReport",
    "cardano_cubic_roots", "glioma_free_equilibrium", "polynomial_root_oracle",
    "positive_quadratic_root", "resistant_burden_cap", "resistant_equilibrium",
    "trivial_equilibrium",
    "STATE_NAMES", "heaviside", "kill_rate", "rhs", "switching_distances",
    "DimensionalParams", "NondimParams", "ParameterError", "bundled_params",
    "dump_params", "load_params", "nondimensionalize",
    "DEFAULT_INITIAL_STATE", "ScenarioError", "ScenarioSpec", "SweepSpec",
    "run_scenario", "run_sweep",
    "PortraitEnsemble", "SimConfig", "SolverError", "Trajectory",
    "convergence_order", "integrate", "integrate_fixed", "phase_portrait",
    "NonSmoothPointWarning", "StabilityReport", "classify",
    "critical_chemo_infusion", "eigenvalues", "jacobian", "stability_report",
    "theorem1_conditions", "theorem2_conditions", "trivial_eigenvalues",
    "__version__",
]
