"""Numerical laboratory for one-dimensional magnetic relaxation.

A two-component field b on the unit circle is advected by the velocity its
own modulus imbalance generates (d/dx u = (|b|^2 - int |b|^2) / 2) while a
small resistivity epsilon diffuses it. The package provides

* ``full``: semi-implicit solver for the resistive system;
* ``hyperbolic``: characteristics solver for the inviscid system and the
  relaxation operator it defines;
* ``limit``: the effective angle dynamics on the slow time scale, including
  finite-time gradient blow-up detection;
* ``oracle``: independent spectral/explicit reference solvers;
* ``diagnostics``: conserved-quantity and estimate checks over trajectories;
* ``harness``: CLI, configuration, named experiments, CSV/JSON emission.
"""

from .errors import (BlowupDetected, ConfigError, FitFailed,
                     InsufficientSampling, JacobianCollapse, MagrelaxError,
                     ModulusVanishes, NoConvergence, NumericalInstability,
                     SolverSingular, StabilityViolated, SymmetryViolated,
                     UnwrapAmbiguous, WindowTooShort, ZeroModulus)
from .fields import (AngleState, Gauge, MagneticState, VelocityField,
                     from_angle, psi_from_state, reconstruct_velocity,
                     to_angle, unwrap_angle, velocity_from_angle,
                     winding_number)
from .full import FullRunConfig, FullTrajectory, run_full, step_full
from .grid import PeriodicGrid
from .hyperbolic import (HyperbolicTrajectory, LagrangianState, from_magnetic,
                         relax, resample_to_grid, step_hyperbolic)
from .limit import (BlowupReport, LimitRunConfig, LimitTrajectory,
                    PhiTrajectory, cn_step, radius_step, run_limit,
                    run_phi_system, scheme_velocity)
from .oracle import (SpectralState, SpectralTrajectory, galerkin_rhs,
                     run_limit_explicit, run_spectral)
from .diagnostics import (DiagnosticsReport, check_energy_balance,
                          check_psi_decay, check_small_oscillation,
                          check_virial, monitor)
from .harness import ExperimentSpec, run_cli, run_experiment
from .tridiag import USING_COMPILED, solve_cyclic

__version__ = "0.1.0"

__all__ = [
    "AngleState", "BlowupDetected", "BlowupReport", "ConfigError",
    "DiagnosticsReport", "ExperimentSpec", "FitFailed", "FullRunConfig",
    "FullTrajectory", "Gauge", "HyperbolicTrajectory", "InsufficientSampling",
    "JacobianCollapse", "LagrangianState", "LimitRunConfig",
    "LimitTrajectory", "MagneticState", "MagrelaxError", "ModulusVanishes",
    "NoConvergence", "NumericalInstability", "PeriodicGrid", "PhiTrajectory",
    "SolverSingular", "SpectralState", "SpectralTrajectory",
    "StabilityViolated", "SymmetryViolated", "UnwrapAmbiguous",
    "USING_COMPILED", "VelocityField", "WindowTooShort", "ZeroModulus",
    "check_energy_balance", "check_psi_decay", "check_small_oscillation",
    "check_virial", "cn_step",
    "from_angle", "from_magnetic", "galerkin_rhs", "monitor",
    "psi_from_state", "radius_step", "reconstruct_velocity", "relax",
    "resample_to_grid", "run_cli", "run_experiment", "run_full",
    "run_limit", "run_limit_explicit", "run_phi_system", "run_spectral",
    "scheme_velocity", "solve_cyclic", "step_full", "step_hyperbolic",
    "to_angle", "unwrap_angle", "velocity_from_angle", "winding_number",
]
