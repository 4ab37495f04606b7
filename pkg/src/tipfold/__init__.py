"""tipfold: tipping points, grazing points, periodic orbits and cyclic folds
of the piecewise-linear non-smooth system dx/dt = 2|x| - mu(t) + f(t) and its
smoothed / saddle-node relatives."""

__version__ = "0.1.0"

from .model import (ConfigError, Region, SegmentSolution, SystemConfig,
                    SystemKind, forcing, segment_derivative, segment_value,
                    x_particular)
from .exactsim import (Event, EventKind, MaxEventsExceeded, NoTipWithinBudget,
                       Trajectory, TrajectorySegment, exit_coefficient,
                       simulate, tipping_point)
from .orbit import (ContinuationBranch, NewtonDiverged, PeriodicOrbit,
                    Termination, UnphysicalOrbit, a_of_mu_curve,
                    continue_to_fold, grazing_mu, grazing_orbit, mean_x,
                    orbit_value, solve_orbit)
from .asym import (C0, DomainError, EstimateSet, L_DEFAULT, M_COEFF,
                   PhaseAnalysis, PhaseRoot, estimate_set,
                   lemma5_smooth_surface, mu_cf_large_omega,
                   mu_cf_small_omega, mu_eps, mu_tp_large_omega, n_max,
                   phase_roots, snb_mu_tp)
from .smoothsim import (AlphaRegime, SmoothTipResult, StepFloorReached,
                        alpha_sweep, alpha_thresholds, classify_alpha,
                        integrate_smoothed, integrate_snb)
from .sweep import (OrbitSnapshot, Surface, SweepAxis, SweepResult,
                    Transition, appendix_table, fig_orbit_snapshots, orbit_at,
                    surface, sweep_alpha, sweep_eps, sweep_omega,
                    tipping_value)

__all__ = [
    "__version__",
    # model
    "ConfigError", "Region", "SegmentSolution", "SystemConfig", "SystemKind",
    "forcing", "segment_derivative", "segment_value", "x_particular",
    # exactsim
    "Event", "EventKind", "MaxEventsExceeded", "NoTipWithinBudget",
    "Trajectory", "TrajectorySegment", "exit_coefficient", "simulate",
    "tipping_point",
    # orbit
    "ContinuationBranch", "NewtonDiverged", "PeriodicOrbit", "Termination",
    "UnphysicalOrbit", "a_of_mu_curve", "continue_to_fold", "grazing_mu",
    "grazing_orbit", "mean_x", "orbit_value", "solve_orbit",
    # asym
    "C0", "DomainError", "EstimateSet", "L_DEFAULT", "M_COEFF",
    "PhaseAnalysis", "PhaseRoot", "estimate_set", "lemma5_smooth_surface",
    "mu_cf_large_omega", "mu_cf_small_omega", "mu_eps", "mu_tp_large_omega",
    "n_max", "phase_roots", "snb_mu_tp",
    # smoothsim
    "AlphaRegime", "SmoothTipResult", "StepFloorReached", "alpha_sweep",
    "alpha_thresholds", "classify_alpha", "integrate_smoothed",
    "integrate_snb",
    # sweep
    "OrbitSnapshot", "Surface", "SweepAxis", "SweepResult", "Transition",
    "appendix_table", "fig_orbit_snapshots", "orbit_at", "surface",
    "sweep_alpha", "sweep_eps", "sweep_omega", "tipping_value",
]
