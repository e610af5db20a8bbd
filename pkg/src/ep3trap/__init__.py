"""Harmonic trap ramped at constant adiabatic parameter and its third-order exceptional point."""

from .algebra import (
    AlgebraState,
    GeneratorMatrix,
    SpectralData,
    biorthogonal_product,
    build_generator,
    casimir,
    eigensystem,
    nilpotency_index,
)
from .classical import (
    PhaseSpaceEnsemble,
    classical_eigenfrequencies,
    evolve_ensemble_moments,
    exact_classical_solution,
    sample_wigner,
)
from .constants import DEFAULT_CONSTANTS, DomainError, PhysicalConstants, PreconditionError
from .observables import (
    EllipseAxes,
    OscillationReport,
    analytic_period_tau,
    analytic_visibility,
    measure_period_and_visibility,
    scaled_variances,
    sigma_axes,
    stationarity_condition,
)
from .propagation import (
    FrequencyProfile,
    PropagatorMatrix,
    TabulatedProfile,
    TrajectoryRecord,
    evolve_state,
    exact_propagator,
    exact_trajectory,
    propagate_scaled,
    rk4_evolve,
    tau_grid,
)
from .protocol import ExperimentPlan, MeasurementRecord, hold_and_measure, run_protocol

__version__ = "0.1.0"
