"""Simulated measurement sequence for observing the exceptional point.

Equilibrate at ``w(0)``, ramp at constant ``mu`` between ``omega_open`` and
``omega_closed``, and at a set of times read off the frequency-scaled
position and momentum variances.  The hold-and-measure variant freezes the
trap at ``w(t_n)`` and records the extremes of ``m w <x^2>`` over one
variance period, which are the squared ellipse axes.
"""

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraState
from .constants import DEFAULT_CONSTANTS, DomainError
from .observables import parabola_vertex
from .propagation import FrequencyProfile, evolve_to_tau, propagate_scaled

HOLD_SAMPLES = 256

CSV_COLUMNS = (
    "t_n", "omega_n", "compression_factor", "x2_scaled", "p2_scaled",
    "sigma_n", "sigma_w", "rho",
)


@dataclass(frozen=True)
class ExperimentPlan:
    """Ramp between two trap frequencies at constant adiabatic parameter.

    For ``mu > 0`` the trap starts open (``w(0) = omega_open``) and closes;
    for ``mu < 0`` it starts closed and opens.  Without an explicit
    ``initial_state`` the particle starts in the thermal state with mean
    occupation ``nbar`` (ground state for ``nbar = 0``) of the initial trap.
    """

    omega_open: float
    omega_closed: float
    mu: float
    n_times: int = 64
    initial_state: AlgebraState | None = None
    nbar: float = 0.0
    constants: object = DEFAULT_CONSTANTS

    def __post_init__(self):
        if not (0 < self.omega_open < self.omega_closed) or not math.isfinite(self.omega_closed):
            raise DomainError("need 0 < omega_open < omega_closed")
        if self.mu == 0 or not math.isfinite(self.mu):
            raise DomainError("mu must be finite and non-zero")
        if self.n_times < 1:
            raise DomainError("n_times must be at least 1")
        if self.initial_state is not None and not math.isclose(
                self.initial_state.omega, self.omega_initial, rel_tol=1e-12):
            raise DomainError("initial state must live in the initial trap")

    @property
    def omega_initial(self):
        return self.omega_open if self.mu > 0 else self.omega_closed

    @property
    def omega_final(self):
        return self.omega_closed if self.mu > 0 else self.omega_open

    @property
    def t_final(self):
        """Ramp duration ``|1/omega_open - 1/omega_closed| / |mu|``."""
        return abs(1 / self.omega_open - 1 / self.omega_closed) / abs(self.mu)

    @property
    def profile(self):
        return FrequencyProfile(self.omega_initial, self.mu)

    @property
    def compression_max(self):
        return self.omega_closed / self.omega_open

    def start_state(self):
        if self.initial_state is not None:
            return self.initial_state
        return AlgebraState.thermal(self.omega_initial, self.nbar, constants=self.constants)


@dataclass(frozen=True)
class MeasurementRecord:
    t_n: float
    omega_n: float
    compression_factor: float
    x2_scaled: float
    p2_scaled: float
    sigma_n_hold: float
    sigma_w_hold: float

    @property
    def rho(self):
        return self.sigma_w_hold / self.sigma_n_hold

    def row(self):
        return (self.t_n, self.omega_n, self.compression_factor, self.x2_scaled,
                self.p2_scaled, self.sigma_n_hold, self.sigma_w_hold, self.rho)


def hold_and_measure(state, samples=HOLD_SAMPLES):
    """Freeze the trap and read ``(sigma_n, sigma_w)`` from the variance swing.

    At fixed ``w`` the normalized ellipse rotates at angular rate ``2 w``, so
    ``m w <x^2>(t)`` passes through both principal variances within
    ``pi / w``.  That interval is sampled at ``samples`` points and the
    minimum and maximum are refined by periodic three-point quadratic
    interpolation.
    """
    # in scaled time the hold lasts pi, with mu = 0 and constant w
    taus = np.arange(samples) * (math.pi / samples)
    u = propagate_scaled(state.vector / state.omega, 0.0, taus)
    x2 = u[:, 0] - u[:, 1]
    step = math.pi / samples

    def refined(i):
        idx = (i + np.arange(-1, 2)) % samples
        return parabola_vertex(taus[i] + step * np.arange(-1, 2), x2[idx])[1]

    lo = refined(int(np.argmin(x2)))
    hi = refined(int(np.argmax(x2)))
    if lo <= 0:
        raise DomainError("non-physical state: narrow-axis variance is not positive")
    return math.sqrt(lo), math.sqrt(hi)


def measurement_compression_factors(plan):
    """Geometric spacing strictly inside ``(1, compression_max)``, i.e. uniform in tau."""
    k = np.arange(1, plan.n_times + 1) / (plan.n_times + 1)
    return plan.compression_max ** k


def run_protocol(plan, factors=None, hold_samples=HOLD_SAMPLES):
    """Run the ramp-and-measure sequence.

    Args:
        plan: the experiment.
        factors: optional compression factors at which to measure; defaults
            to :func:`measurement_compression_factors`.
        hold_samples: samples per hold-and-measure window.

    Returns:
        list of MeasurementRecord, one per measurement time.
    """
    profile = plan.profile
    state0 = plan.start_state()
    if factors is None:
        factors = measurement_compression_factors(plan)
    factors = np.asarray(factors, dtype=float)
    if np.any(factors < 1) or np.any(factors > plan.compression_max * (1 + 1e-12)):
        raise DomainError("measurement outside the ramp")
    records = []
    for factor in factors:
        state = evolve_to_tau(state0, profile, profile.tau_at_compression(factor))
        sigma_n, sigma_w = hold_and_measure(state, hold_samples)
        records.append(MeasurementRecord(
            t_n=state.t,
            omega_n=state.omega,
            compression_factor=float(factor),
            x2_scaled=(state.h - state.l) / state.omega,
            p2_scaled=(state.h + state.l) / state.omega,
            sigma_n_hold=sigma_n,
            sigma_w_hold=sigma_w,
        ))
    return records


def records_to_csv(records):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow([repr(float(v)) for v in rec.row()])
    return buf.getvalue()
