"""Trap frequency ramps, the exact moment propagator and an RK4 cross-check.

For a ramp with constant adiabatic parameter ``mu = (dw/dt) / w^2`` the
frequency is ``w(t) = w0 / (1 - mu w0 t)`` and the scaled time
``tau = log(w(t)/w0) / mu`` turns the moment equations into a linear system
with constant coefficients.  Its propagator ``exp(M dtau)`` is evaluated in
closed form from ``M^3 = -(4 - mu^2) M``:

    exp(M s) = I + f1(s) M + f2(s) M^2,
    f1 = sin(W s)/W,  f2 = (1 - cos(W s))/W^2,  W^2 = 4 - mu^2,

with hyperbolic functions beyond the exceptional point and the polynomial
``f1 = s, f2 = s^2/2`` on it.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import observables
from .algebra import AlgebraState, build_generator, casimir
from .constants import DomainError

BRANCH_TOL = 1e-6
SERIES_TERMS = 6
RK4_STEPS_PER_PERIOD = 4096
# below this |mu * tau| the profile maps use their second-order series
_SERIES_ARG = 1e-9

CSV_COLUMNS = (
    "t", "tau", "omega", "H", "L", "D",
    "sigma_w", "sigma_n", "rho", "x2_scaled", "p2_scaled",
)


@dataclass(frozen=True)
class FrequencyProfile:
    """Trap frequency ``w(t) = omega0 / (1 - mu omega0 t)`` and its scaled time.

    ``mu = 0`` is the constant trap, handled as the regular limit
    ``tau = omega0 t``.
    """

    omega0: float
    mu: float

    def __post_init__(self):
        if not (math.isfinite(self.omega0) and self.omega0 > 0):
            raise DomainError("omega0 must be positive and finite")
        if not math.isfinite(self.mu):
            raise DomainError("mu must be finite")

    @property
    def t_max(self):
        """Divergence time of the ramp (infinite unless ``mu > 0``)."""
        rate = self.mu * self.omega0
        return 1.0 / rate if rate > 0 else math.inf

    def _check_t(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t >= self.t_max) or not np.all(np.isfinite(t)):
            raise DomainError(
                f"time outside [0, {self.t_max}): frequency divergence reached"
            )
        return t

    def omega_at(self, t):
        t = self._check_t(t)
        out = self.omega0 / (1.0 - self.mu * self.omega0 * t)
        return float(out) if out.ndim == 0 else out

    def rate_at(self, t):
        """``(dw/dt) / w``, the coefficient of the non-commutator terms."""
        return self.mu * self.omega_at(t)

    def omega_at_tau(self, tau):
        out = self.omega0 * np.exp(self.mu * np.asarray(tau, dtype=float))
        return float(out) if out.ndim == 0 else out

    def tau_of_t(self, t):
        t = self._check_t(t)
        x = self.omega0 * t
        y = self.mu * x
        # series for tiny mu*w0*t, where dividing by mu would underflow
        small = np.abs(y) < _SERIES_ARG
        safe_mu = self.mu if self.mu != 0 else 1.0
        out = np.where(small, x * (1 + y / 2), -np.log1p(-np.where(small, 0.0, y)) / safe_mu)
        return float(out) if out.ndim == 0 else out

    def t_of_tau(self, tau):
        tau = np.asarray(tau, dtype=float)
        if not np.all(np.isfinite(tau)):
            raise DomainError("tau must be finite")
        y = self.mu * tau
        small = np.abs(y) < _SERIES_ARG
        safe_mu = self.mu if self.mu != 0 else 1.0
        out = np.where(small, tau * (1 - y / 2), -np.expm1(-np.where(small, 0.0, y)) / safe_mu)
        out = out / self.omega0
        if np.any(out < 0):
            raise DomainError("tau maps to negative time")
        return float(out) if out.ndim == 0 else out

    def compression_factor(self, tau):
        """``w/w0`` for opening ramps, ``w0/w`` for closing ones (always >= 1 for tau >= 0)."""
        out = np.exp(abs(self.mu) * np.asarray(tau, dtype=float))
        return float(out) if out.ndim == 0 else out

    def tau_at_compression(self, factor):
        if self.mu == 0:
            raise DomainError("a constant trap has no compression factor")
        out = np.log(np.asarray(factor, dtype=float)) / abs(self.mu)
        return float(out) if out.ndim == 0 else out


class TabulatedProfile:
    """Frequency given as samples ``w(t_k)``, for the RK4 validation path only."""

    def __init__(self, t, omega):
        from scipy.interpolate import CubicSpline

        t = np.asarray(t, dtype=float)
        omega = np.asarray(omega, dtype=float)
        if np.any(omega <= 0):
            raise DomainError("tabulated frequencies must be positive")
        self._spline = CubicSpline(t, omega)
        self._deriv = self._spline.derivative()
        self.t_min, self.t_max = float(t[0]), float(t[-1])
        self.mu = None

    def _check_t(self, t):
        if np.any(np.asarray(t) < self.t_min) or np.any(np.asarray(t) > self.t_max):
            raise DomainError("time outside tabulated range")

    def omega_at(self, t):
        self._check_t(t)
        return float(self._spline(t))

    def rate_at(self, t):
        self._check_t(t)
        return float(self._deriv(t) / self._spline(t))


def _propagator_coefficients(mu, s):
    """Scalar coefficients ``(f1, f2)`` of ``exp(M s) = I + f1 M + f2 M^2``."""
    s = np.asarray(s, dtype=float)
    wsq = 4.0 - mu * mu
    z = wsq * s * s
    if abs(wsq) < BRANCH_TOL and np.all(np.abs(z) <= 0.1):
        f1 = np.zeros_like(s)
        f2 = np.zeros_like(s)
        term = np.ones_like(s)
        for k in range(SERIES_TERMS):
            f1 += term / math.factorial(2 * k + 1)
            f2 += term / math.factorial(2 * k + 2)
            term = term * (-z)
        return f1 * s, f2 * s * s
    if wsq > 0:
        w = math.sqrt(wsq)
        return np.sin(w * s) / w, 2 * (np.sin(0.5 * w * s) / w) ** 2
    if wsq < 0:
        k = math.sqrt(-wsq)
        return np.sinh(k * s) / k, 2 * (np.sinh(0.5 * k * s) / k) ** 2
    return s.copy(), 0.5 * s * s


@dataclass(frozen=True)
class PropagatorMatrix:
    """``exp(M(mu) dtau)``, the evolution map of the rescaled moments."""

    mu: float
    dtau: float
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.entries.setflags(write=False)

    def __matmul__(self, other):
        return self.entries @ np.asarray(other)


def exact_propagator(mu, dtau):
    """Closed-form ``exp(M(mu) dtau)`` (trigonometric, polynomial or hyperbolic)."""
    m = build_generator(mu).entries
    f1, f2 = _propagator_coefficients(float(mu), float(dtau))
    entries = np.eye(3) + float(f1) * m + float(f2) * (m @ m)
    return PropagatorMatrix(float(mu), float(dtau), entries)


def propagate_scaled(vector, mu, dtau):
    """Evolve a rescaled moment vector ``O / w`` by ``dtau``.

    ``dtau`` may be an array, in which case one row per entry is returned.
    """
    u = np.asarray(vector, dtype=float)
    m = build_generator(mu).entries
    f1, f2 = _propagator_coefficients(float(mu), dtau)
    mu1 = m @ u
    mu2 = m @ mu1
    return u + np.multiply.outer(f1, mu1) + np.multiply.outer(f2, mu2)


def _check_on_profile(state, profile):
    expected = profile.omega_at(state.t)
    if not math.isclose(state.omega, expected, rel_tol=1e-9):
        raise DomainError(
            f"state frequency {state.omega} does not match the profile ({expected}) at t={state.t}"
        )


def evolve_to_tau(state, profile, tau):
    """Exact evolution to scaled time ``tau`` (measured from the profile's t=0)."""
    _check_on_profile(state, profile)
    tau0 = profile.tau_of_t(state.t)
    if tau < tau0:
        raise DomainError("cannot evolve backwards in time")
    omega = profile.omega_at_tau(tau)
    h, l, d = propagate_scaled(state.vector / state.omega, profile.mu, tau - tau0) * omega
    return AlgebraState(h, l, d, omega, profile.t_of_tau(tau))


def evolve_state(state, profile, t_target):
    """Exact evolution of ``state`` to physical time ``t_target``.

    Raises:
        DomainError: if ``t_target`` precedes ``state.t`` or lies beyond the
            divergence of the ramp.
    """
    if t_target < state.t:
        raise DomainError("cannot evolve backwards in time")
    tau = profile.tau_of_t(t_target)
    out = evolve_to_tau(state, profile, tau)
    return AlgebraState(out.h, out.l, out.d, out.omega, float(t_target))


@dataclass(frozen=True)
class TrajectoryRecord:
    """Sampled moments and Wigner-ellipse observables along a ramp.

    Columns are numpy arrays of equal length, named as in ``CSV_COLUMNS``.
    """

    profile: object
    initial: AlgebraState
    t: np.ndarray
    tau: np.ndarray
    omega: np.ndarray
    H: np.ndarray
    L: np.ndarray
    D: np.ndarray
    sigma_w: np.ndarray
    sigma_n: np.ndarray
    rho: np.ndarray
    x2_scaled: np.ndarray
    p2_scaled: np.ndarray

    def __len__(self):
        return len(self.t)

    @property
    def mu(self):
        return self.profile.mu

    @property
    def casimir(self):
        return (self.H**2 - self.L**2 - self.D**2) / self.omega**2

    def state(self, i):
        return AlgebraState(
            float(self.H[i]), float(self.L[i]), float(self.D[i]),
            float(self.omega[i]), float(self.t[i]),
        )

    def rows(self):
        cols = [getattr(self, name) for name in CSV_COLUMNS]
        return [tuple(float(c[i]) for c in cols) for i in range(len(self))]

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows():
            writer.writerow([repr(v) for v in row])
        return buf.getvalue()

    def to_json(self):
        return json.dumps({
            "schema_version": 1,
            "mu": self.mu,
            "columns": list(CSV_COLUMNS),
            "rows": [list(r) for r in self.rows()],
        })


def _record(profile, initial, t, tau, omega, vectors, casimir_value=None):
    h, l, d = vectors[:, 0], vectors[:, 1], vectors[:, 2]
    sigma_w, sigma_n, rho = observables.ellipse_arrays(h, l, d, omega, casimir_value)
    x2, p2 = observables.scaled_variance_arrays(h, l, omega)
    return TrajectoryRecord(
        profile, initial, np.asarray(t, dtype=float), np.asarray(tau, dtype=float),
        np.asarray(omega, dtype=float), h, l, d, sigma_w, sigma_n, rho, x2, p2,
    )


def tau_grid(mu, tau_end, samples_per_period=512):
    """Uniform tau grid from 0 with ``samples_per_period`` points per analytic period.

    The spacing divides ``T_tau`` (``2 pi`` at and beyond the exceptional
    point) exactly, so period multiples are hit; the grid stops at the last
    point not beyond ``tau_end``.
    """
    period = observables.analytic_period_tau(mu)
    step = (period if math.isfinite(period) else 2 * math.pi) / samples_per_period
    n = int(math.floor(tau_end / step + 1e-9))
    return np.arange(n + 1) * step


def exact_trajectory(state, profile, taus):
    """Sample the exact evolution at the scaled times ``taus``.

    Observables use the conserved Casimir of the initial state, which keeps
    the narrow axis accurate for strongly squeezed late-time states.
    """
    _check_on_profile(state, profile)
    taus = np.asarray(taus, dtype=float)
    tau0 = profile.tau_of_t(state.t)
    if np.any(np.diff(taus) <= 0) or taus[0] < tau0:
        raise DomainError("tau samples must be strictly increasing and not precede the state")
    omega = profile.omega_at_tau(taus)
    u = propagate_scaled(state.vector / state.omega, profile.mu, taus - tau0)
    vectors = u * np.asarray(omega)[:, None]
    return _record(profile, state, profile.t_of_tau(taus), taus, omega, vectors,
                   casimir(state))


def _moment_rhs(profile, t, y):
    # y = (H, L, D, tau); d tau/dt = w
    if isinstance(profile, FrequencyProfile):
        omega = profile.omega0 / (1.0 - profile.mu * profile.omega0 * t)
        rate = profile.mu * omega
    else:
        omega = profile.omega_at(t)
        rate = profile.rate_at(t)
    h, l, d, _ = y
    return np.array([
        rate * (h - l),
        -2 * omega * d - rate * (h - l),
        2 * omega * l + rate * d,
        omega,
    ])


def _rk4_step(profile, t, y, dt):
    k1 = _moment_rhs(profile, t, y)
    k2 = _moment_rhs(profile, t + dt / 2, y + dt / 2 * k1)
    k3 = _moment_rhs(profile, t + dt / 2, y + dt / 2 * k2)
    k4 = _moment_rhs(profile, t + dt, y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_evolve(state, profile, t_grid, dtau_step=None):
    """Integrate the Heisenberg moment equations in physical time with classical RK4.

    Args:
        state: initial moments at ``state.t``.
        profile: a :class:`FrequencyProfile` or :class:`TabulatedProfile`.
        t_grid: strictly increasing output times, none before ``state.t``.
        dtau_step: internal step in scaled time. Defaults to
            ``min(T_tau, 2 pi) / 4096``; for a constant-mu profile the steps
            are uniform in tau and mapped back to t.

    Returns:
        TrajectoryRecord sampled at ``t_grid``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0) or t_grid[0] < state.t:
        raise DomainError("t_grid must be strictly increasing and not precede the state")
    constant_mu = isinstance(profile, FrequencyProfile)
    if constant_mu:
        if t_grid[-1] >= profile.t_max:
            raise DomainError("integration crosses the frequency divergence")
        _check_on_profile(state, profile)
    if dtau_step is None:
        base = min(observables.analytic_period_tau(profile.mu), 2 * math.pi) if constant_mu else 2 * math.pi
        dtau_step = base / RK4_STEPS_PER_PERIOD

    tau0 = profile.tau_of_t(state.t) if constant_mu else 0.0
    y = np.array([state.h, state.l, state.d, tau0])
    t = state.t
    out = np.empty((len(t_grid), 4))
    for i, target in enumerate(t_grid):
        if target > t:
            if constant_mu:
                tau_a, tau_b = profile.tau_of_t(t), profile.tau_of_t(target)
                n = max(1, math.ceil((tau_b - tau_a) / dtau_step - 1e-9))
                nodes = profile.t_of_tau(np.linspace(tau_a, tau_b, n + 1))
                nodes[0], nodes[-1] = t, target
            else:
                wmax = max(profile.omega_at(t), profile.omega_at(target))
                n = max(1, math.ceil(wmax * (target - t) / dtau_step))
                nodes = np.linspace(t, target, n + 1)
            for a, b in zip(nodes[:-1], nodes[1:]):
                y = _rk4_step(profile, a, y, b - a)
            t = target
        out[i] = y

    omega = np.array([profile.omega_at(tt) for tt in t_grid])
    tau = profile.tau_of_t(t_grid) if constant_mu else out[:, 3]
    return _record(profile, state, t_grid, tau, omega, out[:, :3])
