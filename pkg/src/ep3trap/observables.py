"""Wigner-ellipse observables and period/visibility estimators.

In the normalized coordinates ``x sqrt(m w)`` and ``p / sqrt(m w)`` a
Gaussian state is an ellipse with principal variances

    sigma_{W,N}^2 = (H +- sqrt(L^2 + D^2)) / w,

so ``sigma_W sigma_N = sqrt(Casimir)`` and ``rho = sigma_W / sigma_N >= 1``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .constants import DomainError, PreconditionError

MIN_PERIODS = 3
MIN_SAMPLES_PER_PERIOD = 64


@dataclass(frozen=True)
class EllipseAxes:
    sigma_w: float
    sigma_n: float

    @property
    def rho(self):
        return self.sigma_w / self.sigma_n


def ellipse_arrays(h, l, d, omega, casimir=None):
    """Vectorized ``(sigma_w, sigma_n, rho)``.

    With ``casimir`` given, the narrow axis is taken from
    ``sigma_n^2 = casimir / sigma_w^2`` instead of the cancelling difference
    ``h - sqrt(l^2 + d^2)``.
    """
    h = np.asarray(h, dtype=float)
    omega = np.asarray(omega, dtype=float)
    r = np.hypot(l, d)
    wide = (h + r) / omega
    if casimir is None:
        narrow = (h - r) / omega
    else:
        narrow = casimir / wide
    if np.any(narrow <= 0):
        raise DomainError("non-physical state: narrow-axis variance is not positive")
    sigma_w = np.sqrt(wide)
    sigma_n = np.sqrt(narrow)
    return sigma_w, sigma_n, sigma_w / sigma_n


def sigma_axes(state, casimir=None):
    """Principal standard deviations of the state's Wigner ellipse.

    Raises:
        DomainError: if the narrow-axis variance is not positive.
    """
    w, n, _ = ellipse_arrays(state.h, state.l, state.d, state.omega, casimir)
    return EllipseAxes(float(w), float(n))


def scaled_variance_arrays(h, l, omega):
    return (np.asarray(h) - l) / omega, (np.asarray(h) + l) / omega


def scaled_variances(state):
    """``(m w <x^2>, <p^2>/(m w))`` = ``((h - l)/w, (h + l)/w)``."""
    x2, p2 = scaled_variance_arrays(state.h, state.l, state.omega)
    return float(x2), float(p2)


def analytic_period_tau(mu):
    """``2 pi / sqrt(4 - mu^2)`` below the exceptional point, infinite at and beyond it."""
    gap = 4.0 - mu * mu
    return 2 * math.pi / math.sqrt(gap) if gap > 0 else math.inf


def analytic_visibility(mu):
    """Fringe visibility of rho: ``|mu|/2``, capped at 1 where oscillations vanish."""
    return min(abs(mu) / 2, 1.0)


def stationarity_condition(state, mu):
    """``mu d + l^2 / (4 h)``; the visibility formula applies when this is >= 0."""
    if state.h <= 0:
        raise DomainError("h must be positive")
    return mu * state.d + state.l**2 / (4 * state.h)


def parabola_vertex(x, y):
    """Vertex of the parabola through three points."""
    (x0, x1, x2), (y0, y1, y2) = x, y
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2**2 * (y0 - y1) + x1**2 * (y2 - y0) + x0**2 * (y1 - y2)) / denom
    if a == 0:
        return x1, y1
    xv = -b / (2 * a)
    # never move the estimate beyond the bracketing samples
    if not x0 <= xv <= x2:
        return x1, y1
    c = y1 - a * x1**2 - b * x1
    return xv, a * xv**2 + b * xv + c


def refine_extrema(x, y, indices):
    """Three-point quadratic refinement of sampled extrema at ``indices``."""
    xs, ys = [], []
    for i in indices:
        xv, yv = parabola_vertex(x[i - 1:i + 2], y[i - 1:i + 2])
        xs.append(xv)
        ys.append(yv)
    return np.array(xs), np.array(ys)


def find_extrema(y, rel_tol=1e-9):
    """Indices of interior maxima and minima of ``y`` with prominence above ``rel_tol``."""
    y = np.asarray(y, dtype=float)
    prominence = rel_tol * max(1.0, float(np.median(np.abs(y))))
    maxima, _ = find_peaks(y, prominence=prominence)
    minima, _ = find_peaks(-y, prominence=prominence)
    return maxima, minima


@dataclass(frozen=True)
class OscillationReport:
    """Measured versus analytic period and visibility of rho(tau)."""

    mu: float
    regime: str
    measured_period_tau: float | None
    measured_visibility: float | None
    rho_max: float
    rho_min: float
    analytic_period_tau: float
    analytic_visibility: float

    def to_dict(self):
        def finite(v):
            return None if v is None or math.isinf(v) else v

        return {
            "mu": self.mu,
            "regime": self.regime,
            "T_measured": finite(self.measured_period_tau),
            "T_analytic": finite(self.analytic_period_tau),
            "V_measured": self.measured_visibility,
            "V_analytic": self.analytic_visibility,
            "rho_max": self.rho_max,
            "rho_min": self.rho_min,
        }


def measure_period_and_visibility(traj):
    """Estimate the tau-period and fringe visibility of rho along a trajectory.

    Extrema are located on the sampled ``rho(tau)`` and refined by three-point
    quadratic interpolation. The period is the mean spacing of the maxima and
    the visibility uses the mean refined maximum and minimum.  A trajectory
    without interior extrema is classified as monotonic; a flat one (no
    oscillation amplitude) as oscillatory with zero visibility.

    Raises:
        PreconditionError: if, below the exceptional point, the trajectory
            covers fewer than three analytic periods or has fewer than 64
            samples per period.
    """
    mu = traj.mu
    tau = np.asarray(traj.tau)
    rho = np.asarray(traj.rho)
    period = analytic_period_tau(mu)
    if math.isfinite(period):
        span = tau[-1] - tau[0]
        if span < MIN_PERIODS * period * (1 - 1e-9):
            raise PreconditionError(
                f"trajectory spans {span / period:.2f} periods, need {MIN_PERIODS}"
            )
        if np.max(np.diff(tau)) > period / MIN_SAMPLES_PER_PERIOD * (1 + 1e-9):
            raise PreconditionError(f"need at least {MIN_SAMPLES_PER_PERIOD} samples per period")

    common = dict(mu=mu, analytic_period_tau=period, analytic_visibility=analytic_visibility(mu))
    lo, hi = float(rho.min()), float(rho.max())
    if hi - lo <= 1e-9 * max(1.0, hi):
        return OscillationReport(regime="oscillatory", measured_period_tau=None,
                                 measured_visibility=0.0, rho_max=hi, rho_min=lo, **common)

    maxima, minima = find_extrema(rho)
    if len(maxima) == 0 and len(minima) == 0:
        return OscillationReport(regime="monotonic", measured_period_tau=None,
                                 measured_visibility=None, rho_max=hi, rho_min=lo, **common)

    tmax, rmax = refine_extrema(tau, rho, maxima)
    _, rmin = refine_extrema(tau, rho, minima)
    measured_period = float(np.mean(np.diff(tmax))) if len(tmax) >= 2 else None
    top = float(np.mean(rmax)) if len(rmax) else hi
    bottom = float(np.mean(rmin)) if len(rmin) else lo
    return OscillationReport(
        regime="oscillatory",
        measured_period_tau=measured_period,
        measured_visibility=(top - bottom) / (top + bottom),
        rho_max=top,
        rho_min=bottom,
        **common,
    )
