"""Classical oracle: Wigner sampling plus Newton's law for the ramped trap.

For quadratic Hamiltonians the Wigner function is carried along classical
trajectories, so sampling the initial Gaussian and integrating
``x'' + w(t)^2 x = 0`` reproduces every second moment.  In scaled time the
constant-mu ramp becomes the damped oscillator

    x_tt + mu x_t + x = 0,

solved here in closed form.  The moment dynamics of :mod:`propagation` are
never used to evolve the samples.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .algebra import AlgebraState
from .constants import DEFAULT_CONSTANTS, DomainError


class PhaseSpacePoint(NamedTuple):
    x: float
    p: float


@dataclass(frozen=True)
class PhaseSpaceEnsemble:
    """Samples ``(x, p)`` of a Gaussian Wigner distribution."""

    x: np.ndarray
    p: np.ndarray
    seed: int
    source_state: AlgebraState
    constants: object = DEFAULT_CONSTANTS

    def __len__(self):
        return len(self.x)

    def __getitem__(self, i):
        return PhaseSpacePoint(float(self.x[i]), float(self.p[i]))

    @property
    def points(self):
        return [self[i] for i in range(len(self))]


def sample_wigner(state, n, seed, constants=DEFAULT_CONSTANTS):
    """Draw ``n`` phase-space samples from the state's Gaussian Wigner function.

    The covariance follows from inverting the definitions of H, L and D:
    ``<x^2> = (h - l)/(m w^2)``, ``<p^2> = m (h + l)``, ``<xp>_sym = d / w``.
    Samples are reproducible for a fixed ``seed`` (numpy PCG64).

    Raises:
        DomainError: if ``n < 2`` or the covariance is not positive definite.
    """
    if n < 2:
        raise DomainError("need at least two samples")
    cov = state.covariance(constants)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise DomainError("covariance is not positive definite") from exc
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, 2)) @ chol.T
    return PhaseSpaceEnsemble(z[:, 0].copy(), z[:, 1].copy(), seed, state, constants)


def classical_eigenfrequencies(mu):
    """Roots ``(i mu +- sqrt(4 - mu^2))/2`` for solutions ``x ~ exp(i lambda tau)``."""
    root = np.sqrt(complex(4.0 - mu * mu))
    return (1j * mu + root) / 2, (1j * mu - root) / 2


def _basis(mu, tau):
    # C = cos(b tau), S = sin(b tau)/b with b^2 = 1 - mu^2/4, continued through b = 0
    tau = np.asarray(tau, dtype=float)
    bsq = 1.0 - 0.25 * mu * mu
    if bsq > 0:
        b = math.sqrt(bsq)
        return np.cos(b * tau), np.sin(b * tau) / b
    if bsq < 0:
        k = math.sqrt(-bsq)
        return np.cosh(k * tau), np.sinh(k * tau) / k
    return np.ones_like(tau), tau.copy()


def exact_classical_solution(mu, x0, dxdtau0, tau):
    """Closed-form ``(x, dx/dtau)`` of the damped oscillator after scaled time ``tau``.

    Under-, critically and over-damped cases share the form
    ``x = exp(-mu tau/2) [x0 C + (v0 + mu x0/2) S]``; at ``mu = 2`` this is
    ``exp(-tau) (x0 + (v0 + x0) tau)``.  Inputs broadcast.
    """
    a = 0.5 * mu
    c, s = _basis(mu, tau)
    decay = np.exp(-a * np.asarray(tau, dtype=float))
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(dxdtau0, dtype=float)
    x = decay * (x0 * c + (v0 + a * x0) * s)
    v = decay * (v0 * c - (a * v0 + x0) * s)
    return x, v


def wronskian(mu, tau):
    """Wronskian of the solutions started from (1, 0) and (0, 1); equals ``exp(-mu tau)``."""
    x1, v1 = exact_classical_solution(mu, 1.0, 0.0, tau)
    x2, v2 = exact_classical_solution(mu, 0.0, 1.0, tau)
    return x1 * v2 - x2 * v1


def _evolve_samples(ens, profile, tau):
    m = ens.constants.mass
    src = ens.source_state
    tau0 = profile.tau_of_t(src.t)
    v0 = ens.p / (m * src.omega)
    x, v = exact_classical_solution(profile.mu, ens.x, v0, tau - tau0)
    omega = profile.omega_at_tau(tau)
    return x, m * omega * v, omega


def _moments(x, p, omega, m):
    x2 = float(np.mean(x * x))
    p2 = float(np.mean(p * p))
    xp = float(np.mean(x * p))
    kinetic = p2 / (2 * m)
    potential = 0.5 * m * omega**2 * x2
    return kinetic + potential, kinetic - potential, omega * xp


def evolve_ensemble_moments(ens, profile, t_grid):
    """Evolve every sample classically and rebuild (h, l, d) at each grid time."""
    out = []
    for t in np.asarray(t_grid, dtype=float):
        tau = profile.tau_of_t(t)
        x, p, omega = _evolve_samples(ens, profile, tau)
        h, l, d = _moments(x, p, omega, ens.constants.mass)
        out.append(AlgebraState(h, l, d, omega, float(t)))
    return out


def _quadratic_forms(omega, m):
    return {
        "h": np.diag([0.5 * m * omega**2, 0.5 / m]),
        "l": np.diag([-0.5 * m * omega**2, 0.5 / m]),
        "d": np.array([[0.0, 0.5 * omega], [0.5 * omega, 0.0]]),
    }


def moment_standard_errors(state, n, constants=DEFAULT_CONSTANTS):
    """Standard errors of the sample estimates of (h, l, d) from ``n`` Gaussian draws.

    Each estimate is a quadratic form ``z^T Q z`` of zero-mean Gaussian
    samples, whose variance is ``2 tr((Q S)^2)``.
    """
    cov = state.covariance(constants)
    out = {}
    for key, q in _quadratic_forms(state.omega, constants.mass).items():
        qs = q @ cov
        out[key] = math.sqrt(2 * np.trace(qs @ qs) / n)
    return out


def compare_with_exact(ens, profile, taus, exact_states):
    """Per-grid-point comparison of ensemble moments with exact moment dynamics.

    Args:
        ens: sampled initial ensemble.
        profile: the ramp.
        taus: scaled times of the grid.
        exact_states: the exact AlgebraState at each of ``taus``.

    Returns:
        list of dicts with ``t, tau`` and, for each of h, l, d, the Monte-Carlo
        value, the exact value and the z-score.
    """
    m = ens.constants.mass
    rows = []
    for tau, exact in zip(taus, exact_states):
        x, p, omega = _evolve_samples(ens, profile, tau)
        mc = dict(zip("hld", _moments(x, p, omega, m)))
        se = moment_standard_errors(exact, len(ens), ens.constants)
        row = {"t": exact.t, "tau": float(tau)}
        for key in "hld":
            ref = getattr(exact, key)
            row[f"{key}_mc"] = mc[key]
            row[f"{key}_exact"] = ref
            row[f"z_{key}"] = (mc[key] - ref) / se[key]
        rows.append(row)
    return rows
