"""Moment vector (H, L, D), the effective generator and its exceptional point.

The expectation values of the Hamiltonian ``H = p^2/2m + m w^2 x^2 / 2``, the
Lagrangian ``L = H - m w^2 x^2`` and the scaled anticommutator
``D = w (xp + px) / 2`` close under the Heisenberg equations of a harmonic
trap.  With the scaled time ``tau`` (``d tau = w dt``) and a constant
adiabatic parameter ``mu`` the rescaled vector ``O / w`` obeys

    dO/dtau = M(mu) O,    M = [[0, -mu, 0], [-mu, 0, -2], [0, 2, 0]].

``M`` is stored as a real matrix; the non-Hermitian "Hamiltonian" that
generates the same flow in Schrodinger form is ``i M`` and all reported
eigenvalues refer to ``i M``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import DEFAULT_CONSTANTS, DomainError, PhysicalConstants

EP_TOL = 1e-9
NILPOTENCY_TOL = 1e-10


def _require_finite(name, value):
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class AlgebraState:
    """Expectation values of (H, L, D) at trap frequency ``omega`` and time ``t``."""

    h: float
    l: float
    d: float
    omega: float
    t: float = 0.0

    def __post_init__(self):
        for name in ("h", "l", "d", "omega", "t"):
            _require_finite(name, getattr(self, name))
        if self.omega <= 0:
            raise DomainError("omega must be positive")
        if self.t < 0:
            raise DomainError("time must be non-negative")
        if self.h <= 0:
            raise DomainError("energy expectation h must be positive")
        # strongly squeezed states lose the Casimir to rounding; allow that much
        slack = 64 * np.finfo(float).eps * self.h * self.h
        if self.h * self.h - self.l * self.l - self.d * self.d <= -slack:
            raise DomainError("h^2 - l^2 - d^2 must be positive")

    @property
    def vector(self):
        return np.array([self.h, self.l, self.d])

    @classmethod
    def ground(cls, omega, t=0.0, constants=DEFAULT_CONSTANTS):
        """Ground state of the trap with frequency ``omega``."""
        return cls(0.5 * constants.hbar * omega, 0.0, 0.0, omega, t)

    @classmethod
    def thermal(cls, omega, nbar, t=0.0, constants=DEFAULT_CONSTANTS):
        """Thermal state with mean occupation ``nbar``."""
        if nbar < 0:
            raise DomainError("mean occupation must be non-negative")
        return cls(constants.hbar * omega * (nbar + 0.5), 0.0, 0.0, omega, t)

    @classmethod
    def squeezed(cls, omega, r, phi=0.0, nbar=0.0, t=0.0, constants=DEFAULT_CONSTANTS):
        """Squeezed thermal state.

        The Wigner ellipse has axis ratio ``exp(2 r)``, its long axis at angle
        ``phi`` in the normalized (x sqrt(m w), p / sqrt(m w)) plane.
        """
        h = constants.hbar * omega * (nbar + 0.5) * math.cosh(2 * r)
        rad = constants.hbar * omega * (nbar + 0.5) * math.sinh(2 * r)
        # m w <x^2> = (h - l)/w is widest along the x axis when phi = 0
        return cls(h, -rad * math.cos(2 * phi), rad * math.sin(2 * phi), omega, t)

    @classmethod
    def from_moments(cls, x2, p2, xp, omega, t=0.0, constants=DEFAULT_CONSTANTS):
        """Build from <x^2>, <p^2> and the symmetrized <xp>."""
        m = constants.mass
        kinetic = p2 / (2 * m)
        potential = 0.5 * m * omega**2 * x2
        return cls(kinetic + potential, kinetic - potential, omega * xp, omega, t)

    def covariance(self, constants=DEFAULT_CONSTANTS):
        """Phase-space covariance [[<x^2>, <xp>], [<xp>, <p^2>]]."""
        m, w = constants.mass, self.omega
        x2 = (self.h - self.l) / (m * w * w)
        p2 = m * (self.h + self.l)
        xp = self.d / w
        return np.array([[x2, xp], [xp, p2]])


def casimir(state):
    """Invariant ``(h^2 - l^2 - d^2) / omega^2``; at least ``hbar^2/4`` for physical states."""
    return (state.h**2 - state.l**2 - state.d**2) / state.omega**2


@dataclass(frozen=True)
class GeneratorMatrix:
    """Real traceless generator ``M(mu)`` of the rescaled moment flow."""

    mu: float
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.entries.setflags(write=False)

    @property
    def trace(self):
        return float(np.trace(self.entries))

    def power(self, k):
        return np.linalg.matrix_power(self.entries, k)


def build_generator(mu):
    """Return the generator ``M(mu)`` with ``dO/dtau = M O``.

    Raises:
        DomainError: if ``mu`` is not finite.
    """
    mu = float(mu)
    _require_finite("mu", mu)
    entries = np.array(
        [[0.0, -mu, 0.0],
         [-mu, 0.0, -2.0],
         [0.0, 2.0, 0.0]]
    )
    return GeneratorMatrix(mu, entries)


def nilpotency_index(m, tol=NILPOTENCY_TOL):
    """Smallest ``k <= 3`` with ``max|M^k| <= tol``, or ``None``."""
    entries = m.entries if isinstance(m, GeneratorMatrix) else np.asarray(m)
    power = np.eye(entries.shape[0])
    for k in (1, 2, 3):
        power = power @ entries
        if np.max(np.abs(power)) <= tol:
            return k
    return None


# below this 1/mu overflows; eigenvectors switch to the rescaled mu -> 0 form
_TINY_MU = 1e-300


def _omega(mu):
    # sqrt(4 - mu^2) on the principal branch: imaginary beyond the EP
    return np.sqrt(complex(4.0 - mu * mu))


def right_eigenvectors(mu):
    """Unnormalized right eigenvectors (v0, v+, v-) of ``i M``.

    ``v0 = (1, 0, -mu/2)`` and ``v+- = (mu, +-i W, -2)/mu`` with
    ``W = sqrt(4 - mu^2)``; at ``mu = 0`` the rescaled limit ``(0, +-i, -1)``.
    The rescaled form ``(mu, +-i W, -2)/2`` is also used for subnormal ``mu``,
    where ``1/mu`` would overflow.
    """
    w = _omega(mu)
    v0 = np.array([1.0, 0.0, -mu / 2], dtype=complex)
    if abs(mu) < _TINY_MU:
        vp = np.array([mu, 1j * w, -2.0]) / 2
        vm = np.array([mu, -1j * w, -2.0]) / 2
    else:
        vp = np.array([mu, 1j * w, -2.0]) / mu
        vm = np.array([mu, -1j * w, -2.0]) / mu
    return v0, vp, vm


def left_eigenvectors(mu):
    """Unnormalized left eigenvectors (w0, w+, w-), i.e. eigenvectors of ``M^T``.

    Paired with the right eigenvectors by eigenvalue; same ``mu = 0`` limit
    convention as :func:`right_eigenvectors`.
    """
    w = _omega(mu)
    w0 = np.array([1.0, 0.0, mu / 2], dtype=complex)
    if abs(mu) < _TINY_MU:
        wp = np.array([mu, 1j * w, 2.0]) / 2
        wm = np.array([mu, -1j * w, 2.0]) / 2
    else:
        wp = np.array([mu, 1j * w, 2.0]) / mu
        wm = np.array([mu, -1j * w, 2.0]) / mu
    return w0, wp, wm


@dataclass(frozen=True)
class SpectralData:
    """Closed-form spectrum of ``i M(mu)`` and exceptional-point diagnostics.

    Eigenvalues, eigenvectors and their unit-norm copies are ordered
    ``(E0, E+, E-)``.
    """

    mu: float
    eigenvalues: tuple
    right_eigenvectors: tuple
    left_eigenvectors: tuple
    right_unit: tuple
    left_unit: tuple
    is_ep: bool
    nilpotency_index: int | None
    defect: float

    def to_dict(self):
        def cplx(z):
            return [float(np.real(z)), float(np.imag(z))]

        return {
            "mu": self.mu,
            "eigenvalues": [cplx(e) for e in self.eigenvalues],
            "right_eigenvectors": [[cplx(z) for z in v] for v in self.right_eigenvectors],
            "left_eigenvectors": [[cplx(z) for z in v] for v in self.left_eigenvectors],
            "is_ep": self.is_ep,
            "nilpotency_index": self.nilpotency_index,
            "defect": self.defect,
            "biorthogonal_product": biorthogonal_product(self.mu),
        }


def _unit(v):
    norm = np.linalg.norm(v)
    return v / norm if norm > 0 else v


def eigensystem(mu, ep_tol=EP_TOL, nil_tol=NILPOTENCY_TOL):
    """Analytic eigenvalues and eigenvectors of ``i M(mu)``.

    ``E0 = 0`` and ``E+- = +-sqrt(4 - mu^2)``, which are real for ``|mu| <= 2``
    and ``+-i sqrt(mu^2 - 4)`` beyond.  Within ``ep_tol`` of ``|4 - mu^2| = 0``
    the point is flagged as the exceptional point and all three eigenvalues
    are reported as zero.
    """
    mu = float(mu)
    _require_finite("mu", mu)
    gap = 4.0 - mu * mu
    is_ep = abs(gap) < ep_tol
    w = 0j if is_ep else _omega(mu)
    m = build_generator(mu)
    # Cayley-Hamilton bounds max|M^3| by |4 - mu^2| max|M| near the EP
    tol = nil_tol + (ep_tol * np.max(np.abs(m.entries)) if is_ep else 0.0)
    right = right_eigenvectors(mu)
    left = left_eigenvectors(mu)
    return SpectralData(
        mu=mu,
        eigenvalues=(0j, complex(w), complex(-w)),
        right_eigenvectors=right,
        left_eigenvectors=left,
        right_unit=tuple(_unit(v) for v in right),
        left_unit=tuple(_unit(v) for v in left),
        is_ep=is_ep,
        nilpotency_index=nilpotency_index(m, tol),
        defect=math.sqrt(abs(gap)),
    )


def biorthogonal_product(mu):
    """Unconjugated product ``w0 . v0`` of the mode that coalesces at ``|mu| = 2``.

    Equals ``1 - mu^2/4``: one at ``mu = 0``, zero at the exceptional point
    where the right vector ``(1, 0, -1)`` meets the left vector ``(1, 0, 1)``.
    """
    v0 = right_eigenvectors(float(mu))[0]
    w0 = left_eigenvectors(float(mu))[0]
    return float(np.real(w0 @ v0))


def casimir_lower_bound(constants: PhysicalConstants = DEFAULT_CONSTANTS):
    return constants.hbar**2 / 4
