"""Covariance-matrix calculus for bosonic Gaussian states.

Conventions used throughout the package:

* quadrature ordering ``(q1, p1, q2, p2, ...)``;
* the vacuum covariance matrix is ``I / 2``, so a thermal mode with mean
  photon number ``N`` has covariance ``(N + 1/2) I``;
* first moments are ignored (they never affect entropies);
* entropies are returned in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError

#: tolerance used for the uncertainty-relation check ``nu >= 1/2``
PHYSICAL_TOL = 1e-10

_SYM_TOL = 1e-12
_ZERO_CLAMP = 1e-15


def symplectic_form(n_modes: int) -> np.ndarray:
    """Return the ``2n x 2n`` symplectic form ``Omega = (+) [[0, 1], [-1, 0]]``."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class CovarianceMatrix:
    """Real symmetric ``2n x 2n`` matrix of quadrature second moments."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise ValidationError(f"covariance matrix must be 2n x 2n, got shape {m.shape}")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.T)) > _SYM_TOL * scale:
            raise ValidationError("covariance matrix is not symmetric")
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def n_modes(self) -> int:
        return self.entries.shape[0] // 2

    def block(self, i: int, j: int) -> np.ndarray:
        """2x2 block coupling modes ``i`` and ``j``."""
        return self.entries[2 * i:2 * i + 2, 2 * j:2 * j + 2]

    def __add__(self, other: "CovarianceMatrix") -> "CovarianceMatrix":
        """Direct sum (tensor product of the underlying states)."""
        a, b = self.entries, other.entries
        out = np.zeros((a.shape[0] + b.shape[0],) * 2)
        out[:a.shape[0], :a.shape[0]] = a
        out[a.shape[0]:, a.shape[0]:] = b
        return CovarianceMatrix(out)


@dataclass(frozen=True)
class ThermalSpec:
    """Single-mode thermal state with mean photon number ``n_mean``."""

    n_mean: float

    def __post_init__(self):
        if not self.n_mean >= 0:
            raise DomainError(f"mean photon number must be >= 0, got {self.n_mean}")

    @property
    def v(self) -> float:
        """Geometric ratio ``N / (N + 1)`` of the photon-number distribution."""
        return self.n_mean / (self.n_mean + 1.0)


@dataclass(frozen=True)
class GaussianInputParams:
    """Single-mode Gaussian input parametrised by energy and shape.

    ``energy`` is ``<a^dag a> + 1/2``; ``x = ((N + 1/2) / energy)**2`` measures
    how close the state is to thermal (``x = 1``); ``angle`` rotates the
    squeezing axis.
    """

    energy: float
    x: float = 1.0
    angle: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.x <= 1.0:
            raise DomainError(f"shape parameter x must lie in (0, 1], got {self.x}")
        if self.energy * math.sqrt(self.x) < 0.5 - 1e-12:
            raise DomainError(
                f"energy={self.energy}, x={self.x} gives N + 1/2 = {self.energy * math.sqrt(self.x)} < 1/2"
            )

    @property
    def n_thermal(self) -> float:
        """Photon number ``N`` of the thermal state this input is squeezed from."""
        return max(self.energy * math.sqrt(self.x) - 0.5, 0.0)


def _as_thermal(spec) -> ThermalSpec:
    return spec if isinstance(spec, ThermalSpec) else ThermalSpec(float(spec))


def bosonic_entropy(s):
    """Entropy in bits of a thermal mode with mean photon number ``s``.

    ``g(s) = (s + 1) log2(s + 1) - s log2(s)``, with ``g(0) = 0``. Accepts
    scalars or arrays.
    """
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError(f"bosonic entropy needs s >= 0, got {s}")
    safe = np.where(arr < _ZERO_CLAMP, 1.0, arr)
    # log1p form avoids cancelling two large terms when s is big
    val = (np.log1p(safe) + safe * np.log1p(1.0 / safe)) / math.log(2.0)
    val = np.where(arr < _ZERO_CLAMP, 0.0, val)
    return float(val) if val.ndim == 0 else val


def symplectic_eigenvalues(cov: CovarianceMatrix) -> np.ndarray:
    """Williamson spectrum of ``cov``, one value per mode, in descending order.

    For a positive definite matrix ``V`` the antisymmetric matrix
    ``V^{1/2} Omega V^{1/2}`` is similar to ``Omega V``; its singular values are
    the symplectic eigenvalues, each appearing twice. Non-positive inputs fall
    back to the moduli of the eigenvalues of ``i Omega V``.
    """
    if not isinstance(cov, CovarianceMatrix):
        cov = CovarianceMatrix(cov)
    v = cov.entries
    n = cov.n_modes
    omega = symplectic_form(n)
    w, u = np.linalg.eigh(v)
    if w[0] > 0:
        root = (u * np.sqrt(w)) @ u.T
        sv = np.linalg.svd(root @ omega @ root, compute_uv=False)
    else:
        sv = np.abs(np.linalg.eigvals(1j * omega @ v))
    sv = np.sort(sv)[::-1]
    return sv[::2].copy()


def gaussian_entropy(cov: CovarianceMatrix) -> float:
    """Von Neumann entropy (bits) of the Gaussian state with covariance ``cov``."""
    nu = symplectic_eigenvalues(cov)
    if nu.min() < 0.5 - PHYSICAL_TOL:
        raise ValidationError(f"unphysical covariance matrix: symplectic eigenvalue {nu.min()} < 1/2")
    return float(np.sum(bosonic_entropy(np.clip(nu - 0.5, 0.0, None))))


def is_physical(cov: CovarianceMatrix, tol: float = PHYSICAL_TOL) -> bool:
    return bool(symplectic_eigenvalues(cov).min() >= 0.5 - tol)


def thermal_cov(spec) -> CovarianceMatrix:
    spec = _as_thermal(spec)
    return CovarianceMatrix((spec.n_mean + 0.5) * np.eye(2))


def tmsv_cov(spec) -> CovarianceMatrix:
    """Two-mode squeezed vacuum purifying a thermal mode; mode order (Q, R)."""
    spec = _as_thermal(spec)
    n = spec.n_mean
    a = (n + 0.5) * np.eye(2)
    c = math.sqrt(n * (n + 1.0)) * np.diag([1.0, -1.0])
    return CovarianceMatrix(np.block([[a, c], [c, a]]))


def rotation(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def make_gaussian_input(params: GaussianInputParams) -> CovarianceMatrix:
    """Rotated squeezed thermal state with the requested energy and shape.

    The thermal covariance ``lam I`` (``lam = E sqrt(x)``) is squeezed by
    ``s`` with ``cosh 2s = 1/sqrt(x)``, which keeps the determinant at
    ``lam**2`` and raises the half trace to ``E``.
    """
    lam = params.energy * math.sqrt(params.x)
    two_s = math.acosh(1.0 / math.sqrt(params.x))
    core = np.diag([lam * math.exp(two_s), lam * math.exp(-two_s)])
    rot = rotation(params.angle)
    return CovarianceMatrix(rot @ core @ rot.T)


def gaussian_input_purification(params: GaussianInputParams) -> CovarianceMatrix:
    """Two-mode pure state whose first mode carries ``make_gaussian_input(params)``."""
    spec = ThermalSpec(params.n_thermal)
    two_s = math.acosh(1.0 / math.sqrt(params.x))
    sq = rotation(params.angle) @ np.diag([math.exp(two_s / 2), math.exp(-two_s / 2)])
    s = np.eye(4)
    s[:2, :2] = sq
    return CovarianceMatrix(s @ tmsv_cov(spec).entries @ s.T)


def mean_photon(cov: CovarianceMatrix) -> float:
    """Total mean photon number ``tr(cov)/2 - n/2``."""
    if not isinstance(cov, CovarianceMatrix):
        cov = CovarianceMatrix(cov)
    return float(np.trace(cov.entries) / 2.0 - cov.n_modes / 2.0)
