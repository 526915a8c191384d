"""Truncated photon-number-basis oracle.

Everything here is brute force on purpose: states are rebuilt from their
characteristic functions by deterministic polar quadrature, the channel is
applied as loss Kraus operators followed by Gaussian averaging over
displacements, and entropies come from diagonalisation. The closed forms in
:mod:`gausscap.coherent` and :mod:`gausscap.perturbation` are checked
against these routines.

Polar quadrature: with ``mu = r e^{i theta}`` and ``t = r^2``,
``int d^2mu / pi F = int_0^inf dt int_0^{2pi} dtheta / (2 pi) F``. The radial
integral uses Gauss-Laguerre nodes in ``t`` rescaled to the Gaussian decay of
the integrand, the angular one the uniform trapezoid rule. Integrands are
Gaussians times polynomials in ``mu, mu*``, so both rules are exact once the
node counts exceed the polynomial degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import eval_genlaguerre, gammaln, roots_laguerre

from .channel import ChannelParams
from .errors import ConditioningError, ConvergenceError, CutoffError, DomainError, ValidationError

#: eigenvalues above ``-INVALID_EIG`` are treated as truncation noise and clamped
INVALID_EIG = 1e-6


@dataclass(frozen=True)
class FockDensityMatrix:
    """Hermitian operator on ``n_modes`` modes, each truncated to ``cutoff`` levels.

    Two-mode operators use the index order ``(mode0, mode1)`` with mode 0
    varying slowest, matching ``np.kron``.
    """

    entries: np.ndarray
    cutoff: int
    n_modes: int = 1

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        dim = self.cutoff ** self.n_modes
        if m.shape != (dim, dim):
            raise ValidationError(f"expected shape {(dim, dim)}, got {m.shape}")
        scale = max(1e-300, float(np.max(np.abs(m))) if m.size else 1.0)
        if np.max(np.abs(m - m.conj().T)) > 1e-12 * max(1.0, scale):
            raise ValidationError("operator is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def __add__(self, other):
        _check_compatible(self, other)
        return FockDensityMatrix(self.entries + other.entries, self.cutoff, self.n_modes)

    def __mul__(self, scalar: float):
        return FockDensityMatrix(scalar * self.entries, self.cutoff, self.n_modes)

    __rmul__ = __mul__

    def kron(self, other: "FockDensityMatrix") -> "FockDensityMatrix":
        if other.cutoff != self.cutoff:
            raise ValidationError("cutoffs must match for a tensor product")
        return FockDensityMatrix(np.kron(self.entries, other.entries), self.cutoff, self.n_modes + other.n_modes)


def _check_compatible(a: FockDensityMatrix, b: FockDensityMatrix):
    if a.cutoff != b.cutoff or a.n_modes != b.n_modes:
        raise ValidationError("operators live on different truncated spaces")


@dataclass(frozen=True)
class QuadratureSpec:
    radial_nodes: int
    angular_nodes: int
    radius_scale: float

    def __post_init__(self):
        if self.radial_nodes < 8 or self.angular_nodes < 8:
            raise DomainError("quadrature needs at least 8 radial and 8 angular nodes")
        if not self.radius_scale > 0:
            raise DomainError("radius_scale must be positive")

    @classmethod
    def for_cutoff(cls, cutoff: int, radius_scale: float, extra_degree: int = 0) -> "QuadratureSpec":
        """Node counts that integrate ``cutoff``-level matrix elements exactly."""
        return cls(cutoff + extra_degree + 8, 2 * (cutoff + extra_degree) + 8, radius_scale)

    def refined(self, step: int = 8) -> "QuadratureSpec":
        return QuadratureSpec(self.radial_nodes + step, self.angular_nodes + 2 * step, self.radius_scale)

    def radial(self):
        """Nodes ``t_i`` and weights so that ``int_0^inf dt F(t) ~= sum w_i F(t_i)``."""
        return _radial_rule(self.radial_nodes, float(self.radius_scale))

    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.angular_nodes) / self.angular_nodes


@lru_cache(maxsize=64)
def _radial_rule(n: int, scale: float):
    x, w = roots_laguerre(n)
    # weights for the bare integrand: w_i e^{x_i}, rescaled to t = x / scale
    return x / scale, np.exp(np.log(w) + x) / scale


# ---------------------------------------------------------------------------
# displacement operators


def displacement_element(i: int, j: int, mu: complex) -> complex:
    """``<i| D(mu) |j>`` from the associated Laguerre closed form."""
    if i < 0 or j < 0:
        raise DomainError("Fock indices must be non-negative")
    mu = complex(mu)
    t = abs(mu) ** 2
    lo, hi = min(i, j), max(i, j)
    pref = math.exp(0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) - t / 2.0)
    lag = eval_genlaguerre(lo, hi - lo, t)
    power = mu ** (i - j) if i >= j else (-mu.conjugate()) ** (j - i)
    return complex(pref * power * lag)


def displacement_matrix(mu, cutoff: int) -> np.ndarray:
    """Truncated ``D(mu)`` for a scalar or an array of ``mu`` (extra leading axes).

    Same Laguerre closed form as :func:`displacement_element`, evaluated in
    log space for the modulus and broadcast over all index pairs. (The
    textbook two-term recurrence in the column index loses all accuracy for
    ``|mu| >~ 4`` at a few tens of photons, which the quadrature nodes reach.)
    """
    mu = np.asarray(mu, dtype=complex)
    t = (np.abs(mu) ** 2)[..., None, None]
    idx = np.arange(cutoff)
    i, j = idx[:, None], idx[None, :]
    lo, hi = np.minimum(i, j), np.maximum(i, j)
    diff = hi - lo
    r = np.sqrt(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_mod = 0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) - t / 2.0 + diff * np.log(r)
        log_mod = np.where(diff == 0, 0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) - t / 2.0, log_mod)
    lag = eval_genlaguerre(lo, diff, t)
    phase = np.exp(1j * np.angle(mu))[..., None, None] ** (i - j)
    sign = np.where(j > i, (-1.0) ** diff, 1.0)
    return np.exp(log_mod) * lag * sign * phase


def _real_displacements(r: np.ndarray, cutoff: int) -> np.ndarray:
    return np.real(displacement_matrix(r.astype(complex), cutoff))


# ---------------------------------------------------------------------------
# states


def thermal_fock(n_mean: float, cutoff: int, tail: float = 1e-12) -> FockDensityMatrix:
    """Thermal state ``(1 - v) v^n``, renormalised on the truncation.

    Raises :class:`CutoffError` when the discarded geometric tail ``v**cutoff``
    exceeds ``tail``.
    """
    if n_mean < 0:
        raise DomainError("mean photon number must be >= 0")
    v = n_mean / (n_mean + 1.0)
    if v ** cutoff >= tail:
        raise CutoffError(f"cutoff {cutoff} leaves tail mass {v ** cutoff:.3g} >= {tail:g}")
    p = (1.0 - v) * v ** np.arange(cutoff)
    return FockDensityMatrix(np.diag(p / p.sum()), cutoff)


def state_from_charfn(chi: Callable[[np.ndarray], np.ndarray], cutoff: int, quad: QuadratureSpec,
                      check: bool = True, tol: float = 1e-6) -> FockDensityMatrix:
    """Operator ``int d^2mu/pi chi(mu) D(-mu)`` on the truncated space.

    ``chi`` must accept complex arrays. ``<i|D(-r e^{i th})|j> = e^{i th (i-j)} <i|D(-r)|j>``
    reduces the angular sum to one discrete Fourier coefficient per
    diagonal offset. With ``check`` the integral is repeated on a refined
    rule and a :class:`ConvergenceError` raised if the two disagree by
    more than ``tol``.
    """
    out = _charfn_integral(chi, cutoff, quad)
    if check:
        fine = _charfn_integral(chi, cutoff, quad.refined())
        dev = float(np.max(np.abs(fine - out)))
        if dev > tol:
            raise ConvergenceError(f"quadrature levels disagree by {dev:.3g}")
    return FockDensityMatrix(0.5 * (out + out.conj().T), cutoff)


def _charfn_integral(chi, cutoff, quad: QuadratureSpec) -> np.ndarray:
    t, wt = quad.radial()
    th = quad.angles()
    r = np.sqrt(t)
    mu = r[:, None] * np.exp(1j * th)[None, :]
    vals = chi(mu)
    offsets = np.arange(-(cutoff - 1), cutoff)
    # coef[k, p] = (1/n_th) sum_th chi(r_k e^{i th}) e^{i th p}
    coef = vals @ np.exp(1j * np.outer(th, offsets)) / len(th)
    d = _real_displacements(-r, cutoff)
    idx = np.arange(cutoff)
    pmat = idx[:, None] - idx[None, :] + (cutoff - 1)
    return np.einsum("k,kij,kij->ij", wt, d, coef[:, pmat])


def thermal_charfn(n_mean: float):
    return lambda mu: np.exp(-(n_mean + 0.5) * np.abs(mu) ** 2)


def monomial_operator(n_mean: float, a: int, b: int, cutoff: int, quad: QuadratureSpec | None = None,
                      check: bool = True) -> np.ndarray:
    """Operator whose characteristic function is ``exp(-(N+1/2)|mu|^2) mu^a mu*^b``."""
    if quad is None:
        quad = QuadratureSpec.for_cutoff(cutoff, n_mean + 1.0, a + b)
    base = thermal_charfn(n_mean)
    op = _charfn_integral(lambda mu: base(mu) * mu ** a * np.conj(mu) ** b, cutoff, quad)
    if check:
        fine = _charfn_integral(lambda mu: base(mu) * mu ** a * np.conj(mu) ** b, cutoff, quad.refined())
        dev = float(np.max(np.abs(fine - op)))
        if dev > 1e-6:
            raise ConvergenceError(f"quadrature levels disagree by {dev:.3g}")
    return op


def perturbation_operator(spec, n_mean: float, cutoff: int, quad: QuadratureSpec | None = None) -> FockDensityMatrix:
    """The traceless Hermitian operator ``phi`` added (times epsilon) to the product thermal state.

    Its characteristic function is ``prod_i chi_N(mu_i) * (c prod mu_i^k_i mu_i*^l_i + c.c.)``,
    a sum of two tensor products of single-mode monomial operators.
    """
    n = len(spec.k)
    cache = {}

    def mono(a, b):
        if (a, b) not in cache:
            cache[(a, b)] = monomial_operator(n_mean, a, b, cutoff, quad)
        return cache[(a, b)]

    first = np.ones((1, 1), dtype=complex)
    second = np.ones((1, 1), dtype=complex)
    for i in range(n):
        first = np.kron(first, mono(spec.k[i], spec.l[i]))
        second = np.kron(second, mono(spec.l[i], spec.k[i]))
    c = complex(spec.c)
    op = c * first + c.conjugate() * second
    return FockDensityMatrix(0.5 * (op + op.conj().T), cutoff, n)


def product_thermal(n_mean: float, cutoff: int, n_modes: int, tail: float = 1e-12) -> FockDensityMatrix:
    rho = thermal_fock(n_mean, cutoff, tail)
    out = rho
    for _ in range(n_modes - 1):
        out = out.kron(rho)
    return out


def perturbed_state(spec, n_mean: float, cutoff: int, quad: QuadratureSpec | None = None,
                    tail: float = 1e-12) -> tuple[FockDensityMatrix, FockDensityMatrix]:
    """Return ``(rho_eps, phi)`` with ``rho_eps = rho^{(x)n} + epsilon * phi``.

    Raises :class:`DomainError` when ``rho_eps`` has a negative eigenvalue on
    the truncation, which means ``epsilon`` is too large.
    """
    n = len(spec.k)
    if n > 2:
        raise DomainError("the Fock oracle handles at most two modes")
    phi = perturbation_operator(spec, n_mean, cutoff, quad)
    rho = product_thermal(n_mean, cutoff, n, tail) + spec.epsilon * phi
    low = float(rho.eigvalsh().min())
    if low < -1e-12:
        raise DomainError(f"epsilon={spec.epsilon} makes the state non-positive (eigenvalue {low:.3g}); use a smaller epsilon")
    return rho, phi


# ---------------------------------------------------------------------------
# channel


def _loss_transfer(eta: float, cutoff: int, env_cutoff: int) -> np.ndarray:
    """``T[i, j, k, l] = <i| L(|k><l|) |j>`` for the pure-loss channel.

    Kraus operators ``A_m |n> = sqrt(C(n, m) eta^(n-m) (1-eta)^m) |n-m>``.
    """
    kraus = np.zeros((env_cutoff, cutoff, cutoff))
    for m in range(min(env_cutoff, cutoff)):
        for n in range(m, cutoff):
            kraus[m, n - m, n] = math.sqrt(math.comb(n, m) * eta ** (n - m) * (1.0 - eta) ** m)
    return np.einsum("mik,mjl->ijkl", kraus, kraus, optimize=True)


def _noise_transfer(n_noise: float, cutoff: int, quad: QuadratureSpec) -> np.ndarray:
    """``T[i, j, k, l]`` for Gaussian displacement averaging with ``n_noise`` photons.

    ``<i|D(r e^{i th})|k> = e^{i th (i-k)} <i|D(r)|k>``, so the angular rule
    contributes a factor ``S(i - k - j + l)`` that is a Kronecker delta once
    the rule resolves all offsets.
    """
    t, wt = quad.radial()
    weight = wt * np.exp(-t / n_noise) / n_noise
    d = _real_displacements(np.sqrt(t), cutoff)
    core = np.einsum("r,rik,rjl->ijkl", weight, d, d, optimize=True)
    th = quad.angles()
    offsets = np.arange(-2 * (cutoff - 1), 2 * cutoff - 1)
    s = np.real(np.exp(1j * np.outer(offsets, th)).mean(axis=1))
    idx = np.arange(cutoff)
    p = (idx[:, None, None, None] - idx[None, None, :, None]
         - idx[None, :, None, None] + idx[None, None, None, :]) + 2 * (cutoff - 1)
    return core * s[p]


@lru_cache(maxsize=16)
def channel_transfer(eta: float, n_noise: float, cutoff: int, env_cutoff: int | None = None,
                     noise_nodes: int | None = None) -> np.ndarray:
    """Transfer tensor ``T[i, j, k, l] = <i| E(|k><l|) |j>`` of the full channel, cached."""
    env_cutoff = cutoff if env_cutoff is None else env_cutoff
    t = _loss_transfer(eta, cutoff, env_cutoff)
    if n_noise > 0.0:
        if noise_nodes is None:
            quad = QuadratureSpec(cutoff + 8, 4 * cutoff + 8, 1.0 + 1.0 / n_noise)
        else:
            quad = QuadratureSpec(noise_nodes, 4 * cutoff + 8, 1.0 + 1.0 / n_noise)
        noise = _noise_transfer(n_noise, cutoff, quad)
        d2 = cutoff * cutoff
        t = (noise.reshape(d2, d2) @ t.reshape(d2, d2)).reshape(t.shape)
    t.setflags(write=False)
    return t


def _tail_guard(params: ChannelParams, mean_in: float, cutoff: int, tail: float):
    n_out = params.eta * mean_in + params.n_noise
    v = n_out / (n_out + 1.0)
    if v ** cutoff >= tail:
        raise CutoffError(f"output tail mass ~{v ** cutoff:.3g} at cutoff {cutoff} exceeds {tail:g}")


def apply_channel_fock(params: ChannelParams, rho: FockDensityMatrix, env_cutoff: int | None = None,
                       tail: float = 1e-8) -> FockDensityMatrix:
    """Send mode 0 of ``rho`` through the channel; any second mode is left untouched."""
    d = rho.cutoff
    t = channel_transfer(params.eta, params.n_noise, d, env_cutoff)
    if rho.n_modes == 1:
        mean_in = float(np.real(np.trace(rho.entries @ np.diag(np.arange(d)))))
        _tail_guard(params, max(mean_in, 0.0), d, tail)
        out = np.tensordot(t, rho.entries, axes=([2, 3], [0, 1]))
        return FockDensityMatrix(out, d, 1)
    if rho.n_modes != 2:
        raise DomainError("apply_channel_fock supports one or two modes")
    r4 = rho.entries.reshape(d, d, d, d)
    marg = np.einsum("irjr->ij", r4)
    mean_in = float(np.real(np.trace(marg @ np.diag(np.arange(d)))))
    _tail_guard(params, max(mean_in, 0.0), d, tail)
    out = np.tensordot(t, r4, axes=([2, 3], [0, 2]))  # (i, j, r, s)
    out = out.transpose(0, 2, 1, 3).reshape(d * d, d * d)
    return FockDensityMatrix(out, d, 2)


def channel_on_outer(params: ChannelParams, u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``(E (x) I)(|u><w|)`` for two-mode vectors given as ``d x d`` arrays ``u[q, r]``.

    Costs ``O(d^5)`` instead of the ``O(d^6)`` of the dense route.
    """
    d = u.shape[0]
    t = channel_transfer(params.eta, params.n_noise, d)
    half = np.tensordot(t, u, axes=([2], [0]))            # (i, j, l, r)
    out = np.tensordot(half, np.conj(w), axes=([2], [0]))  # (i, j, r, s)
    return out.transpose(0, 2, 1, 3).reshape(d * d, d * d)


# ---------------------------------------------------------------------------
# entropies and traces


def von_neumann_entropy(rho: FockDensityMatrix, base: float = 2.0) -> float:
    """``-Tr rho log rho`` (bits by default); small negative eigenvalues are clamped."""
    lam = rho.eigvalsh()
    if lam.min() < -INVALID_EIG:
        raise ValidationError(f"not a state: eigenvalue {lam.min():.3g}")
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log(lam)) / math.log(base))


def trace_quotient(phi: FockDensityMatrix, rho: FockDensityMatrix, other: FockDensityMatrix | None = None,
                   floor: float = 1e-14) -> float:
    """``Tr(phi rho^{-1} other)`` evaluated in the eigenbasis of ``rho`` (``other`` defaults to ``phi``).

    ``floor`` guards against eigenvalues too small to invert; operators built
    as tensor products of accurately integrated single-mode factors tolerate
    a much lower floor than a generic matrix.
    """
    _check_compatible(phi, rho)
    other = phi if other is None else other
    _check_compatible(other, rho)
    r = rho.entries
    diag = np.diag(r)
    if np.array_equal(r, np.diag(diag)):
        # product thermal references are diagonal already
        lam = diag.real
        a, b = phi.entries, other.entries
    else:
        lam, u = np.linalg.eigh(r)
        a = u.conj().T @ phi.entries @ u
        b = u.conj().T @ other.entries @ u
    if lam.min() < floor:
        raise ConditioningError(f"state eigenvalue {lam.min():.3g} below {floor:g}; reduce the cutoff")
    # Tr(a diag(1/lam) b) = sum_ij a_ij b_ji / lam_j
    return float(np.real(np.sum(a * (b / lam[:, None]).T)))


def number_operator(cutoff: int) -> np.ndarray:
    return np.diag(np.arange(cutoff, dtype=float))


def annihilation(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff)), 1)


# ---------------------------------------------------------------------------
# joint states


def tmsv_vector(n_mean: float, cutoff: int) -> np.ndarray:
    """``psi[q, r]`` of the two-mode squeezed vacuum purifying a thermal state."""
    v = n_mean / (n_mean + 1.0)
    return np.diag(np.sqrt(1.0 - v) * v ** (np.arange(cutoff) / 2.0)).astype(complex)


def purification(rho: FockDensityMatrix) -> np.ndarray:
    """``psi[q, r] = (sqrt(rho))[q, r]``, the canonical purification of a single-mode state."""
    if rho.n_modes != 1:
        raise DomainError("purification is implemented for single-mode states")
    lam, u = np.linalg.eigh(rho.entries)
    return (u * np.sqrt(np.clip(lam, 0.0, None))) @ u.conj().T


def joint_output(params: ChannelParams, rho: FockDensityMatrix) -> FockDensityMatrix:
    """Output of the channel on the Q half of the canonical purification of ``rho``."""
    psi = purification(rho)
    return FockDensityMatrix(channel_on_outer(params, psi, psi), rho.cutoff, 2)


def coherent_info_fock(params: ChannelParams, rho: FockDensityMatrix, base: float = 2.0) -> float:
    """``S(E(rho)) - S((E (x) I)(psi))`` on the truncated space."""
    out = apply_channel_fock(params, rho)
    return von_neumann_entropy(out, base) - von_neumann_entropy(joint_output(params, rho), base)


def lemma_check(k: int, m: int, n_mean: float, params: ChannelParams, cutoff: int, part: int = 1) -> float:
    """Max elementwise gap between the two sides of the reference-swap identity.

    Part 1: ``(E (x) I)(a^dag^k rho_QR a^m) = v^{-(k+m)/2} b^k rho_QR' b^dag^m``.
    Part 2: ``(E (x) I)(a^k rho_QR a^dag^m) = v^{(k+m)/2} b^dag^k rho_QR' b^m``.
    ``rho_QR`` is the truncated two-mode squeezed vacuum, ``b`` acts on R.
    """
    if part not in (1, 2):
        raise DomainError("part must be 1 or 2")
    if k + m > 4:
        raise DomainError("k + m must be <= 4 to keep truncation artefacts small")
    v = n_mean / (n_mean + 1.0)
    psi = tmsv_vector(n_mean, cutoff)
    a = annihilation(cutoff)
    op_q = a.T if part == 1 else a
    op_r = a if part == 1 else a.T
    # left operand acts on Q from the left: (A psi)[q, r]
    left_k = np.linalg.matrix_power(op_q, k) @ psi
    left_m = np.linalg.matrix_power(op_q, m) @ psi
    lhs = channel_on_outer(params, left_k, left_m)
    joint = channel_on_outer(params, psi, psi).reshape(cutoff, cutoff, cutoff, cutoff)
    br_k = np.linalg.matrix_power(op_r, k)
    br_m = np.linalg.matrix_power(op_r, m)
    rhs = np.einsum("rs,isjt,ut->irju", br_k, joint, br_m.conj(), optimize=True)
    scale = v ** (-(k + m) / 2.0) if part == 1 else v ** ((k + m) / 2.0)
    rhs = scale * rhs.reshape(cutoff * cutoff, cutoff * cutoff)
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# entropy-shift extrapolation


@dataclass(frozen=True)
class ShiftCoefficients:
    """Second-order entropy coefficients in nats: ``S(eps) = S(0) + a1 eps + coef eps^2 + ...``."""

    input: float
    output: float | None
    joint: float | None
    errors: tuple
    epsilons: tuple


def _second_order(values_plus, values_minus, s0, epsilons):
    """Richardson-extrapolated eps^2 coefficient from symmetric differences.

    ``(S(e) + S(-e) - 2 S(0)) / (2 e^2) = b + b4 e^2 + ...``, so combining
    successive halvings removes the e^2 contamination. Returns the estimate and
    the gap between the two most refined extrapolants.
    """
    raw = [(sp + sm - 2.0 * s0) / (2.0 * e * e) for sp, sm, e in zip(values_plus, values_minus, epsilons)]
    ext = []
    for i in range(len(raw) - 1):
        ratio = (epsilons[i] / epsilons[i + 1]) ** 2
        ext.append((ratio * raw[i + 1] - raw[i]) / (ratio - 1.0))
    best = ext[-1]
    err = abs(ext[-1] - ext[-2]) if len(ext) > 1 else abs(raw[-1] - raw[-2])
    return best, err


def entropy_shift_oracle(spec, n_mean: float, params: ChannelParams | None = None,
                         epsilons: Sequence[float] = (0.02, 0.01, 0.005), cutoff: int = 40,
                         joint_params: ChannelParams | None = None, joint_cutoff: int = 30,
                         tol: float = 0.1) -> ShiftCoefficients:
    """Numerical eps^2 coefficients of input, output and joint-output entropies (nats).

    ``spec.epsilon`` is ignored; the ladder ``epsilons`` (descending, at least
    three values) is used instead. The output coefficient needs ``params``, the
    joint one ``joint_params`` (single-mode specs only). Raises
    :class:`ConvergenceError` if the extrapolation residual exceeds ``tol``
    times the coefficient.
    """
    eps = sorted((float(e) for e in epsilons), reverse=True)
    if len(eps) < 3:
        raise DomainError("need at least three epsilon values")
    n_modes = len(spec.k)
    phi = perturbation_operator(spec, n_mean, cutoff)
    rho = product_thermal(n_mean, cutoff, n_modes)

    def states(e, base, pert):
        out = []
        for sgn in (1.0, -1.0):
            st = base + (sgn * e) * pert
            if st.eigvalsh().min() < -1e-12:
                raise DomainError(f"epsilon={e} gives a non-positive state; use a smaller ladder")
            out.append(st)
        return out

    def coefficient(base, pert, entropy):
        s0 = entropy(base)
        plus, minus = [], []
        for e in eps:
            sp, sm = states(e, base, pert)
            plus.append(entropy(sp))
            minus.append(entropy(sm))
        return _second_order(plus, minus, s0, eps)

    nats = lambda st: von_neumann_entropy(st, base=math.e)  # noqa: E731
    c_in, e_in = coefficient(rho, phi, nats)
    errors = [e_in]
    c_out = c_joint = None
    if params is not None:
        if n_modes != 1:
            raise DomainError("output oracle is single-mode")
        c_out, e_out = coefficient(apply_channel_fock(params, rho), apply_channel_fock_operator(params, phi), nats)
        errors.append(e_out)
    if joint_params is not None:
        if n_modes != 1:
            raise DomainError("joint oracle is single-mode")
        phi_j = perturbation_operator(spec, n_mean, joint_cutoff)
        rho_j = thermal_fock(n_mean, joint_cutoff, tail=1e-5)

        def joint_entropy(st):
            return von_neumann_entropy(joint_output(joint_params, st), base=math.e)

        c_joint, e_joint = coefficient(rho_j, phi_j, joint_entropy)
        errors.append(e_joint)
    for c, err in zip([c for c in (c_in, c_out, c_joint) if c is not None], errors):
        if err > tol * abs(c):
            raise ConvergenceError(f"eps^2 extrapolation residual {err:.3g} exceeds {tol:g} of coefficient {c:.6g}")
    return ShiftCoefficients(c_in, c_out, c_joint, tuple(errors), tuple(eps))


def apply_channel_fock_operator(params: ChannelParams, op: FockDensityMatrix) -> FockDensityMatrix:
    """Linear channel action on an arbitrary (possibly traceless) single-mode operator."""
    t = channel_transfer(params.eta, params.n_noise, op.cutoff)
    out = np.tensordot(t, op.entries, axes=([2, 3], [0, 1]))
    return FockDensityMatrix(out, op.cutoff, op.n_modes)
