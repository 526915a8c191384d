"""Closed-form coherent information of the lossy additive-noise channel.

Thermal inputs are handled through the normal-mode decomposition of the
two-mode (output, reference) state, Gaussian inputs through the explicit
symplectic eigenvalues ``d0`` (output) and ``d1, d2`` (output + reference).

Note on the normal-mode discriminant: the joint output has covariance blocks
``(N' + 1/2) I``, ``(N + 1/2) I`` and ``sqrt(eta N (N + 1)) Z``, whose
symplectic eigenvalues are ``(D +- (N' - N)) / 2`` with

    D = sqrt((N' + N + 1)**2 - 4 eta N (N + 1)),
    tanh 2r = 2 sqrt(eta N (N + 1)) / (N' + N + 1).

Writing the noise photon number ``N_n`` in place of ``N`` in the first term
gives a negative radicand already for the identity channel, so the form above
is the one used here; ``tests/test_coherent.py`` checks it against the
Williamson spectrum on a dense grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import ChannelParams, output_mean_photon
from .errors import DomainError, SingularityError
from .gaussian import GaussianInputParams, _as_thermal, bosonic_entropy

LN2 = math.log(2.0)

#: energy above which the thermal input is expected to win the x-scan
LARGE_ENERGY = 50.0


@dataclass(frozen=True)
class JointSpectrum:
    d_big: float
    n_a: float
    n_b: float
    r: float

    @property
    def cosh2(self) -> float:
        return math.cosh(self.r) ** 2

    @property
    def sinh2(self) -> float:
        return math.sinh(self.r) ** 2

    def occupation_residual(self, n_mean: float) -> float:
        """``N - (N_B cosh^2 r + (N_A + 1) sinh^2 r)``; zero for a consistent spectrum."""
        return n_mean - (self.n_b * self.cosh2 + (self.n_a + 1.0) * self.sinh2)


@dataclass(frozen=True)
class CoherentInfoReport:
    """Coherent information (bits) and the three entropies it is made of."""

    value: float
    term_out: float
    term_a: float
    term_b: float


def _clamp0(x: float, tol: float = 1e-12, scale: float = 1.0) -> float:
    """Zero out round-off negatives of size up to ``tol * max(1, scale)``."""
    if -tol * max(1.0, scale) < x < 0.0:
        return 0.0
    return x


def joint_spectrum(params: ChannelParams, spec) -> JointSpectrum:
    n = _as_thermal(spec).n_mean
    n_out = output_mean_photon(params, n)
    total = n_out + n + 1.0
    cross2 = params.eta * n * (n + 1.0)
    d_big = math.sqrt(max(total * total - 4.0 * cross2, 0.0))
    # one occupation vanishes exactly for pure loss; the subtraction leaves O(eps * D)
    n_a = _clamp0(0.5 * (d_big + (n_out - n) - 1.0), scale=total)
    n_b = _clamp0(0.5 * (d_big - (n_out - n) - 1.0), scale=total)
    r = 0.5 * math.acosh(max(total / d_big, 1.0))
    return JointSpectrum(d_big=d_big, n_a=n_a, n_b=n_b, r=r)


def thermal_coherent_info(params: ChannelParams, spec) -> CoherentInfoReport:
    n = _as_thermal(spec).n_mean
    js = joint_spectrum(params, n)
    t_out = bosonic_entropy(output_mean_photon(params, n))
    t_a = bosonic_entropy(js.n_a)
    t_b = bosonic_entropy(js.n_b)
    return CoherentInfoReport(t_out - t_a - t_b, t_out, t_a, t_b)


def capacity_conjecture(params: ChannelParams) -> float:
    """Conjectured quantum capacity ``max(0, log2 eta - log2(1-eta) - g(N_n/(1-eta)))``.

    At ``eta = 1`` the expression is read as its limit: ``inf`` for the
    noiseless identity channel and ``max(0, -log2(e N_n))`` for the pure
    additive-noise channel.
    """
    eta, nn = params.eta, params.n_noise
    if eta == 0.0:
        return 0.0
    if eta == 1.0:
        if nn == 0.0:
            return math.inf
        return max(0.0, -math.log2(math.e * nn))
    val = math.log2(eta) - math.log2(1.0 - eta) - bosonic_entropy(nn / (1.0 - eta))
    return max(0.0, val)


def _gaussian_terms(eta, nn, energy, x):
    """``(d0, d1, d2, X, Y)`` for raw parameters; no domain checks, so usable off-grid."""
    np_ = nn + (1.0 - eta) / 2.0
    d0sq = np_ * np_ + 2.0 * eta * energy * np_ + eta * eta * energy * energy * x
    big_x = np_ * np_ + 2.0 * eta * energy * np_ + eta / 2.0 + (1.0 - eta) ** 2 * energy * energy * x
    big_y = 0.5 * eta * energy * np_ + eta * eta / 16.0 + energy * energy * np_ * np_ * x
    disc = big_x * big_x - 4.0 * big_y
    if disc < -1e-9 * big_x * big_x:
        raise ArithmeticError(f"negative discriminant {disc} in joint symplectic spectrum")
    root = math.sqrt(max(disc, 0.0))
    d1sq = 0.5 * (big_x + root)
    d2sq = 2.0 * big_y / (big_x + root) if big_y > 0 else 0.0
    return math.sqrt(d0sq), math.sqrt(d1sq), math.sqrt(d2sq), big_x, big_y


def gaussian_symplectic(params: ChannelParams, inp: GaussianInputParams) -> tuple[float, float, float]:
    """Symplectic eigenvalues ``(d0, d1, d2)`` of output and joint output."""
    d0, d1, d2, _, _ = _gaussian_terms(params.eta, params.n_noise, inp.energy, inp.x)
    return d0, d1, d2


def _g_half(d: float) -> float:
    return bosonic_entropy(_clamp0(d - 0.5, 1e-10))


def gaussian_coherent_info(params: ChannelParams, inp: GaussianInputParams) -> CoherentInfoReport:
    d0, d1, d2 = gaussian_symplectic(params, inp)
    t0, t1, t2 = _g_half(d0), _g_half(d1), _g_half(d2)
    return CoherentInfoReport(t0 - t1 - t2, t0, t1, t2)


def f_terms(params: ChannelParams, inp: GaussianInputParams, tol: float = 1e-9) -> tuple[float, float, float]:
    """Exact ``(f(d0), f(d1), f(d2))`` with ``f(z) = log2((z+1/2)/(z-1/2)) / (2z) * d(z^2)/dx``."""
    eta, e, x = params.eta, inp.energy, inp.x
    np_ = params.n_noise_eff
    d0, d1, d2, big_x, big_y = _gaussian_terms(eta, params.n_noise, e, x)
    for name, d in (("d0", d0), ("d1", d1), ("d2", d2)):
        if d <= 0.5 + tol:
            raise SingularityError(f"{name} = {d} is at the pure-state value 1/2; f diverges")
    dx_x = (1.0 - eta) ** 2 * e * e
    dy_x = e * e * np_ * np_
    root = d1 * d1 - d2 * d2
    dd0 = eta * eta * e * e
    dd1 = 0.5 * (dx_x + (big_x * dx_x - 2.0 * dy_x) / root)
    dd2 = (dy_x - dx_x * d2 * d2) / root

    def f(z, dz2):
        return math.log2((z + 0.5) / (z - 0.5)) / (2.0 * z) * dz2

    return f(d0, dd0), f(d1, dd1), f(d2, dd2)


def dIc_dx(params: ChannelParams, inp: GaussianInputParams) -> float:
    """Derivative of the Gaussian-input coherent information in ``x`` at fixed energy."""
    f0, f1, f2 = f_terms(params, inp)
    return f0 - f1 - f2


@dataclass(frozen=True)
class Asymptotics:
    f0_minus_f1_asym: float
    f2_limit: float
    d2_limit: float


def large_E_asymptotics(params: ChannelParams, inp: GaussianInputParams) -> Asymptotics:
    """Leading large-energy behaviour of the derivative terms.

    ``f(d0) - f(d1) ~ -(N_n'/(x^2 E ln 2)) [1/eta - eta/(1-eta)^2]`` and
    ``f(d2) ~ eta [N_n'^2 - (1-eta)^2/4] / (x^2 (1-eta)^3 E) * log2((N_n' + (1-eta)/2)/(N_n' - (1-eta)/2))``,
    both O(1/E); ``d2 -> N_n'/(1-eta)``.
    """
    eta = params.eta
    if not 0.0 < eta < 1.0:
        raise DomainError(f"asymptotics need 0 < eta < 1, got {eta}")
    e, x = inp.energy, inp.x
    np_ = params.n_noise_eff
    half_loss = (1.0 - eta) / 2.0
    f01 = -(np_ / (x * x * e * LN2)) * (1.0 / eta - eta / (1.0 - eta) ** 2)
    if params.n_noise == 0.0:
        f2 = 0.0
    else:
        bracket = np_ * np_ - half_loss * half_loss
        f2 = eta * bracket / (x * x * (1.0 - eta) ** 3 * e) * math.log2((np_ + half_loss) / (np_ - half_loss))
    return Asymptotics(f0_minus_f1_asym=f01, f2_limit=f2, d2_limit=np_ / (1.0 - eta))


def argmax_over_x(params: ChannelParams, energy: float, grid: Sequence[float]) -> float:
    """Grid point maximising the Gaussian-input coherent information at fixed energy.

    Ties resolve to the first maximiser in grid order.
    """
    grid = list(grid)
    if not grid:
        raise DomainError("empty x grid")
    vals = [gaussian_coherent_info(params, GaussianInputParams(energy, x)).value for x in grid]
    return float(grid[int(np.argmax(vals))])


def thermal_optimal_threshold(params: ChannelParams, grid: Sequence[float], energies: Sequence[float]):
    """Smallest energy in ``energies`` from which every larger one has ``argmax == 1``.

    Returns ``None`` when the largest energy still prefers a squeezed input.
    """
    threshold = None
    for e in sorted(energies, reverse=True):
        if argmax_over_x(params, e, grid) != 1.0:
            break
        threshold = e
    return threshold
