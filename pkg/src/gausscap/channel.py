"""Lossy bosonic channel with additive classical Gaussian noise.

The channel mixes the input with vacuum on a beamsplitter of transmissivity
``eta`` and then applies a random displacement drawn from a circular Gaussian
with ``n_noise`` photons of variance. On characteristic functions it acts as

    chi'(mu) = chi(sqrt(eta) mu) * exp(-(n_noise + (1 - eta)/2) |mu|^2)

and on covariance matrices as ``V -> eta V + (n_noise + (1 - eta)/2) I``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DomainError
from .gaussian import CovarianceMatrix, ThermalSpec, _as_thermal, tmsv_cov


@dataclass(frozen=True)
class ChannelParams:
    """Transmissivity ``eta`` in [0, 1] and additive noise photons ``n_noise`` >= 0."""

    eta: float
    n_noise: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError(f"transmissivity must lie in [0, 1], got {self.eta}")
        if not self.n_noise >= 0.0:
            raise DomainError(f"noise photons must be >= 0, got {self.n_noise}")

    @property
    def theta(self) -> float:
        """Beamsplitter angle, ``eta = cos(theta)**2``."""
        return math.acos(math.sqrt(self.eta))

    @property
    def n_noise_eff(self) -> float:
        """Effective added noise ``n_noise + (1 - eta)/2`` (vacuum units of 1/2)."""
        return self.n_noise + (1.0 - self.eta) / 2.0


@dataclass(frozen=True)
class CharTransform:
    """``chi'(mu) = chi(scale * mu) * exp(-damping * |mu|^2)``."""

    scale: float
    damping: float

    def __call__(self, chi, mu):
        mu = np.asarray(mu)
        return chi(self.scale * mu) * np.exp(-self.damping * np.abs(mu) ** 2)


def char_transform(params: ChannelParams) -> CharTransform:
    return CharTransform(scale=math.sqrt(params.eta), damping=params.n_noise_eff)


def apply_to_cov(params: ChannelParams, cov: CovarianceMatrix, channel_modes: Iterable[int]) -> CovarianceMatrix:
    """Send the modes in ``channel_modes`` through independent copies of the channel."""
    n = cov.n_modes
    modes = sorted(set(int(i) for i in channel_modes))
    for i in modes:
        if not 0 <= i < n:
            raise DomainError(f"mode index {i} out of range for {n} modes")
    scale = np.ones(2 * n)
    noise = np.zeros(2 * n)
    for i in modes:
        scale[2 * i:2 * i + 2] = math.sqrt(params.eta)
        noise[2 * i:2 * i + 2] = params.n_noise_eff
    out = scale[:, None] * cov.entries * scale[None, :] + np.diag(noise)
    return CovarianceMatrix(out)


def output_mean_photon(params: ChannelParams, n_in: float) -> float:
    if n_in < 0:
        raise DomainError(f"input mean photon number must be >= 0, got {n_in}")
    return params.eta * n_in + params.n_noise


def joint_output_cov(params: ChannelParams, spec) -> CovarianceMatrix:
    """Covariance of (channel output Q, untouched reference R) for a purified thermal input."""
    return apply_to_cov(params, tmsv_cov(_as_thermal(spec)), [0])


def compose(first: ChannelParams, second: ChannelParams) -> ChannelParams:
    """Channel equal to ``first`` followed by ``second``."""
    return ChannelParams(first.eta * second.eta, second.eta * first.n_noise + second.n_noise)


__all__ = [
    "ChannelParams",
    "CharTransform",
    "ThermalSpec",
    "apply_to_cov",
    "char_transform",
    "compose",
    "joint_output_cov",
    "output_mean_photon",
]
