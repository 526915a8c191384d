"""Second-order entropy shifts from a first-order non-Gaussian perturbation.

The input is the product thermal state ``rho^{(x)n}`` whose characteristic
function is multiplied by ``1 + eps (c prod mu_i^k_i mu_i*^l_i + c.c.)`` with
``sum k = sum l = m``. The added operator ``phi`` conserves total photon
number, so it commutes with ``rho^{(x)n}`` and the entropy changes at second
order by ``-(eps^2 / 2) Tr(phi^2 / rho)`` (nats). A linear term survives only
for ``m = 1, k = l``, where ``phi`` shifts the mean energy; it is not part of
the quantities below.

Writing ``phi = c T(k, l) + c* T(l, k)`` with ``T(a, b)`` the operator whose
characteristic function is ``chi_N mu^a mu*^b``, one has
``Tr(T(a, b) T(a', b') / rho) = delta_{a, b'} delta_{b, a'} prod a_i! b_i! / [N (N + 1)]^m``.
Hence ``Tr(phi^2 / rho) = 2 |c|^2 X`` for ``k != l`` and ``(c + c*)^2 X = 4 c_R^2 X``
for ``k = l``, with ``X = prod k_i! l_i! / [N (N + 1)]^m``. The channel maps
``c -> c eta^m`` and ``N -> N' = eta N + N_n``.

All shifts are in nats; divide by ``ln 2`` for bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .channel import ChannelParams, output_mean_photon
from .coherent import joint_spectrum
from .errors import DomainError, SingularityError, ValidationError


@dataclass(frozen=True)
class PerturbationSpec:
    """Exponent vectors ``k``, ``l`` (one entry per mode), amplitude ``c``, strength ``epsilon``."""

    k: tuple
    l: tuple  # noqa: E741
    c: complex = 1.0
    epsilon: float = 0.0

    def __post_init__(self):
        k = tuple(int(v) for v in self.k)
        l = tuple(int(v) for v in self.l)  # noqa: E741
        if len(k) != len(l) or not k:
            raise ValidationError(f"k and l must be non-empty and of equal length, got {k}, {l}")
        if any(v < 0 for v in k + l):
            raise ValidationError("exponents must be non-negative")
        if sum(k) != sum(l):
            raise ValidationError(f"sum(k) = {sum(k)} differs from sum(l) = {sum(l)}")
        if sum(k) < 1:
            raise ValidationError("perturbation order m = sum(k) must be >= 1")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "c", complex(self.c))
        object.__setattr__(self, "epsilon", float(self.epsilon))

    @property
    def n_modes(self) -> int:
        return len(self.k)

    @property
    def m(self) -> int:
        return sum(self.k)

    @property
    def diagonal(self) -> bool:
        return self.k == self.l

    def factorial_product(self) -> int:
        return math.prod(math.factorial(a) * math.factorial(b) for a, b in zip(self.k, self.l))

    def permuted(self, order: Sequence[int]) -> "PerturbationSpec":
        return PerturbationSpec(tuple(self.k[i] for i in order), tuple(self.l[i] for i in order), self.c, self.epsilon)

    @classmethod
    def parse(cls, text: str, epsilon: float = 0.0) -> "PerturbationSpec":
        """Parse ``"k1,k2:l1,l2:c"`` (``c`` optional, any Python complex literal)."""
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise ValidationError(f"cannot parse perturbation spec {text!r}; expected k:l[:c]")
        try:
            k = tuple(int(v) for v in parts[0].split(","))
            l = tuple(int(v) for v in parts[1].split(","))  # noqa: E741
            c = complex(parts[2].replace(" ", "")) if len(parts) == 3 else 1.0
        except ValueError as exc:
            raise ValidationError(f"cannot parse perturbation spec {text!r}: {exc}") from None
        return cls(k, l, c, epsilon)

    def __str__(self):
        c = self.c.real if self.c.imag == 0 else self.c
        return f"{','.join(map(str, self.k))}:{','.join(map(str, self.l))}:{c}"


@dataclass(frozen=True)
class ShiftReport:
    """Second-order entropy shifts in nats."""

    d_s_in: float
    d_s_out: float
    d_s_joint: float
    d_ic: float

    def in_bits(self) -> "ShiftReport":
        f = 1.0 / math.log(2.0)
        return ShiftReport(self.d_s_in * f, self.d_s_out * f, self.d_s_joint * f, self.d_ic * f)


@dataclass(frozen=True)
class NormalizedSum:
    value: float
    below_one: bool
    condition: bool  # N > N_n / (1 - eta)


def c_zero(spec: PerturbationSpec) -> float:
    """``|c|^2`` for ``k != l`` and ``4 Re(c)^2`` for ``k = l``."""
    if spec.diagonal:
        return 4.0 * spec.c.real ** 2
    return abs(spec.c) ** 2


def _check_n(n_mean: float, what: str = "N"):
    if not n_mean > 0:
        raise SingularityError(f"{what} = {n_mean}: the thermal reference state must have full support")


def _pair_weight(a, b, a2, b2) -> bool:
    return tuple(a) == tuple(b2) and tuple(b) == tuple(a2)


def cross_term(spec_a: PerturbationSpec, spec_b: PerturbationSpec, n_mean: float) -> float:
    """``Tr(phi_a phi_b / rho^{(x)n})`` (at unit strength).

    Vanishes unless the two specs carry the same exponent pair up to the
    swap ``(k, l) <-> (l, k)``; a swapped pair describes the same family of
    operators with conjugated amplitude and does overlap.
    """
    if spec_a.n_modes != spec_b.n_modes:
        raise DomainError("perturbations act on different numbers of modes")
    _check_n(n_mean)
    ca, cb = spec_a.c, spec_b.c
    terms = (
        (ca * cb, spec_a.k, spec_a.l, spec_b.k, spec_b.l),
        (ca * cb.conjugate(), spec_a.k, spec_a.l, spec_b.l, spec_b.k),
        (ca.conjugate() * cb, spec_a.l, spec_a.k, spec_b.k, spec_b.l),
        (ca.conjugate() * cb.conjugate(), spec_a.l, spec_a.k, spec_b.l, spec_b.k),
    )
    coeff = sum(w for w, a, b, a2, b2 in terms if _pair_weight(a, b, a2, b2))
    if coeff == 0:
        return 0.0
    return float((coeff * spec_a.factorial_product()).real / (n_mean * (n_mean + 1.0)) ** spec_a.m)


def moment_trace(spec: PerturbationSpec, n_mean: float) -> float:
    """``Tr(phi^2 / rho^{(x)n})``: ``2|c|^2 X`` if ``k != l``, ``4 c_R^2 X`` if ``k = l``."""
    return cross_term(spec, spec, n_mean)


def input_entropy_shift(spec: PerturbationSpec, n_mean: float) -> float:
    return -0.5 * spec.epsilon ** 2 * moment_trace(spec, n_mean)


def output_entropy_shift(spec: PerturbationSpec, n_mean: float, params: ChannelParams) -> float:
    """Second-order shift of ``S(E^{(x)n}(rho_eps))``; the channel rescales ``c`` by ``eta^m``."""
    n_out = output_mean_photon(params, n_mean)
    _check_n(n_out, "N'")
    return -0.5 * spec.epsilon ** 2 * params.eta ** (2 * spec.m) * moment_trace(spec, n_out)


def _ab(n_mean: float, params: ChannelParams) -> tuple[float, float]:
    js = joint_spectrum(params, n_mean)
    a = js.n_a * (js.n_a + 1.0) * math.sinh(js.r) ** 4
    b = js.n_b * (js.n_b + 1.0) * math.cosh(js.r) ** 4
    return a, b


def binomial_sum(m: int, n_mean: float, params: ChannelParams) -> float:
    """``sum_j C(m, j)^2 B^j A^(m-j)`` with ``B = N_B(N_B+1) cosh^4 r``, ``A = N_A(N_A+1) sinh^4 r``."""
    a, b = _ab(n_mean, params)
    return float(sum(math.comb(m, j) ** 2 * b ** j * a ** (m - j) for j in range(m + 1)))


def normalized_sum(m: int, n_mean: float, params: ChannelParams) -> NormalizedSum:
    """``binomial_sum / [N (N + 1)]^m`` together with the ``< 1`` predicate and its premise."""
    if not 0.0 < params.eta < 1.0:
        raise DomainError(f"normalized sum needs 0 < eta < 1, got {params.eta}")
    if m < 1:
        raise DomainError("m must be >= 1")
    _check_n(n_mean)
    val = binomial_sum(m, n_mean, params) / (n_mean * (n_mean + 1.0)) ** m
    cond = n_mean > params.n_noise / (1.0 - params.eta)
    return NormalizedSum(val, val < 1.0, cond)


def joint_entropy_shift(spec: PerturbationSpec, n_mean: float, params: ChannelParams) -> float:
    """Second-order shift of the joint (output, reference) entropy, block-diagonal approximation.

    ``-(eps^2 / 2) Tr(phi^2 / rho) * binomial_sum / [N (N + 1)]^m``. Only the
    blocks of fixed photon numbers in the two normal modes are kept; for the
    pure-loss channel this is exact (the joint entropy equals that of the
    complementary loss channel), with additive noise the Fock oracle finds a
    larger magnitude. Vanishes when the joint state is pure (``A = B = 0``).
    """
    _check_n(n_mean)
    ratio = binomial_sum(spec.m, n_mean, params) / (n_mean * (n_mean + 1.0)) ** spec.m
    return -0.5 * spec.epsilon ** 2 * moment_trace(spec, n_mean) * ratio


def coherent_info_shift(spec: PerturbationSpec, n_mean: float, params: ChannelParams) -> ShiftReport:
    d_in = input_entropy_shift(spec, n_mean)
    d_out = output_entropy_shift(spec, n_mean, params)
    d_joint = joint_entropy_shift(spec, n_mean, params)
    return ShiftReport(d_in, d_out, d_joint, d_out - d_joint)
