import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import _oracles
from gausscap.channel import ChannelParams, apply_to_cov, joint_output_cov
from gausscap.coherent import (
    LARGE_ENERGY,
    argmax_over_x,
    capacity_conjecture,
    dIc_dx,
    f_terms,
    gaussian_coherent_info,
    gaussian_symplectic,
    joint_spectrum,
    large_E_asymptotics,
    thermal_coherent_info,
    thermal_optimal_threshold,
)
from gausscap.errors import DomainError, SingularityError
from gausscap.gaussian import (
    CovarianceMatrix,
    GaussianInputParams,
    bosonic_entropy,
    gaussian_entropy,
    gaussian_input_purification,
    symplectic_eigenvalues,
)

GRID = list(itertools.product((0.1, 0.3, 0.5, 0.7, 0.9), (0.0, 0.1, 0.5, 1.0), (0.5, 1.0, 5.0, 50.0)))


class TestJointSpectrum:
    @pytest.mark.parametrize("eta,nn,n", GRID)
    def test_matches_williamson(self, eta, nn, n):
        params = ChannelParams(eta, nn)
        js = joint_spectrum(params, n)
        will = sorted(symplectic_eigenvalues(joint_output_cov(params, n)))
        assert sorted([js.n_a + 0.5, js.n_b + 0.5]) == pytest.approx(will, abs=1e-9)
        assert abs(js.occupation_residual(n)) <= 1e-9

    def test_noise_in_discriminant_is_inconsistent(self):
        # with N_n in place of N inside D the identity channel already fails
        n, nn = 2.0, 0.0
        n_out = n
        radicand = (n_out + nn + 1.0) ** 2 - 4.0 * n * (n + 1.0)
        assert radicand < 0
        assert joint_spectrum(ChannelParams(1.0, 0.0), n).d_big == pytest.approx(1.0)

    def test_identity_channel_is_pure(self):
        js = joint_spectrum(ChannelParams(1.0, 0.0), 3.0)
        assert js.n_a == pytest.approx(0.0, abs=1e-12)
        assert js.n_b == pytest.approx(0.0, abs=1e-12)

    @settings(max_examples=200)
    @given(st.floats(0.0, 1.0), st.floats(0.0, 10.0), st.floats(1e-3, 1e3))
    def test_occupations_nonnegative(self, eta, nn, n):
        js = joint_spectrum(ChannelParams(eta, nn), n)
        assert js.n_a >= 0 and js.n_b >= 0
        assert abs(js.occupation_residual(n)) <= 1e-9 * max(1.0, n)


class TestThermalCoherentInfo:
    def test_against_covariance_entropies(self):
        params = ChannelParams(0.7, 0.2)
        n = 3.0
        joint = joint_output_cov(params, n)
        out = gaussian_entropy(CovarianceMatrix(joint.block(0, 0)))
        rep = thermal_coherent_info(params, n)
        assert rep.term_out == pytest.approx(bosonic_entropy(0.7 * 3 + 0.2))
        assert rep.value == pytest.approx(out - gaussian_entropy(joint), abs=1e-10)

    def test_identity_channel(self):
        assert thermal_coherent_info(ChannelParams(1.0), 2.0).value == pytest.approx(bosonic_entropy(2.0))

    def test_pure_loss_known_value(self):
        assert thermal_coherent_info(ChannelParams(0.8), 1.0).value == pytest.approx(1.00391000173, abs=1e-10)


class TestCapacity:
    def test_two_thirds(self):
        assert capacity_conjecture(ChannelParams(2 / 3, 0.0)) == pytest.approx(1.0, abs=1e-12)

    def test_example_values(self):
        assert capacity_conjecture(ChannelParams(0.9, 0.1)) == pytest.approx(1.1699250014, abs=1e-9)
        assert capacity_conjecture(ChannelParams(0.7, 0.3)) == 0.0
        assert capacity_conjecture(ChannelParams(0.0, 0.3)) == 0.0

    def test_eta_one_limits(self):
        assert math.isinf(capacity_conjecture(ChannelParams(1.0, 0.0)))
        assert capacity_conjecture(ChannelParams(1.0, 0.1)) == pytest.approx(-math.log2(math.e * 0.1))
        assert capacity_conjecture(ChannelParams(1.0, 1.0)) == 0.0
        # continuity of the eta -> 1 limit
        near = capacity_conjecture(ChannelParams(1 - 1e-7, 0.1))
        assert near == pytest.approx(-math.log2(math.e * 0.1), abs=1e-5)

    @pytest.mark.parametrize("eta,nn", [(0.7, 0.1), (0.9, 0.1), (0.8, 0.3)])
    def test_thermal_limit(self, eta, nn):
        # Q = max{0, lim I_c}; (0.8, 0.3) has a negative limit
        params = ChannelParams(eta, nn)
        limit = max(0.0, thermal_coherent_info(params, 1e6).value)
        assert limit == pytest.approx(capacity_conjecture(params), abs=1e-3)

    @given(st.floats(0.01, 0.99), st.floats(0.0, 2.0), st.floats(0.01, 0.99), st.floats(0.0, 2.0))
    def test_monotone_in_parameters(self, e1, n1, e2, n2):
        lo, hi = sorted((e1, e2))
        assert capacity_conjecture(ChannelParams(lo, n1)) <= capacity_conjecture(ChannelParams(hi, n1)) + 1e-12
        a, b = sorted((n1, n2))
        assert capacity_conjecture(ChannelParams(e1, b)) <= capacity_conjecture(ChannelParams(e1, a)) + 1e-12


class TestGaussianInputs:
    def test_hand_instance(self):
        params = ChannelParams(0.5, 0.0)
        inp = GaussianInputParams(1.5, 1.0)
        assert gaussian_symplectic(params, inp) == pytest.approx((1.0, 1.0, 0.5), abs=1e-12)
        assert gaussian_coherent_info(params, inp).value == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("eta,nn,n", GRID)
    def test_x1_equals_thermal(self, eta, nn, n):
        params = ChannelParams(eta, nn)
        a = gaussian_coherent_info(params, GaussianInputParams(n + 0.5, 1.0)).value
        assert a == pytest.approx(thermal_coherent_info(params, n).value, abs=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.02, 0.98), st.floats(0.0, 2.0), st.floats(0.6, 500.0), st.floats(0.05, 1.0),
           st.floats(0.0, 3.0))
    def test_matches_williamson(self, eta, nn, energy, x, angle):
        if energy * math.sqrt(x) < 0.51:
            return
        params = ChannelParams(eta, nn)
        inp = GaussianInputParams(energy, x, angle)
        joint = apply_to_cov(params, gaussian_input_purification(inp), [0])
        d1, d2 = symplectic_eigenvalues(joint)
        d0 = symplectic_eigenvalues(apply_to_cov(params, gaussian_input_purification(inp), [0, 1]).entries[:2, :2])
        closed = gaussian_symplectic(params, inp)
        scale = max(1.0, energy)
        assert closed[0] == pytest.approx(float(np.sqrt(np.linalg.det(joint.block(0, 0)))), rel=1e-9)
        assert closed[1] == pytest.approx(d1, abs=1e-8 * scale)
        assert closed[2] == pytest.approx(d2, abs=1e-8 * scale)
        assert d0.shape == (1,)

    def test_matches_mpmath_oracle(self):
        for eta, nn, e, x in [(0.8, 0.1, 100.0, 0.3), (0.4, 0.0, 3.0, 0.7), (0.95, 1.0, 20.0, 0.05)]:
            ic = gaussian_coherent_info(ChannelParams(eta, nn), GaussianInputParams(e, x)).value
            assert ic == pytest.approx(float(_oracles.coherent_info(eta, nn, e, x)), abs=1e-10)


class TestDerivative:
    @pytest.mark.parametrize("seed", range(5))
    def test_finite_difference(self, seed):
        rng = np.random.default_rng(seed)
        eta, nn = rng.uniform(0.05, 0.95), rng.uniform(0.0, 1.0)
        e, x = 10 ** rng.uniform(0.5, 3), rng.uniform(0.1, 0.99)
        exact = dIc_dx(ChannelParams(eta, nn), GaussianInputParams(e, x))
        assert exact == pytest.approx(_oracles.dic_dx_fd(eta, nn, e, x), rel=1e-6)

    def test_singular_pure_joint(self):
        with pytest.raises(SingularityError):
            f_terms(ChannelParams(1.0, 0.0), GaussianInputParams(3.0, 0.5))

    def test_positive_at_thermal_point_for_capacity_regime(self):
        # the x = 1 endpoint is approached from below with positive slope here
        params = ChannelParams(0.8, 0.1)
        assert dIc_dx(params, GaussianInputParams(100.0, 1.0)) > 0
        assert argmax_over_x(params, 100.0, np.linspace(0.1, 1.0, 10)) == 1.0

    def test_zero_capacity_regime_prefers_squeezing(self):
        params = ChannelParams(0.5, 0.2)
        assert capacity_conjecture(params) == 0.0
        assert dIc_dx(params, GaussianInputParams(200.0, 1.0)) < 0
        assert argmax_over_x(params, 200.0, np.linspace(0.1, 1.0, 10)) == pytest.approx(0.1)

    def test_argmax_validation_and_ties(self):
        with pytest.raises(DomainError):
            argmax_over_x(ChannelParams(0.8), 10.0, [])
        assert argmax_over_x(ChannelParams(0.8), 10.0, [1.0, 1.0]) == 1.0

    def test_threshold(self):
        params = ChannelParams(0.8, 0.1)
        grid = np.linspace(0.1, 1.0, 10)
        thr = thermal_optimal_threshold(params, grid, [LARGE_ENERGY, 100.0, 1000.0])
        assert thr is not None and thr <= 100.0


class TestAsymptotics:
    def test_difference_term(self):
        params = ChannelParams(0.8, 0.1)
        inp = GaussianInputParams(1e4, 1.0)
        f0, f1, _ = f_terms(params, inp)
        asym = large_E_asymptotics(params, inp)
        assert asym.f0_minus_f1_asym == pytest.approx(f0 - f1, rel=1e-2)

    @pytest.mark.parametrize("x", [1.0, 0.5])
    def test_leading_order_converges(self, x):
        params = ChannelParams(0.8, 0.1)
        errs = []
        for e in (1e3, 1e4, 1e5):
            inp = GaussianInputParams(e, x)
            f0, f1, f2 = f_terms(params, inp)
            asym = large_E_asymptotics(params, inp)
            errs.append((abs(f0 - f1 - asym.f0_minus_f1_asym) / abs(f0 - f1),
                         abs(f2 - asym.f2_limit) / f2))
        # relative corrections shrink like 1/E
        for (a0, b0), (a1, b1) in zip(errs, errs[1:]):
            assert a1 < 0.2 * a0 and b1 < 0.2 * b0

    def test_d2_limit(self):
        params = ChannelParams(0.8, 0.1)
        _, _, d2 = gaussian_symplectic(params, GaussianInputParams(1e6, 1.0))
        assert d2 == pytest.approx(large_E_asymptotics(params, GaussianInputParams(1e6, 1.0)).d2_limit, rel=1e-5)

    def test_domain(self):
        with pytest.raises(DomainError):
            large_E_asymptotics(ChannelParams(1.0, 0.1), GaussianInputParams(10.0))
        assert large_E_asymptotics(ChannelParams(0.8, 0.0), GaussianInputParams(10.0)).f2_limit == 0.0
