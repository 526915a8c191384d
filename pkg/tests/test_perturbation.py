import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gausscap.channel import ChannelParams
from gausscap.coherent import joint_spectrum
from gausscap.errors import DomainError, SingularityError, ValidationError
from gausscap.perturbation import (
    PerturbationSpec,
    ShiftReport,
    binomial_sum,
    c_zero,
    coherent_info_shift,
    cross_term,
    input_entropy_shift,
    joint_entropy_shift,
    moment_trace,
    normalized_sum,
    output_entropy_shift,
)


def splits(m, n):
    return [c for c in itertools.product(range(m + 1), repeat=n) if sum(c) == m]


@st.composite
def specs(draw, max_m=3, max_n=3):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(1, max_m))
    k = draw(st.sampled_from(splits(m, n)))
    l = draw(st.sampled_from(splits(m, n)))  # noqa: E741
    c = complex(draw(st.floats(-2, 2)), draw(st.floats(-2, 2)))
    return PerturbationSpec(k, l, c, draw(st.floats(0.0, 0.1)))


class TestSpec:
    @pytest.mark.parametrize("k,l", [((1,), (0,)), ((1, 0), (1,)), ((0,), (0,)), ((-1, 2), (0, 1)), ((), ())])
    def test_rejects_invalid(self, k, l):  # noqa: E741
        with pytest.raises(ValidationError):
            PerturbationSpec(k, l)

    def test_parse_roundtrip(self):
        s = PerturbationSpec.parse("2,0:1,1:1j", epsilon=0.01)
        assert s.k == (2, 0) and s.l == (1, 1) and s.c == 1j and s.epsilon == 0.01
        assert s.m == 2 and s.n_modes == 2 and not s.diagonal
        assert PerturbationSpec.parse(str(s)).k == s.k
        assert PerturbationSpec.parse("1:1").c == 1.0
        with pytest.raises(ValidationError):
            PerturbationSpec.parse("1:1:abc")
        with pytest.raises(ValidationError):
            PerturbationSpec.parse("1")


class TestCZero:
    def test_examples(self):
        assert c_zero(PerturbationSpec((1,), (1,), 1.0)) == 4.0
        assert c_zero(PerturbationSpec((2, 0), (1, 1), 1j)) == 1.0
        assert c_zero(PerturbationSpec((1,), (1,), 1j)) == 0.0


class TestMomentTrace:
    def test_fisher_information(self):
        # for k = l = (1), c = 1 the perturbation is -2 d rho_N / dN, and
        # Tr((d rho/dN)^2 / rho) is the Fisher information 1/(N(N+1)) of the geometric law
        for n in (0.3, 1.0, 7.0):
            assert moment_trace(PerturbationSpec((1,), (1,), 1.0), n) == pytest.approx(4.0 / (n * (n + 1.0)))

    def test_values(self):
        assert moment_trace(PerturbationSpec((1,), (1,), 1.0), 1.0) == pytest.approx(2.0)
        assert moment_trace(PerturbationSpec((2,), (2,), 1.0), 1.0) == pytest.approx(4.0)
        assert moment_trace(PerturbationSpec((1, 1), (1, 1), 1.0), 1.0) == pytest.approx(1.0)
        assert moment_trace(PerturbationSpec((2, 0), (1, 1), 1j), 1.0) == pytest.approx(1.0)

    def test_imaginary_part_irrelevant_on_diagonal(self):
        a = moment_trace(PerturbationSpec((2,), (2,), 0.7 + 3j), 2.0)
        b = moment_trace(PerturbationSpec((2,), (2,), 0.7), 2.0)
        assert a == pytest.approx(b)

    def test_singular_base(self):
        with pytest.raises(SingularityError):
            moment_trace(PerturbationSpec((1,), (1,)), 0.0)

    @given(specs(), st.floats(0.1, 100.0), st.permutations(range(3)))
    def test_permutation_symmetry(self, spec, n, perm):
        order = [p for p in perm if p < spec.n_modes]
        assert moment_trace(spec.permuted(order), n) == pytest.approx(moment_trace(spec, n), rel=1e-12)

    @given(specs(), st.floats(0.1, 100.0))
    def test_nonnegative(self, spec, n):
        assert moment_trace(spec, n) >= 0.0


class TestCrossTerm:
    def test_distinct_pairs_vanish(self):
        a = PerturbationSpec((1,), (1,))
        b = PerturbationSpec((2,), (2,))
        assert cross_term(a, b, 1.0) == 0.0

    def test_self_equals_moment(self):
        s = PerturbationSpec((2, 1), (0, 3), 0.3 - 0.4j)
        assert cross_term(s, s, 2.0) == pytest.approx(moment_trace(s, 2.0))

    def test_swapped_pair_overlaps(self):
        # (k, l) and (l, k) generate the same operator family
        a = PerturbationSpec((1, 0), (0, 1), 1.0)
        b = PerturbationSpec((0, 1), (1, 0), 1.0)
        assert cross_term(a, b, 1.0) == pytest.approx(1.0)

    def test_mode_mismatch(self):
        with pytest.raises(DomainError):
            cross_term(PerturbationSpec((1,), (1,)), PerturbationSpec((1, 0), (1, 0)), 1.0)

    @given(specs(), specs(), st.floats(0.1, 10.0))
    def test_symmetric(self, a, b, n):
        if a.n_modes != b.n_modes:
            return
        assert cross_term(a, b, n) == pytest.approx(cross_term(b, a, n), abs=1e-12)


class TestShifts:
    def test_input(self):
        s = PerturbationSpec((1,), (1,), 1.0, 0.01)
        assert input_entropy_shift(s, 1.0) == pytest.approx(-1e-4)
        assert input_entropy_shift(PerturbationSpec((1,), (1,), 1.0, 0.0), 1.0) == 0.0
        s2 = PerturbationSpec((1,), (1,), 1.0, 0.02)
        assert input_entropy_shift(s2, 1.0) == pytest.approx(4 * input_entropy_shift(s, 1.0))

    def test_output_identity_channel(self):
        s = PerturbationSpec((2, 1), (1, 2), 0.5, 0.01)
        assert output_entropy_shift(s, 3.0, ChannelParams(1.0)) == pytest.approx(input_entropy_shift(s, 3.0))

    def test_output_value(self):
        # c -> eta^m c and N -> eta N + N_n
        s = PerturbationSpec((1,), (1,), 1.0, 0.01)
        val = output_entropy_shift(s, 1.0, ChannelParams(0.5, 0.25))
        assert val == pytest.approx(-0.5e-4 * 0.25 * 4.0 / (0.75 * 1.75))

    def test_output_singular(self):
        with pytest.raises(SingularityError):
            output_entropy_shift(PerturbationSpec((1,), (1,), 1.0, 0.01), 1.0, ChannelParams(0.0, 0.0))

    def test_joint_pure_when_identity(self):
        s = PerturbationSpec((1,), (1,), 1.0, 0.01)
        assert joint_entropy_shift(s, 2.0, ChannelParams(1.0, 0.0)) == 0.0
        rep = coherent_info_shift(s, 2.0, ChannelParams(1.0, 0.0))
        assert rep.d_ic == rep.d_s_out == pytest.approx(input_entropy_shift(s, 2.0))
        assert rep.d_ic < 0

    def test_joint_value_pure_loss(self):
        # B = N_B (N_B + 1) cosh^4 r = 2/3, A = 0 for eta = 0.8, N = 1
        s = PerturbationSpec((1,), (1,), 1.0, 1.0)
        assert binomial_sum(1, 1.0, ChannelParams(0.8)) == pytest.approx(2.0 / 3.0)
        assert joint_entropy_shift(s, 1.0, ChannelParams(0.8)) == pytest.approx(-1.0 / 3.0)

    @given(specs(), st.floats(0.05, 50.0), st.floats(0.0, 1.0), st.floats(0.0, 2.0))
    def test_report_identity(self, spec, n, eta, nn):
        params = ChannelParams(eta, nn)
        if params.eta * n + nn == 0:
            return
        rep = coherent_info_shift(spec, n, params)
        assert rep.d_ic == rep.d_s_out - rep.d_s_joint
        assert rep.d_s_in <= 0 and rep.d_s_out <= 0 and rep.d_s_joint <= 0
        bits = rep.in_bits()
        assert bits.d_ic == pytest.approx(rep.d_ic / math.log(2))

    def test_bits_report_type(self):
        assert isinstance(ShiftReport(0.0, 0.0, 0.0, 0.0).in_bits(), ShiftReport)


class TestNormalizedSum:
    def test_m1_example(self):
        ns = normalized_sum(1, 1.0, ChannelParams(0.8, 0.0))
        assert ns.value == pytest.approx(1.0 / 3.0)
        assert ns.below_one and ns.condition

    @pytest.mark.parametrize("eta,nn,n", [(0.8, 0.0, 1.0), (0.6, 0.2, 3.0), (0.3, 1.0, 10.0), (0.9, 0.5, 2.0)])
    def test_m1_identity(self, eta, nn, n):
        params = ChannelParams(eta, nn)
        js = joint_spectrum(params, n)
        lhs = n * (n + 1.0) - binomial_sum(1, n, params)
        rhs = (js.n_b * js.n_a + (js.n_b + 1.0) * (js.n_a + 1.0)) * js.cosh2 * js.sinh2
        assert lhs == pytest.approx(rhs, rel=1e-10)

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_pure_loss_grid(self, m):
        for eta, n in itertools.product(np.linspace(0.05, 0.95, 10), (0.1, 1.0, 10.0, 1e3)):
            assert normalized_sum(m, n, ChannelParams(eta)).value < 1.0

    def test_domain(self):
        for eta in (0.0, 1.0):
            with pytest.raises(DomainError):
                normalized_sum(1, 1.0, ChannelParams(eta))
        with pytest.raises(DomainError):
            normalized_sum(0, 1.0, ChannelParams(0.5))

    @settings(max_examples=300)
    @given(st.floats(0.01, 0.99), st.floats(0.0, 3.0), st.integers(1, 4), st.floats(1e-3, 1e3))
    def test_below_one_under_condition(self, eta, nn, m, excess):
        params = ChannelParams(eta, nn)
        n = nn / (1.0 - eta) + excess
        ns = normalized_sum(m, n, params)
        assert ns.condition and ns.below_one


class TestSign:
    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_large_n_decreases(self, m):
        params = ChannelParams(0.8, 0.1)
        for n_modes in (1, 2, 3):
            for k, l in itertools.product(splits(m, n_modes), repeat=2):  # noqa: E741
                rep = coherent_info_shift(PerturbationSpec(k, l, 1.0, 0.01), 1e4, params)
                assert rep.d_ic < 0

    def test_pure_loss_small_n(self):
        rep = coherent_info_shift(PerturbationSpec((1,), (1,), 1.0, 0.01), 1.0, ChannelParams(0.8))
        assert rep.d_ic == pytest.approx(-0.5e-4 * (0.64 * 4.0 / (0.8 * 1.8) - 2.0 / 3.0))
        assert rep.d_ic < 0
