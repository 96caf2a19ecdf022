"""Chains and frequencies for z1^k z2^l - eps e^{it}."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from submodule_perturb.core_series import DivergentSeriesError
from submodule_perturb.frames import ParameterError
from submodule_perturb.general_monomial import (
    GMChainStart,
    gm_chain_of,
    gm_chain_starts,
    gm_frequency,
    gm_radius,
    phase_report,
    z1z2_frequency_closed,
    z1z2_generating_function,
)
from submodule_perturb.transport import frequency


def start_of(d):
    return (d, 0) if d >= 0 else (0, -d)


class TestGeneratingFunction:
    """Brute-force series against the closed generating function."""

    @pytest.mark.parametrize("d", range(11))
    @pytest.mark.parametrize("x", [0.01, 0.05, 0.1, 0.15, 0.2])
    def test_identity(self, d, x):
        brute = math.fsum(math.comb(d + 2 * q, q) * x**q for q in range(400))
        assert z1z2_generating_function(x, d) == pytest.approx(brute, rel=1e-12)

    def test_negative_label_symmetric(self):
        assert z1z2_generating_function(0.1, -3) == z1z2_generating_function(0.1, 3)


class TestChains:
    def test_diagonal_starts(self):
        starts = gm_chain_starts(1, 1, 3, 3)
        assert set(starts) == {GMChainStart(m, 0) for m in range(4)} | {GMChainStart(0, n) for n in range(1, 4)}

    def test_k2_l1_starts(self):
        assert all(s.m < 2 or s.n < 1 for s in gm_chain_starts(2, 1, 5, 5))

    def test_membership(self):
        start, q = gm_chain_of(1, 1, 5, 3)
        assert start == GMChainStart(2, 0) and q == 3 and start.label == 2

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 30), st.integers(0, 30))
    def test_partition(self, k, l, m, n):
        start, q = gm_chain_of(k, l, m, n)
        assert start.member(k, l, q) == (m, n)
        assert start.m < k or start.n < l

    def test_radius(self):
        assert gm_radius(1, 1) == pytest.approx(0.25)
        assert gm_radius(2, 1) == pytest.approx(4 / 27)


class TestFrequency:
    def test_values(self):
        assert gm_frequency(1, 1, 0.3, (0, 0)) == pytest.approx(0.28125, abs=1e-13)
        assert gm_frequency(1, 1, 0.3, (1, 0)) == pytest.approx(0.40625, abs=1e-13)
        assert gm_frequency(1, 1, 0.0, (0, 0)) == 0.0

    def test_closed_form(self):
        assert z1z2_frequency_closed(0.3, 0) == pytest.approx(0.28125)
        assert z1z2_frequency_closed(0.3, 1) - z1z2_frequency_closed(0.3, 0) == pytest.approx(0.125)

    @pytest.mark.parametrize("eps", [0.05, 0.2, 0.3])
    def test_series_vs_closed(self, eps):
        for d in range(-50, 51, 5):
            assert abs(gm_frequency(1, 1, eps, start_of(d)) - z1z2_frequency_closed(eps, d)) < 1e-8

    def test_symmetry(self):
        for d in range(1, 20):
            assert gm_frequency(1, 1, 0.25, (d, 0)) == pytest.approx(gm_frequency(1, 1, 0.25, (0, d)), rel=1e-13)

    def test_constant_step(self):
        f = [gm_frequency(1, 1, 0.3, (d, 0)) for d in range(0, 30)]
        steps = [b - a for a, b in zip(f, f[1:])]
        assert max(steps) - min(steps) < 1e-9

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_l0_reduces_to_single_power(self, k):
        for r in range(k):
            for n in (0, 4, 25):
                f = frequency(k, 0.6, r, n)
                assert gm_frequency(k, 0, 0.6, (r, n)) == pytest.approx(f, rel=1e-12, abs=1e-12)

    def test_radius_guard(self):
        with pytest.raises(DivergentSeriesError, match="convergence bound"):
            gm_frequency(1, 1, 0.499, (0, 0))
        with pytest.raises(DivergentSeriesError):
            z1z2_frequency_closed(0.5, 0)

    def test_not_a_start(self):
        with pytest.raises(ParameterError):
            gm_frequency(1, 1, 0.3, (2, 2))


class TestPhaseReport:
    def test_z1z2(self):
        rep = phase_report(1, 1, 0.3, 50)
        assert rep["per_step_differences"]["m_direction"] == pytest.approx(0.125, abs=1e-10)
        assert rep["reference_exponent"] == pytest.approx(0.25)
        assert rep["derived_exponent"] == pytest.approx(0.125)
        assert rep["match"] == "derived"
        assert rep["factor_two_relation"] is True

    def test_small_eps_expansion(self):
        rep = phase_report(1, 1, 0.01, 5)
        assert rep["reference_exponent"] == pytest.approx(2 * 0.01**2, rel=1e-3)

    def test_general_numeric_only(self):
        rep = phase_report(2, 1, 0.2, 20)
        assert rep["match"] == "not_applicable" and rep["reference_exponent"] is None
        assert rep["per_step_differences"]["m_direction"] > 0
