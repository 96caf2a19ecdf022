"""Transport frequencies, differences and flatness of the parallel frame."""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from submodule_perturb.frames import ParameterError, chain_index_set
from submodule_perturb.transport import (
    flatness_residual,
    frequency,
    frequency_asymptote,
    frequency_differences,
    frequency_gap,
    frequency_series,
    frequency_table,
    mod1_distance,
    monodromy_diagonal,
    transport_apply,
)


def brute_mean(k, eps, r, n, terms=4000):
    w = [math.comb(r + k * q + n, n) * eps ** (2 * q) for q in range(terms)]
    return sum(q * x for q, x in enumerate(w)) / sum(w)


class TestFrequency:
    def test_k1_value(self):
        assert frequency(1, 0.5, 0, 0) == pytest.approx(1 / 3, rel=1e-14)

    def test_large_n(self):
        assert frequency(2, 0.5, 1, 40) == pytest.approx(20.0, rel=1e-12)

    def test_eps_zero(self):
        assert frequency(3, 0.0, 2, 5) == 0.0

    @pytest.mark.parametrize("k,eps,r,n", [(1, 0.3, 0, 4), (2, 0.5, 1, 7), (3, 0.6, 2, 3), (4, 0.2, 1, 12)])
    def test_against_brute_mean(self, k, eps, r, n):
        assert frequency(k, eps, r, n) == pytest.approx(brute_mean(k, eps, r, n), rel=1e-11)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 5), st.floats(0.05, 0.9), st.integers(0, 4), st.integers(0, 100))
    def test_closed_vs_series(self, k, eps, r, n):
        r %= k
        assert abs(frequency(k, eps, r, n) - frequency_series(k, eps, r, n)) <= 1e-10 * frequency_series(k, eps, r, n)

    @pytest.mark.parametrize("eps", [1e-3, 1e-6, 1e-8])
    def test_small_eps(self, eps):
        """The closed form cancels here; the value must still match the leading term."""
        # f ~ C(r+k+n, n)/C(r+n, n) eps^2 for small eps
        lead = math.comb(1 + 2 + 3, 3) / math.comb(1 + 3, 3) * eps**2
        assert frequency(2, eps, 1, 3) == pytest.approx(lead, rel=1e-5)
        gap = frequency(2, eps, 1, 3) - frequency_asymptote(2, eps, 1, 3)
        assert frequency_gap(2, eps, 1, 3) == pytest.approx(gap, abs=1e-15)

    def test_increasing_in_n(self):
        f = [frequency(3, 0.5, 1, n) for n in range(30)]
        assert all(b > a for a, b in zip(f, f[1:]))

    def test_rejects_bad_eps(self):
        with pytest.raises(ParameterError):
            frequency(2, -0.1, 0, 0)


class TestGap:
    def test_gap_is_difference(self):
        for r in range(3):
            for n in (0, 3, 10):
                f, a = frequency(3, 0.6, r, n), frequency_asymptote(3, 0.6, r, n)
                assert frequency_gap(3, 0.6, r, n) == pytest.approx(f - a, abs=1e-12)

    def test_gap_decays_geometrically(self):
        g = [abs(frequency_gap(2, 0.5, 0, n)) for n in (20, 40)]
        # ratio (a0/a1)^20 with a0 = 1 - F, a1 = 1 + F, F = 1/2
        assert g[1] / g[0] == pytest.approx((1 / 3) ** 20 * 41 / 21, rel=0.05)

    def test_k1_gap_zero(self):
        assert frequency_gap(1, 0.5, 0, 10) == 0.0


class TestDifferences:
    def test_limits(self):
        d = frequency_differences(2, 0.5, 200)
        assert d.delta_n[(0, 200)] == pytest.approx(0.5, abs=1e-12)
        assert d.delta_r[(1, 200)] == pytest.approx(-0.5, abs=1e-12)
        assert mod1_distance(d.delta_r[(0, 200)], d.limit_r) < 1e-12

    def test_consistent_with_direct_differences_small_n(self):
        d = frequency_differences(3, 0.4, 5)
        for n in range(1, 6):
            for r in range(3):
                direct = frequency(3, 0.4, r, n) - frequency(3, 0.4, r, n - 1)
                assert d.delta_n[(r, n)] == pytest.approx(direct, abs=1e-12)
            assert d.delta_r[(1, n)] == pytest.approx(frequency(3, 0.4, 1, n) - frequency(3, 0.4, 0, n), abs=1e-12)

    def test_needs_window(self):
        with pytest.raises(ParameterError):
            frequency_differences(2, 0.5, 1)

    def test_mod1(self):
        assert mod1_distance(0.5, -0.5) == 0
        assert mod1_distance(0.1, 0.95) == pytest.approx(0.15)


class TestTransport:
    def test_unitary(self):
        rng = np.random.default_rng(0)
        v = {a: complex(rng.normal(), rng.normal()) for a in chain_index_set(3, 6)}
        w = transport_apply(3, 0.5, 2.3, v)
        assert sum(abs(c) ** 2 for c in w.values()) == pytest.approx(sum(abs(c) ** 2 for c in v.values()), rel=1e-14)

    def test_group_law(self):
        v = {(0, 1): 1.0 + 0j, (1, 2): 0.5j}
        a = transport_apply(2, 0.5, 1.0, transport_apply(2, 0.5, 0.7, v))
        b = transport_apply(2, 0.5, 1.7, v)
        assert all(a[i] == pytest.approx(b[i], abs=1e-14) for i in v)

    def test_monodromy(self):
        m = monodromy_diagonal(1, 0.5, 2)
        assert m[(0, 0)] == pytest.approx(cmath.exp(2j * math.pi / 3))

    def test_table(self):
        tab = frequency_table(2, 0.5, 3)
        assert tab[(1, 3)] == frequency(2, 0.5, 1, 3)


class TestFlatness:
    @pytest.mark.parametrize("t", [0.0, 1.0, math.pi])
    def test_gamma_flat(self, t):
        for r, n in chain_index_set(2, 6):
            assert flatness_residual(2, 0.5, t, r, n) < 1e-12

    def test_beta_not_flat(self):
        """The unparallelised frame moves at rate |f|."""
        assert flatness_residual(1, 0.5, 0.4, 0, 0, section="beta") == pytest.approx(1 / 3, rel=1e-10)

    def test_section_name(self):
        with pytest.raises(ParameterError):
            flatness_residual(1, 0.5, 0, 0, 0, section="delta")
