"""Besov weights, smoothed projection matrices and Hilbert-Schmidt ladders."""

import math
from fractions import Fraction

import numpy as np
import pytest

from submodule_perturb.frames import TruncationSpec, beta
from submodule_perturb.sobolev import (
    BranchError,
    besov_ratio,
    besov_weight,
    fit_loglog,
    hs_ladder,
    hs_norm,
    nonsmooth_ratio,
    projection_matrix,
    smoothing_factor,
    smoothing_order,
    taylor_order,
    taylor_remainder_check,
)


class TestWeights:
    def test_drury_arveson_recovered(self):
        for m in range(6):
            for n in range(6):
                assert besov_weight(-2, m, n) == pytest.approx(1 / math.comb(m + n, m), rel=1e-14)

    def test_hardy(self):
        # s = -1: m! n! / (m+n+1)!
        assert besov_weight(-1, 2, 1) == pytest.approx(2 / 24)

    def test_exact(self):
        assert besov_weight(4, 0, 0, exact=True) == 1
        assert besov_weight(4, 1, 2, exact=True) == Fraction(2 * 720, math.factorial(9))

    def test_non_integer_order(self):
        expected = math.factorial(3) * math.factorial(4) * math.gamma(10.5) / math.gamma(17.5)
        assert besov_weight(7.5, 3, 4) == pytest.approx(expected, rel=1e-13)

    def test_branch_guard(self):
        with pytest.raises(BranchError):
            besov_weight(-3, 0, 0)
        with pytest.raises(BranchError):
            smoothing_factor(-3.5, 1)

    def test_smoothing_factor(self):
        assert smoothing_factor(4, 1) == pytest.approx(1 / 7)
        n = np.arange(1000, 1003)
        assert np.all(np.diff(smoothing_factor(4, 1000) * 1000.0**6 * np.ones(3)) == 0)
        assert smoothing_factor(4, 1000) * 1000**6 == pytest.approx(720, rel=0.03)
        assert besov_ratio(4, n).shape == (3,)

    def test_smoothing_order(self):
        assert smoothing_order(2, 0.5) == 5.5


class TestProjectionMatrix:
    def test_j0_at_s_minus2_is_projection(self):
        """In matching bases the column of e_{m,n} is <e, beta> beta."""
        M = projection_matrix(2, 0.5, 0.4, -2, 0, TruncationSpec(n_max=2))
        b = beta(2, 0.5, 0.4, 1, 2)
        col = (1 + 2 * 3, 2)
        w = [1 / math.sqrt(math.comb(m + n, m)) for (m, n) in b.to_dict()]
        coeff = np.array(list(b.to_dict().values())) * w  # orthonormal coordinates
        i = 3
        for q, c in enumerate(coeff[:8]):
            assert M.entries[((1 + 2 * q, 2), col)] == pytest.approx(c * np.conj(coeff[i]), abs=1e-12)

    def test_hs_norm_equals_ladder(self):
        M = projection_matrix(2, 0.5, 0.3, 4, 1, TruncationSpec(n_max=6))
        norm, ladder = hs_norm(M)
        assert ladder[-1] == pytest.approx(hs_ladder(2, 0.5, 4, 1, 6).partial_sums[-1], rel=1e-10)

    def test_hs_projection_rank(self):
        """At s = -2 and j = 0 each chain contributes one rank-one projection."""
        lad = hs_ladder(2, 0.5, -2, 0, 5)
        assert np.allclose(lad.increments, 2.0)


class TestLadders:
    def test_converges_s4(self):
        lad = hs_ladder(2, 0.5, 4, 1, 400)
        assert lad.tail_after(300) < 1e-4
        assert lad.increments[400] < lad.increments[300]

    def test_diverges_s_minus2(self):
        lad = hs_ladder(2, 0.5, -2, 1, 200)
        assert np.all(np.diff(lad.increments[50:]) > 0)

    @pytest.mark.parametrize("s,j", [(4, 1), (5.5, 2), (-2, 1), (2.5, 2)])
    def test_increment_power_law(self, s, j):
        """Observed increments scale like n^(j - s - 2)."""
        lad = hs_ladder(2, 0.5, s, j, 400)
        ns = [100, 200, 400]
        assert fit_loglog(ns, lad.increments[ns]).slope == pytest.approx(j - s - 2, abs=0.1)


class TestNonsmooth:
    def test_k1_value(self):
        # variance of the geometric law with ratio 1/4 is (1/4)/(3/4)^2
        assert nonsmooth_ratio(1, 0.5, 0, 0) == pytest.approx(math.sqrt(4 / 9), rel=1e-12)

    def test_paths_agree(self):
        for n in (0, 10, 200, 900):
            a, b = nonsmooth_ratio(2, 0.5, 1, n), nonsmooth_ratio(2, 0.5, 1, n, "long")
            assert a == pytest.approx(b, rel=1e-10)

    def test_growth_exponent(self):
        ns = [100, 200, 400, 800]
        fit = fit_loglog(ns, [nonsmooth_ratio(2, 0.5, 0, n) for n in ns])
        assert 0.48 <= fit.slope <= 0.52
        assert fit.ci95[0] <= fit.slope <= fit.ci95[1]

    def test_fit_exact_power(self):
        fit = fit_loglog([1, 2, 4, 8], [3, 12, 48, 192])
        assert fit.slope == pytest.approx(2)


class TestTaylor:
    def test_second_order(self):
        order, rem = taylor_order(2, 0.5, 0.0, [0.1, 0.01, 0.001], 4, 1, TruncationSpec(n_max=60))
        assert order >= 1.9
        assert rem[0] > rem[1] > rem[2]

    def test_independent_of_t(self):
        a = taylor_remainder_check(2, 0.5, 0.0, 0.05, 4, 1, TruncationSpec(n_max=10))
        b = taylor_remainder_check(2, 0.5, 2.0, 0.05, 4, 1, TruncationSpec(n_max=10))
        assert a == pytest.approx(b, rel=1e-14)

    def test_matches_matrices(self):
        """Remainder from explicit matrices equals the closed evaluation."""
        h, trunc = 0.2, TruncationSpec(n_max=3)
        P1 = projection_matrix(2, 0.5, 0.3 + h, 4, 0, trunc).entries
        P0 = projection_matrix(2, 0.5, 0.3, 4, 0, trunc).entries
        D = projection_matrix(2, 0.5, 0.3, 4, 1, trunc).entries
        keys = set(P1) | set(P0) | set(D)
        direct = math.sqrt(sum(abs(P1.get(x, 0) - P0.get(x, 0) - h * D.get(x, 0)) ** 2 for x in keys))
        assert taylor_remainder_check(2, 0.5, 0.3, h, 4, 1, trunc) == pytest.approx(direct, rel=1e-8)
