"""Frame vectors of the fibre and their Drury-Arveson geometry."""

import cmath
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from submodule_perturb.frames import (
    ParameterError,
    TruncationSpec,
    alpha,
    alpha_norm_sq,
    beta,
    chain_coordinates,
    chain_index_set,
    frame_time_derivative,
    gamma,
    gram,
    h2_inner,
    h2_norm_sq,
    membership_residual,
    synthesize,
)


def dict_inner(u, v):
    """Independent oracle: plain dict sum with weights 1/C(m+n, m)."""
    return sum(c * np.conj(v[mn]) / math.comb(mn[0] + mn[1], mn[0]) for mn, c in u.items() if mn in v)


class TestTruncationSpec:
    def test_validation(self):
        with pytest.raises(ParameterError):
            TruncationSpec(q_max=-1)
        with pytest.raises(ParameterError):
            TruncationSpec(tail_tol=0)
        with pytest.raises(ParameterError):
            TruncationSpec(backend="mpmath")


class TestAlpha:
    def test_coefficients(self):
        a = alpha(2, 0.5, 0.0, 1, 2, TruncationSpec(q_max=3))
        expected = [math.comb(1 + 2 * q + 2, 2) * 0.5**q for q in range(4)]
        assert np.allclose(a.coeffs, expected)
        assert a.monomial(3) == (7, 2)

    def test_phase(self):
        a = alpha(1, 0.5, 0.7, 0, 0, TruncationSpec(q_max=4))
        assert a.coeffs[3] == pytest.approx(0.5**3 * cmath.exp(-3j * 0.7))

    def test_norm_matches_closed_form(self):
        for k, eps, r, n in [(1, 0.5, 0, 0), (2, 0.3, 1, 4), (3, 0.7, 2, 10)]:
            a = alpha(k, eps, 0.4, r, n)
            assert h2_norm_sq(a) == pytest.approx(alpha_norm_sq(k, eps, r, n), rel=1e-13)

    def test_known_norm(self):
        assert alpha_norm_sq(1, 0.5, 0, 0) == pytest.approx(4 / 3)
        assert alpha_norm_sq(2, 0.0, 1, 3) == 4

    def test_eps_zero_is_monomial(self):
        a = alpha(2, 0.0, 1.0, 1, 2)
        assert a.q_max == 0 and a.coeffs[0] == 3

    def test_exact_backend(self):
        a = alpha(2, Fraction(1, 2), 0, 0, 1, TruncationSpec(q_max=5, backend="exact"))
        assert a.coeffs[2] == Fraction(math.comb(5, 1), 4)
        assert 0 < a.tail_bound < 1

    def test_exact_backend_rejects_time(self):
        with pytest.raises(ParameterError):
            alpha(2, Fraction(1, 2), 0.3, 0, 0, TruncationSpec(backend="exact"))

    def test_tail_bound_controls_omission(self):
        short = alpha(2, 0.6, 0, 0, 3, TruncationSpec(q_max=10))
        omitted = alpha_norm_sq(2, 0.6, 0, 3) - h2_norm_sq(short)
        assert math.sqrt(omitted) <= short.tail_bound * (1 + 1e-6)

    def test_bad_params(self):
        with pytest.raises(ParameterError):
            alpha(2, 1.0, 0, 0, 0)
        with pytest.raises(ParameterError):
            alpha(2, 0.5, 0, 2, 0)

    def test_json(self):
        doc = alpha(1, 0.5, 0.0, 0, 0, TruncationSpec(q_max=2)).to_json()
        json.dumps(doc)
        assert doc["coeffs"][1] == [1, 0, 0.5, 0.0]


class TestInnerProducts:
    def test_fast_path_matches_dict_oracle(self):
        u = beta(2, 0.4, 0.3, 1, 3)
        v = {m: 0.1 * (i + 1) * (1 - 0.5j) for i, m in enumerate(u.to_dict())}
        assert complex(h2_inner(u, v)) == pytest.approx(dict_inner(u.to_dict(), v), rel=1e-12)

    def test_disjoint_chains_exactly_orthogonal(self):
        assert h2_inner(beta(3, 0.5, 0, 0, 1), beta(3, 0.5, 0, 1, 1)) == 0

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 4), st.floats(0, 0.85), st.floats(-4, 4), st.integers(0, 30))
    def test_beta_unit(self, k, eps, t, n):
        for r in range(k):
            assert abs(h2_norm_sq(beta(k, eps, t, r, n)) - 1) < 1e-12

    def test_gram_identity(self):
        G = gram(2, 0.5, 0.9, chain_index_set(2, 10))
        assert np.max(np.abs(G - np.eye(len(G)))) < 1e-12

    def test_index_order(self):
        assert chain_index_set(2, 1) == [(0, 0), (1, 0), (0, 1), (1, 1)]


class TestMembership:
    def test_exact_zero(self):
        trunc = TruncationSpec(q_max=12, backend="exact")
        for M in range(15):
            for r in range(3):
                assert membership_residual(3, Fraction(1, 3), 0, r, 2, M, 2, trunc) == 0

    def test_float_within_tail(self):
        a = alpha(2, 0.5, 1.2, 1, 2)
        for M in range(0, 2 * a.q_max + 6):
            assert abs(membership_residual(2, 0.5, 1.2, 1, 2, M, 2)) <= max(a.tail_bound, 1e-12)

    def test_wrong_perturbation_detected(self):
        """The generator with the wrong phase is not orthogonal to alpha."""
        a = alpha(1, 0.5, 0.0, 0, 0)
        wrong = {(1, 0): 1.0, (0, 0): -0.5 * cmath.exp(1j)}
        assert abs(h2_inner(a, wrong)) > 0.1


class TestDerivatives:
    def test_time_derivative_norm(self):
        d = frame_time_derivative(1, 0.5, 0.0, 0, 0, 1)
        # sum q^2 (1/4)^q = (1/4)(1+1/4)/(1-1/4)^3
        assert h2_norm_sq(d) == pytest.approx(0.25 * 1.25 / 0.75**3, rel=1e-12)

    def test_finite_difference(self):
        h = 1e-6
        d = frame_time_derivative(2, 0.5, 0.3, 1, 1, 1, TruncationSpec(q_max=40))
        a1 = alpha(2, 0.5, 0.3 + h, 1, 1, TruncationSpec(q_max=40))
        a0 = alpha(2, 0.5, 0.3 - h, 1, 1, TruncationSpec(q_max=40))
        assert np.allclose((a1.coeffs - a0.coeffs) / (2 * h), d.coeffs, atol=1e-6)


class TestCoordinates:
    def test_roundtrip(self):
        rng = np.random.default_rng(3)
        coords = {idx: complex(rng.normal(), rng.normal()) for idx in chain_index_set(2, 4)}
        v = synthesize(coords, 2, 0.4, 0.5)
        back = chain_coordinates(v, 2, 0.4, 0.5)
        for idx, c in coords.items():
            assert back[idx] == pytest.approx(c, abs=1e-12)

    def test_submodule_element_has_no_coordinates(self):
        # z1^2 - eps e^{it} lies in the submodule, so it is orthogonal to the fibre
        v = {(2, 0): 1.0, (0, 0): -0.5}
        assert all(abs(c) < 1e-15 for c in chain_coordinates(v, 2, 0.5, 0.0).values())

    def test_gamma_phase(self):
        g = gamma(1, 0.5, 2.0, 0, 0, frequency=1 / 3)
        b = beta(1, 0.5, 2.0, 0, 0)
        assert np.allclose(g.coeffs, b.coeffs * cmath.exp(2j / 3))
