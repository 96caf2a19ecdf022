"""Acceptance criteria 1-16 at their stated tolerances.

The suite is computed once per session; each criterion is its own test and
its PASS/FAIL line is printed in the terminal summary.
"""

import subprocess
import sys

import pytest

from submodule_perturb.verification import CHECKS, DETERMINISM, format_report, run_suite

REPORT_LINES: list[str] = []


@pytest.fixture(scope="module")
def suite():
    results = {r.number: r for r in run_suite()}
    REPORT_LINES[:] = [results[n].line() for n in sorted(results)]
    return results


def _check(suite, number):
    res = suite[number]
    print(res.line())
    assert res.passed, res.line()


class TestAcceptance:
    """One test per criterion; tolerances live in the shared checks."""

    def test_01_closed_forms_vs_series(self, suite):
        _check(suite, 1)

    def test_02_asymptotic_ratio_cauchy(self, suite):
        _check(suite, 2)

    def test_03_frame_orthonormality(self, suite):
        _check(suite, 3)

    def test_04_exact_membership(self, suite):
        _check(suite, 4)

    def test_05_frequency_consistency(self, suite):
        _check(suite, 5)

    def test_06_asymptote_gap(self, suite):
        _check(suite, 6)

    def test_07_difference_limits(self, suite):
        _check(suite, 7)

    def test_08_unitarity_and_flatness(self, suite):
        _check(suite, 8)

    def test_09_weighted_shift_weights(self, suite):
        _check(suite, 9)

    def test_10_conjugation_identities(self, suite):
        _check(suite, 10)

    def test_11_compactness_decay(self, suite):
        _check(suite, 11)

    def test_12_nonsmoothness_exponent(self, suite):
        _check(suite, 12)

    def test_13_hilbert_schmidt_convergence(self, suite):
        _check(suite, 13)

    def test_14_taylor_remainder_order(self, suite):
        _check(suite, 14)

    def test_15_z1z2_chains(self, suite):
        _check(suite, 15)

    def test_16_determinism(self, suite):
        _check(suite, DETERMINISM)

    def test_16_verify_command_byte_identical(self, suite):
        """A separate process reproduces the in-process report byte for byte."""
        out = subprocess.run([sys.executable, "-m", "submodule_perturb", "verify"],
                             capture_output=True, text=True, check=False)
        assert out.stdout == format_report([suite[n] for n in sorted(suite)])
        assert out.returncode == (0 if all(r.passed for r in suite.values()) else 1)


def test_every_criterion_covered():
    assert sorted(CHECKS) + [DETERMINISM] == list(range(1, 17))
