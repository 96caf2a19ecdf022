"""Acceptance suite shared by the ``verify`` command and the test-suite.

Each check returns a :class:`CheckResult` whose text is deterministic: random
draws use fixed seeds, measured values are printed to three significant
digits, and wall-clock limits affect only the pass flag, never the text.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .core_series import asymptotic_ratio, closed_sum, series_sum
from .frames import TruncationSpec, chain_index_set, gram, membership_residual
from .general_monomial import (
    gm_frequency,
    phase_report,
    z1z2_frequency_closed,
    z1z2_generating_function,
)
from .toeplitz import OPERATORS, compactness_profile, conjugation_residual, matrix_entry, shift_weight
from .transport import (
    flatness_residual,
    frequency,
    frequency_asymptote,
    frequency_differences,
    frequency_series,
    mod1_distance,
    transport_apply,
)
from .sobolev import fit_loglog, hs_ladder, nonsmooth_ratio, smoothing_order, taylor_order

__all__ = ["CheckResult", "CHECKS", "run_check", "run_suite", "format_report"]


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    summary: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.name}: {self.summary}"


def _e(x: float) -> str:
    return f"{x:.3e}"


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def check_closed_forms() -> tuple[bool, str]:
    rng = np.random.default_rng(1)
    worst = 0.0
    with _Timer() as tm:
        for _ in range(100):
            k = int(rng.integers(1, 6))
            E = float(rng.uniform(0, 0.8))
            r = int(rng.integers(0, k))
            n = int(rng.integers(0, 51))
            l = int(rng.integers(0, 3))
            c = closed_sum(k, E, r, n, l)
            s = series_sum(k, E, r, n, l, tol=1e-15).value
            if s == 0:
                worst = max(worst, abs(c))
            else:
                worst = max(worst, abs(c - s) / abs(s))
    ok = worst <= 1e-10 and tm.elapsed < 5
    return ok, f"max relative deviation {_e(worst)} over 100 draws (limit 1e-10, runtime < 5 s)"


def check_asymptotics() -> tuple[bool, str]:
    ns = list(range(50, 201))
    parts, ok = [], True
    for r in (0, 1):
        for l in (0, 1, 2):
            a = asymptotic_ratio(2, 0.25, r, l, ns)
            inc = float(np.max(np.abs(np.diff(a[ns.index(100):]))))
            ok &= inc < 1e-6
            parts.append(f"(r={r},l={l}) {_e(inc)}")
    return ok, "max increment past n=100: " + ", ".join(parts) + " (limit 1e-6)"


def check_gram() -> tuple[bool, str]:
    with _Timer() as tm:
        G = gram(3, 0.4, 1.0, chain_index_set(3, 40))
        dev = float(np.max(np.abs(G - np.eye(len(G)))))
    return dev < 1e-10 and tm.elapsed < 5, \
        f"max |G - I| = {_e(dev)} on {len(G)} frames (limit 1e-10, runtime < 5 s)"


def check_membership() -> tuple[bool, str]:
    k, eps = 2, Fraction(1, 2)
    trunc = TruncationSpec(q_max=30 // k + 2, backend="exact")
    nonzero = 0
    count = 0
    for N in range(21):
        for r in range(k):
            for M in range(31):
                v = membership_residual(k, eps, 0, r, N, M, N, trunc)
                count += 1
                if v != 0:
                    nonzero += 1
    return nonzero == 0, f"{nonzero} nonzero exact residuals among {count} (M <= 30, N <= 20)"


def check_frequencies() -> tuple[bool, str]:
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100):
        k = int(rng.integers(1, 6))
        eps = float(rng.uniform(0.05, 0.9))
        r = int(rng.integers(0, k))
        n = int(rng.integers(0, 101))
        a, b = frequency(k, eps, r, n), frequency_series(k, eps, r, n)
        worst = max(worst, abs(a - b) / abs(b))
    worst1 = 0.0
    for eps in (0.1, 0.3, 0.5, 0.7, 0.9):
        F = eps * eps
        for n in range(0, 201, 10):
            exact = F * (n + 1) / (1 - F)
            worst1 = max(worst1, abs(frequency(1, eps, 0, n) - exact) / exact)
    ok = worst <= 1e-10 and worst1 <= 1e-12
    return ok, (f"closed vs series {_e(worst)} (limit 1e-10); "
                f"k=1 exact form {_e(worst1)} (limit 1e-12)")


def check_asymptote() -> tuple[bool, str]:
    worst = 0.0
    for r in (0, 1):
        for n in range(40, 401):
            worst = max(worst, abs(frequency(2, 0.5, r, n) - frequency_asymptote(2, 0.5, r, n)))
    return worst < 1e-8, f"max |f - asymptote| over 40 <= n <= 400 = {_e(worst)} (limit 1e-8)"


def check_differences() -> tuple[bool, str]:
    d = frequency_differences(2, 0.5, 200)
    wr = max(mod1_distance(d.delta_r[(r, 200)], -0.5) for r in (0, 1))
    wn = max(abs(d.delta_n[(r, 200)] - 0.5) for r in (0, 1))
    return wr < 1e-8 and wn < 1e-8, \
        f"|delta_r + 1/2| (mod 1) = {_e(wr)}, |delta_n - 1/2| = {_e(wn)} at n=200 (limit 1e-8)"


def check_transport() -> tuple[bool, str]:
    rng = np.random.default_rng(8)
    idx = chain_index_set(2, 10)
    worst_u = 0.0
    for _ in range(20):
        v = {a: complex(rng.normal(), rng.normal()) for a in idx}
        w = transport_apply(2, 0.5, float(rng.uniform(0, 10)), v)
        n0 = math.sqrt(sum(abs(c) ** 2 for c in v.values()))
        n1 = math.sqrt(sum(abs(c) ** 2 for c in w.values()))
        worst_u = max(worst_u, abs(n1 - n0) / n0)
    worst_f = 0.0
    for t in (0.0, 1.0, math.pi):
        for r, n in chain_index_set(2, 20):
            worst_f = max(worst_f, flatness_residual(2, 0.5, t, r, n))
    return worst_u < 1e-12 and worst_f < 1e-9, \
        f"norm drift {_e(worst_u)} (limit 1e-12); flatness residual {_e(worst_f)} (limit 1e-9)"


def check_weights() -> tuple[bool, str]:
    rng = np.random.default_rng(9)
    worst = 0.0
    drawn = 0
    while drawn < 50:
        k = int(rng.integers(1, 5))
        eps = float(rng.uniform(0.05, 0.8))
        op = OPERATORS[int(rng.integers(0, 4))]
        r = int(rng.integers(0, k))
        n = int(rng.integers(0, 31))
        if (op == "T1" and r == k - 1) or (op == "T1adj" and r == 0) or (op == "T2adj" and n == 0):
            continue  # interior indices only
        drawn += 1
        w = shift_weight(k, eps, op, r, n)
        worst = max(worst, abs(matrix_entry(k, eps, 0.0, op, r, n) - w) / w)
    worst1 = 0.0
    for eps in (0.1, 0.5, 0.9):
        target = math.sqrt(1 - eps * eps)
        for n in range(101):
            worst1 = max(worst1, abs(shift_weight(1, eps, "T2", 0, n) - target))
    return worst <= 1e-10 and worst1 <= 1e-12, \
        f"closed vs matrix {_e(worst)} over 50 draws (limit 1e-10); k=1 T2 {_e(worst1)} (limit 1e-12)"


def check_conjugation() -> tuple[bool, str]:
    trunc = TruncationSpec(n_max=60)
    res = {op: conjugation_residual(2, 0.5, op, trunc).max_interior for op in OPERATORS}
    ok = all(v < 1e-10 for v in res.values())
    return ok, "interior residual " + ", ".join(f"{op} {_e(v)}" for op, v in res.items()) + " (limit 1e-10)"


def check_compactness() -> tuple[bool, str]:
    parts, ok = [], True
    for op in OPERATORS:
        d = compactness_profile(2, 0.5, op, 200)
        dec = bool(np.all(np.diff(d[20:]) < 0))
        ok &= dec and d[200] < 1e-6
        parts.append(f"{op} {'decreasing' if dec else 'NOT decreasing'} d(200)={_e(d[200])}")
    return ok, "; ".join(parts) + " (limit 1e-6)"


def check_nonsmooth() -> tuple[bool, str]:
    ns = np.unique(np.round(np.logspace(2, 3, 25)).astype(int))
    c = np.array([nonsmooth_ratio(2, 0.5, 0, int(n), "central") for n in ns])
    g = np.array([nonsmooth_ratio(2, 0.5, 0, int(n), "long") for n in ns])
    agree = float(np.max(np.abs(c - g) / c))
    fit = fit_loglog(ns, c)
    ok = 0.48 <= fit.slope <= 0.52 and agree <= 1e-10
    return ok, (f"slope {fit.slope:.4f} (95% CI {fit.ci95[0]:.4f}..{fit.ci95[1]:.4f}, target [0.48, 0.52]); "
                f"path agreement {_e(agree)} (limit 1e-10)")


def check_hs() -> tuple[bool, str]:
    a = hs_ladder(2, 0.5, 4.0, 1, 600)
    tail = a.tail_after(300)
    b = hs_ladder(2, 0.5, -2.0, 1, 400)
    inc = b.increments
    diverges = bool(np.all(np.diff(inc[100:]) > 0)) and inc[-1] > 1
    s = smoothing_order(2, 0.5)
    tails = {j: hs_ladder(2, 0.5, s, j, 600).tail_after(300) for j in (1, 2)}
    ok = tail < 1e-4 and diverges and all(v < 1e-4 for v in tails.values())
    return ok, (f"s=4 j=1 tail past 300 {_e(tail)}; s=-2 increments "
                f"{'grow' if diverges else 'do not grow'} (last {_e(inc[-1])}); "
                f"s={s:g} tails j=1 {_e(tails[1])}, j=2 {_e(tails[2])} (limit 1e-4)")


def check_taylor() -> tuple[bool, str]:
    order, _ = taylor_order(2, 0.5, 0.0, [1e-1, 1e-2, 1e-3], 4.0, 1, TruncationSpec(n_max=150))
    return order >= 1.9, f"observed order {order:.4f} (limit >= 1.9)"


def check_z1z2() -> tuple[bool, str]:
    worst = 0.0
    for d in range(-50, 51):
        start = (d, 0) if d >= 0 else (0, -d)
        worst = max(worst, abs(gm_frequency(1, 1, 0.3, start) - z1z2_frequency_closed(0.3, d)))
    rep = phase_report(1, 1, 0.3, 50)
    step = rep["per_step_differences"]["m_direction"]
    gf = 0.0
    for d in range(11):
        for x in (0.01, 0.05, 0.1, 0.15, 0.2):
            term, brute = 1.0, 1.0
            for q in range(600):
                term *= x * (d + 2 * q + 1) * (d + 2 * q + 2) / ((q + 1) * (d + q + 1))
                brute += term
            gf = max(gf, abs(brute - z1z2_generating_function(x, d)) / brute)
    ok = (worst < 1e-8 and abs(step - 0.125) < 1e-10
          and abs(rep["reference_exponent"] - 0.25) < 1e-12
          and abs(rep["derived_exponent"] - 0.125) < 1e-12
          and rep["factor_two_relation"] and gf < 1e-12)
    return ok, (f"series vs closed {_e(worst)} (limit 1e-8); step {step:.12f}; "
                f"reference exponent {rep['reference_exponent']:.12f}, derived {rep['derived_exponent']:.12f}, "
                f"factor-2 {'flagged' if rep['factor_two_relation'] else 'absent'}; "
                f"generating function {_e(gf)} (limit 1e-12)")


CHECKS: dict[int, tuple[str, Callable[[], tuple[bool, str]]]] = {
    1: ("closed forms vs series", check_closed_forms),
    2: ("asymptotic ratio Cauchy", check_asymptotics),
    3: ("frame orthonormality", check_gram),
    4: ("exact submodule membership", check_membership),
    5: ("frequency consistency", check_frequencies),
    6: ("asymptote gap", check_asymptote),
    7: ("difference limits", check_differences),
    8: ("unitarity and flatness", check_transport),
    9: ("weighted shift weights", check_weights),
    10: ("conjugation identities", check_conjugation),
    11: ("compactness decay", check_compactness),
    12: ("nonsmoothness exponent", check_nonsmooth),
    13: ("Hilbert-Schmidt convergence", check_hs),
    14: ("Taylor remainder order", check_taylor),
    15: ("z1 z2 chains", check_z1z2),
}
DETERMINISM = 16


def run_check(number: int) -> CheckResult:
    name, fn = CHECKS[number]
    try:
        ok, summary = fn()
    except Exception as exc:  # report, do not abort the suite
        ok, summary = False, f"error: {type(exc).__name__}: {exc}"
    return CheckResult(number, name, bool(ok), summary)


def run_suite(numbers=None) -> list[CheckResult]:
    """Run the numerical checks; 16 (determinism) repeats them and compares the text."""
    wanted = sorted(CHECKS) + [DETERMINISM] if numbers is None else sorted(numbers)
    base = [n for n in wanted if n in CHECKS]
    if DETERMINISM in wanted:
        base = sorted(CHECKS)
    results = [run_check(n) for n in base]
    if DETERMINISM in wanted:
        again = [run_check(n) for n in base]
        same = format_report(results) == format_report(again)
        results.append(CheckResult(DETERMINISM, "determinism", same,
                                   "repeated run gives byte-identical report" if same
                                   else "repeated run differs"))
    return [r for r in results if r.number in wanted]


def format_report(results: list[CheckResult]) -> str:
    lines = [r.line() for r in results]
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"
