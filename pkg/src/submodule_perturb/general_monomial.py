"""Chains and transport frequencies for the perturbation ``z1^k z2^l - eps e^{it}``.

Orthogonality to the submodule couples the monomials ``(m + kq, n + lq)``,
q >= 0, into one chain per start ``(m, n)`` with ``m < k`` or ``n < l``.  The
chain weights are ``C(m+n+(k+l)q, m+kq) eps^(2q)`` and the frequency is the
mean of q under them, exactly as for the ``z1^k`` family.

For ``(k, l) = (1, 1)`` the chain through ``(d, 0)`` (or ``(0, -d)``) has the
closed form ``f_d = |d|(1-s)/(2s) + 2x/(1-4x)``, ``x = eps^2``,
``s = sqrt(1-4x)``, which follows from
``sum_q C(|d|+2q, q) x^q = B^|d| / s`` with ``B = (1-s)/(2x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core_series import DivergentSeriesError, SeriesResult
from .frames import ParameterError

__all__ = [
    "GMChainStart",
    "gm_radius",
    "gm_chain_starts",
    "gm_chain_of",
    "gm_series",
    "gm_frequency",
    "z1z2_generating_function",
    "z1z2_frequency_closed",
    "phase_report",
]

RADIUS_MARGIN = 0.99


@dataclass(frozen=True, order=True)
class GMChainStart:
    m: int
    n: int

    def member(self, k: int, l: int, q: int) -> tuple[int, int]:
        return (self.m + k * q, self.n + l * q)

    @property
    def label(self) -> int:
        """Diagonal label ``m - n`` (meaningful for k = l = 1)."""
        return self.m - self.n


def _check_kl(k: int, l: int, allow_l0: bool = False) -> None:
    if not isinstance(k, int) or k < 1:
        raise ParameterError(f"k must be an integer >= 1, got {k!r}")
    lo = 0 if allow_l0 else 1
    if not isinstance(l, int) or l < lo:
        raise ParameterError(f"l must be an integer >= {lo}, got {l!r}")


def gm_radius(k: int, l: int) -> float:
    """``k^k l^l / (k+l)^(k+l)``: the radius of convergence in ``eps^2``."""
    return math.exp(k * math.log(k) + (l * math.log(l) if l else 0.0)
                    - (k + l) * math.log(k + l))


def _check_eps(k: int, l: int, eps: float) -> None:
    if not 0 <= eps < 1:
        raise ParameterError(f"epsilon must lie in [0, 1), got {eps}")
    bound = RADIUS_MARGIN * gm_radius(k, l)
    if eps * eps >= bound:
        raise DivergentSeriesError(
            f"eps^2 = {eps * eps:.17g} violates the convergence bound "
            f"eps^2 < 0.99 * k^k l^l/(k+l)^(k+l) = {bound:.17g} for (k, l) = ({k}, {l})"
        )


def gm_chain_starts(k: int, l: int, m_max: int, n_max: int) -> list[GMChainStart]:
    """Chain starts within ``0 <= m <= m_max, 0 <= n <= n_max``, ordered by (m, n)."""
    _check_kl(k, l)
    return [GMChainStart(m, n) for m in range(m_max + 1) for n in range(n_max + 1)
            if m < k or n < l]


def gm_chain_of(k: int, l: int, m: int, n: int) -> tuple[GMChainStart, int]:
    """Start of the chain containing ``(m, n)`` and its position q on it."""
    _check_kl(k, l)
    if m < 0 or n < 0:
        raise ParameterError(f"indices must be nonnegative, got ({m}, {n})")
    q = min(m // k, n // l)
    return GMChainStart(m - k * q, n - l * q), q


def _term_ratio(k: int, l: int, m: int, n: int, q: int) -> float:
    """``C(A+k+l, B+k) / C(A, B)`` with ``A = m+n+(k+l)q``, ``B = m+kq``."""
    A, B = m + n + (k + l) * q, m + k * q
    out = 1.0
    for i in range(1, k + l + 1):
        out *= A + i
    for i in range(1, k + 1):
        out /= B + i
    for i in range(1, l + 1):
        out /= A - B + i
    return out


def gm_series(k: int, l: int, eps: float, start: tuple[int, int], moment: int = 0,
              tol: float = 1e-15, max_terms: int = 10**6) -> tuple[SeriesResult, SeriesResult]:
    """Normalised sums ``sum_q w_q / w_0`` and ``sum_q q^moment w_q / w_0``.

    The term ratio is monotone in q with limit ``L = x (k+l)^(k+l)/(k^k l^l)``,
    so every later ratio is at most ``max(current ratio, L)``; once that is
    below one the tail is dominated by a geometric series and both sums stop
    when the bound falls under ``tol`` times the sum.
    """
    m, n = start
    x = float(eps) ** 2
    limit = x / gm_radius(k, l)
    term, s0 = 1.0, 1.0
    s1 = 0.0 if moment else 1.0
    for q in range(max_terms):
        rho = _term_ratio(k, l, m, n, q) * x
        term *= rho
        qq = q + 1
        s0 += term
        s1 += term * qq**moment
        if term > 1e250:
            term *= 1e-250
            s0 *= 1e-250
            s1 *= 1e-250
        bound = max(rho, limit)
        if bound < 1:
            # the moment weight grows by at most ((q+2)/(q+1))^moment per step
            rho1 = bound * ((qq + 1) / qq) ** moment
            t0 = term * bound / (1 - bound)
            t1 = term * qq**moment * rho1 / (1 - rho1) if rho1 < 1 else math.inf
            if t0 <= tol * s0 and t1 <= tol * max(s1, 1e-300):
                return (SeriesResult(s0, qq, t0), SeriesResult(s1, qq, t1))
    raise DivergentSeriesError(f"no convergence within {max_terms} terms")


def gm_frequency(k: int, l: int, eps: float, start, tol: float = 1e-15) -> float:
    """Mean of q under ``C(m+n+(k+l)q, m+kq) eps^(2q)`` on the chain from ``start``.

    ``l = 0`` is admitted; it reproduces the ``z1^k`` family with n fixed.
    """
    _check_kl(k, l, allow_l0=True)
    m, n = (start.m, start.n) if isinstance(start, GMChainStart) else start
    if m < 0 or n < 0 or not (m < k or n < l):
        raise ParameterError(f"({m}, {n}) is not a chain start for (k, l) = ({k}, {l})")
    _check_eps(k, l, eps)
    if eps == 0:
        return 0.0
    s0, s1 = gm_series(k, l, eps, (m, n), 1, tol)
    return s1.value / s0.value


def z1z2_generating_function(x: float, d: int) -> float:
    """``sum_q C(|d|+2q, q) x^q = B^|d| / sqrt(1-4x)``, ``B = (1-sqrt(1-4x))/(2x)``."""
    if not 0 <= x < 0.25:
        raise DivergentSeriesError(f"x = {x} must lie in [0, 1/4)")
    s = math.sqrt(1 - 4 * x)
    B = 2 / (1 + s)  # (1-s)/(2x) without cancellation
    return B ** abs(d) / s


def z1z2_frequency_closed(eps: float, d: int) -> float:
    """Closed-form frequency of chain d for ``z1 z2 - eps e^{it}``."""
    if not 0 <= eps < 0.5:
        raise DivergentSeriesError(f"epsilon = {eps} must satisfy eps < 1/2")
    x = eps * eps
    s = math.sqrt(1 - 4 * x)
    return abs(d) * (1 - s) / (2 * s) + 2 * x / (1 - 4 * x)


def _start_for_label(d: int) -> tuple[int, int]:
    return (d, 0) if d >= 0 else (0, -d)


def phase_report(k: int, l: int, eps: float, d_max: int = 50, tol: float = 1e-15) -> dict:
    """Limiting frequency differences and, for (1, 1), the exponent comparison.

    Differences are taken between the chains starting at ``(d_max, 0)`` and
    ``(d_max - 1, 0)`` (m-direction) and at ``(0, d_max)`` and
    ``(0, d_max - 1)`` (n-direction).  For (1, 1) the per-step difference is
    compared with ``(1-s)/s`` and ``(1-s)/(2s)``; ``match`` names which one it
    agrees with to 1e-10.
    """
    _check_kl(k, l)
    _check_eps(k, l, eps)
    if d_max < 1:
        raise ParameterError(f"d_max must be >= 1, got {d_max}")
    f = lambda m, n: gm_frequency(k, l, eps, (m, n), tol)  # noqa: E731
    diffs = {
        "m_direction": f(d_max, 0) - f(d_max - 1, 0),
        "n_direction": f(0, d_max) - f(0, d_max - 1),
    }
    report = {
        "k": k,
        "l": l,
        "epsilon": float(eps),
        "d_max": d_max,
        "per_step_differences": diffs,
        "lowest_mode": f(0, 0),
        "reference_exponent": None,
        "derived_exponent": None,
        "ratio_reference_to_derived": None,
        "match": "not_applicable",
        "factor_two_relation": None,
    }
    if (k, l) == (1, 1):
        s = math.sqrt(1 - 4 * eps * eps)
        ref = (1 - s) / s
        derived = (1 - s) / (2 * s)
        step = diffs["m_direction"]
        hits = [name for name, v in (("reference", ref), ("derived", derived))
                if abs(step - v) <= 1e-10]
        report.update(
            reference_exponent=ref,
            derived_exponent=derived,
            ratio_reference_to_derived=(ref / derived) if derived else None,
            factor_two_relation=bool(derived) and abs(ref - 2 * derived) <= 1e-12 * ref,
            match=hits[0] if len(hits) == 1 else ("both" if hits else "none"),
        )
    return report
