"""Binomial weights and roots-of-unity series identities.

Everything in the package reduces to sums of the form

    S_l(k, E, r, n) = sum_{q >= 0} C(n + r + k q, n) E^q q^l

for |E| < 1.  Two independent routes are provided: :func:`closed_sum`
evaluates the finite roots-of-unity closed forms (l = 0, 1, 2), and
:func:`series_sum` adds terms directly with a certified geometric tail
bound.  The closed forms are floating point only; the series also runs
on :class:`fractions.Fraction` inputs.

Large ``n`` makes the sums overflow long before the ratios that the rest
of the package needs.  :func:`scaled_root_sums` and :func:`chain_weights`
therefore return mantissas together with a logarithmic scale.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number
from typing import Sequence

import numpy as np

__all__ = [
    "DivergentSeriesError",
    "RootData",
    "SeriesResult",
    "ChainWeights",
    "binomial_weight",
    "root_data",
    "root_filter",
    "scaled_root_sums",
    "closed_condition",
    "closed_sum",
    "series_sum",
    "chain_weights",
    "asymptotic_ratio",
]

# exp() overflows past this
_LOG_MAX = 709.0


class DivergentSeriesError(ValueError):
    """Raised when a series is evaluated outside its disk of convergence."""


def binomial_weight(m: int, n: int, exact: bool = False):
    """Monomial norm ``||z1^m z2^n||^2 = 1 / C(m+n, m)`` in the Drury-Arveson space.

    The float path uses a multiplicative recurrence and raises
    :class:`OverflowError` when the reciprocal underflows to zero.
    """
    if m < 0 or n < 0:
        raise ValueError(f"indices must be nonnegative, got ({m}, {n})")
    if exact:
        return Fraction(1, math.comb(m + n, m))
    lo, hi = min(m, n), max(m, n)
    w = 1.0
    for i in range(1, lo + 1):
        w *= i / (hi + i)
    if w == 0.0:
        raise OverflowError(f"binomial weight for ({m}, {n}) underflows double precision")
    return w


@dataclass(frozen=True)
class RootData:
    """Roots of unity and the shifted roots ``a_j = 1 - zeta_j F`` for ``F = E^(1/k)``."""

    k: int
    E: complex
    F: complex
    zeta: np.ndarray
    a: np.ndarray

    def zeta_pow(self, p: int) -> np.ndarray:
        """``zeta_j**p`` for all j, with the exponent reduced mod k before exponentiating."""
        j = np.arange(self.k)
        return np.exp(2j * np.pi * ((j * p) % self.k) / self.k)


def root_data(k: int, E) -> RootData:
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    E = complex(E)
    if abs(E) >= 1:
        raise DivergentSeriesError(f"|E| = {abs(E)} must be < 1")
    if E.imag == 0 and E.real >= 0:
        F = complex(E.real ** (1.0 / k))
    else:
        F = cmath.exp(cmath.log(E) / k) if E != 0 else 0j
    j = np.arange(k)
    zeta = np.exp(2j * np.pi * j / k)
    return RootData(k=k, E=E, F=F, zeta=zeta, a=1.0 - zeta * F)


def root_filter(k: int, q: int, r: int) -> Fraction:
    """Exact value of ``(1/k) sum_j zeta_j^(q-r)``: 1 when q = r (mod k), else 0.

    Evaluated through the cyclotomic identity: the k-th roots of unity raised
    to a power d sum to k when k | d and to 0 otherwise.
    """
    d = (q - r) % k
    # sum_j zeta^(j d) is a geometric series with ratio zeta^d
    return Fraction(1) if d == 0 else Fraction(0)


def scaled_root_sums(rd: RootData, r: int, n: int, mmax: int) -> tuple[np.ndarray, float]:
    """Mantissas of ``sum_j zeta_j^(-r+m) a_j^(-n-m-1)`` for m = 0..mmax.

    Returns ``(sums, log_scale)`` with the true value of entry m equal to
    ``sums[m] * exp(log_scale)``.  The common scale is ``|a_min|^(-n-1)``
    so no term exceeds ``|a_j|^(-m)`` in modulus.
    """
    amod = np.abs(rd.a)
    amin = float(amod.min())
    u = (amin / rd.a) ** (n + 1)
    out = np.empty(mmax + 1, dtype=complex)
    for m in range(mmax + 1):
        out[m] = np.sum(rd.zeta_pow(-r + m) * rd.a ** (-m) * u)
    return out, -(n + 1) * math.log(amin)


def _combine(l: int, r: int, n: int, F, s) -> complex:
    if l == 0:
        return s[0]
    if l == 1:
        return -r * s[0] + F * (n + 1) * s[1]
    return r * r * s[0] + F * (1 - 2 * r) * (n + 1) * s[1] + F * F * (n + 1) * (n + 2) * s[2]


def closed_condition(rd: RootData, r: int, n: int, l: int) -> float:
    """Cancellation factor of the closed form: sum of term moduli over |result|.

    Roughly ``10^d`` means d decimal digits are lost.  Large for small ``|F|``,
    where all ``a_j`` are close to 1 and the roots of unity nearly cancel.
    """
    amin = float(np.abs(rd.a).min())
    u = np.abs((amin / rd.a) ** (n + 1))
    absums = [float(np.sum(np.abs(rd.a) ** (-m) * u)) for m in range(l + 1)]
    s, _ = scaled_root_sums(rd, r, n, l)
    val = abs(_combine(l, r, n, rd.F, s))
    F = abs(rd.F)
    if l == 0:
        bound = absums[0]
    elif l == 1:
        bound = r * absums[0] + F * (n + 1) * absums[1]
    else:
        bound = (r * r * absums[0] + F * abs(1 - 2 * r) * (n + 1) * absums[1]
                 + F * F * (n + 1) * (n + 2) * absums[2])
    return bound / val if val > 0 else math.inf


def _closed_mantissa(rd: RootData, r: int, n: int, l: int) -> tuple[complex, float]:
    k, F = rd.k, rd.F
    if l not in (0, 1, 2):
        raise ValueError(f"closed forms exist only for l in (0, 1, 2), got l={l}")
    s, log_scale = scaled_root_sums(rd, r, n, l)
    val = _combine(l, r, n, F, s) / k ** (l + 1)
    # F^-r folded into the scale when F is a positive real
    if F.imag == 0 and F.real > 0:
        return val, log_scale - r * math.log(F.real)
    return val * F ** (-r), log_scale


def closed_sum(k: int, E, r: int, n: int, l: int) -> complex:
    """Roots-of-unity closed form of ``sum_q C(n+r+kq, n) E^q q^l`` for l in {0, 1, 2}.

    Always the closed form, even where it cancels badly (small ``|E|``, see
    :func:`closed_condition`); callers wanting a robust value fall back to
    :func:`series_sum` there.
    """
    _check_chain(k, r, n)
    if l not in (0, 1, 2):
        raise ValueError(f"closed forms exist only for l in (0, 1, 2), got l={l}")
    rd = root_data(k, E)
    if rd.E == 0:
        # the closed form divides by F^r; only the q = 0 term survives anyway
        return complex(math.comb(n + r, n)) if l == 0 else 0j
    val, log_scale = _closed_mantissa(rd, r, n, l)
    if log_scale > _LOG_MAX:
        raise OverflowError(f"closed_sum({k}, {E}, {r}, {n}, {l}) exceeds double range")
    return complex(val * math.exp(log_scale))


@dataclass(frozen=True)
class SeriesResult:
    value: Number
    q_used: int
    tail_bound: Number


def _check_chain(k: int, r: int, n: int) -> None:
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    if not 0 <= r < k:
        raise ValueError(f"r must satisfy 0 <= r < k, got r={r}, k={k}")
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")


def _binom_step(k: int, r: int, n: int, q: int):
    """Exact rational ``C(n+r+k(q+1), n) / C(n+r+kq, n)``."""
    m = r + k * q
    num = den = 1
    for i in range(1, k + 1):
        num *= m + n + i
        den *= m + i
    return num, den


def series_sum(k: int, E, r: int, n: int, l: int = 0, tol: float = 1e-15,
               max_terms: int = 10**6) -> SeriesResult:
    """Direct summation of ``sum_q C(n+r+kq, n) E^q q^l`` with a certified tail.

    The term ratio ``|E| prod_i (m+n+i)/(m+i) ((q+1)/q)^l`` is nonincreasing
    in q, so once it drops below 1 the remaining terms are dominated by a
    geometric series.  Summation stops when that majorant is at most
    ``tol * max(1, |partial sum|)``.

    Unlike the closed forms, any offset ``r >= 0`` is accepted.  A
    :class:`~fractions.Fraction` ``E`` selects exact arithmetic: the partial
    sum and tail bound are then exact rationals.
    """
    if k < 1 or r < 0 or n < 0:
        raise ValueError(f"need k >= 1 and r, n >= 0, got k={k}, r={r}, n={n}")
    if l < 0:
        raise ValueError(f"l must be nonnegative, got {l}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    exact = isinstance(E, (Fraction, int)) and not isinstance(E, bool)
    if exact:
        E = Fraction(E)
        absE = abs(E)
    else:
        E = complex(E)
        absE = abs(E)
    if absE >= 1:
        raise DivergentSeriesError(f"|E| = {float(absE)} must be < 1 for convergence")

    if exact:
        return _series_exact(k, E, r, n, l, Fraction(tol), max_terms)
    return _series_float(k, E, r, n, l, tol, max_terms)


def _series_exact(k, E, r, n, l, tol, max_terms):
    absE = abs(E)
    binom = math.comb(n + r, n)
    power = Fraction(1)
    total = Fraction(0)
    q = 0
    while True:
        total += binom * power * q**l
        if E == 0:
            return SeriesResult(total, q, Fraction(0))
        num, den = _binom_step(k, r, n, q)
        binom = binom * num // den
        power *= E
        q += 1
        n2, d2 = _binom_step(k, r, n, q)
        ratio = absE * Fraction(n2, d2) * Fraction(q + 1, q) ** l
        if ratio < 1:
            tail = binom * abs(power) * q**l / (1 - ratio)
            if tail <= tol * max(1, abs(total)):
                return SeriesResult(total, q - 1, tail)
        if q > max_terms:
            raise RuntimeError(f"series did not reach tol={tol} within {max_terms} terms")


def _series_float(k, E, r, n, l, tol, max_terms):
    absE = abs(E)
    # running term C(n+r+kq, n) E^q without the q^l factor
    term = complex(binomial_weight(r, n) ** -1)
    total = 0j
    q = 0
    while True:
        total += term * q**l
        if E == 0:
            return SeriesResult(total, q, 0.0)
        num, den = _binom_step(k, r, n, q)
        term = term * E * (num / den)
        q += 1
        n2, d2 = _binom_step(k, r, n, q)
        ratio = absE * (n2 / d2) * ((q + 1) / q) ** l
        if ratio < 1:
            tail = abs(term) * q**l / (1 - ratio)
            if tail <= tol * max(1.0, abs(total)):
                return SeriesResult(total, q - 1, tail)
        if q > max_terms:
            raise RuntimeError(f"series did not reach tol={tol} within {max_terms} terms")


@dataclass(frozen=True)
class ChainWeights:
    """Terms ``w_q = C(n+r+kq, n) E^q`` of one chain, rescaled.

    ``w[q] * exp(log_scale)`` is the true term for q = 0..len(w)-1.  The
    omitted terms sum to at most ``rel_tail`` times ``sum(w)``.
    """

    w: np.ndarray
    log_scale: float
    rel_tail: float

    @property
    def q(self) -> np.ndarray:
        return np.arange(len(self.w))

    def moment(self, l: int) -> float:
        """Normalised moment ``sum q^l w_q / sum w_q``."""
        return float(np.sum(self.q.astype(float) ** l * self.w) / np.sum(self.w))


def chain_weights(k: int, E: float, r: int, n: int, rel_tol: float = 1e-17,
                  q_max: int | None = None, l: int = 0) -> ChainWeights:
    """Positive chain weights for real ``0 <= E < 1`` with periodic rescaling.

    Terms follow the multiplicative recurrence of the binomials; whenever the
    running term exceeds 1e200 the stored prefix is divided down and the
    factor moved into ``log_scale``.  Without ``q_max`` summation stops once
    the certified geometric tail of ``sum q^l w_q`` is below ``rel_tol`` of
    the partial sum of ``w_q`` (for l > 0 this also bounds the moment tail
    relative to the zeroth-order mass).
    """
    _check_chain(k, r, n)
    E = float(E)
    if not 0 <= E < 1:
        raise DivergentSeriesError(f"E = {E} must lie in [0, 1)")
    terms = [1.0]
    log_scale = math.lgamma(n + r + 1) - math.lgamma(n + 1) - math.lgamma(r + 1)
    total = 1.0
    term = 1.0
    q = 0
    rel_tail = 0.0
    while True:
        if E == 0.0:
            break
        num, den = _binom_step(k, r, n, q)
        step = E * (num / den)
        nxt = term * step
        if q_max is None:
            nq = q + 1
            num2, den2 = _binom_step(k, r, n, nq)
            ratio = E * (num2 / den2) * ((nq + 1) / nq) ** l
            if ratio < 1:
                rel_tail = nxt * nq**l / (1 - ratio) / total
                if rel_tail <= rel_tol:
                    break
        elif q >= q_max:
            rel_tail = float("nan")
            break
        term = nxt
        terms.append(term)
        total += term
        q += 1
        if term > 1e200:
            terms = [x * 1e-200 for x in terms]
            term *= 1e-200
            total *= 1e-200
            log_scale += 200 * math.log(10)
    return ChainWeights(np.array(terms), log_scale, rel_tail)


def asymptotic_ratio(k: int, E: float, r: int, l: int, n_range: Sequence[int],
                     tol: float = 1e-15) -> np.ndarray:
    """``S_l(k, E, r, n) / (n^l (1 - F)^(-n))`` for n in ``n_range``.

    The sums come from the direct series (certified tail); the ratio is
    formed in log space so large n does not overflow.
    """
    E = float(E)
    if not 0 < E < 1:
        raise ValueError(f"asymptotic_ratio needs real E in (0, 1), got {E}")
    ns = list(n_range)
    if not ns:
        raise ValueError("n_range is empty")
    F = E ** (1.0 / k)
    out = np.empty(len(ns))
    for i, n in enumerate(ns):
        if l > 0 and n < 1:
            raise ValueError("n must be positive when l > 0")
        cw = chain_weights(k, E, r, n, rel_tol=tol, l=l)
        mant = float(np.sum(cw.q.astype(float) ** l * cw.w))
        out[i] = math.exp(math.log(mant) + cw.log_scale + n * math.log1p(-F) - l * math.log(max(n, 1)))
    return out
