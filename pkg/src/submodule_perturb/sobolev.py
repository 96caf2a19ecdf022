"""Besov-Sobolev weights and the smoothed projection family.

The projection ``P_t`` onto the fibre is not differentiable in operator norm
on H^2_2 (the Besov-Sobolev space of order s = -2).  Composed with the
inclusion into a smoother space of order ``s_target``, its matrix in the
standard orthonormal bases becomes Hilbert-Schmidt-differentiable.  This
module builds those matrices, accumulates their Hilbert-Schmidt norms chain
by chain, and measures the growth that rules out differentiability on H^2_2.

All chain quantities are expressed through the normalised chain weights
``p_q = C(r+kq+n, n) eps^(2q) / ||alpha_{r,n}||^2``, which keeps every
formula free of overflow for large n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import special, stats

from .core_series import binomial_weight, chain_weights, root_data
from .core_series import _closed_mantissa
from .frames import DEFAULT_TRUNC, ParameterError, TruncationSpec, _check_params
from .transport import frequency

__all__ = [
    "BranchError",
    "besov_weight",
    "besov_ratio",
    "smoothing_factor",
    "smoothing_order",
    "MixedProjectionMatrix",
    "projection_matrix",
    "hs_norm",
    "HSLadder",
    "hs_ladder",
    "nonsmooth_ratio",
    "SlopeFit",
    "fit_loglog",
    "taylor_remainder_check",
    "taylor_order",
]


class BranchError(ParameterError):
    """Order s <= -3 belongs to the hypergeometric branch, which is not implemented."""


def _check_s(s: float) -> None:
    if not s > -3:
        raise BranchError(f"Besov order s = {s} must exceed -3 (m = 2 branch)")


def _int_order(p: float) -> int | None:
    return int(p) if float(p).is_integer() else None


def besov_ratio(s: float, N):
    """``N! Gamma(s+3) / Gamma(N+s+3)``: the Besov weight relative to Drury-Arveson at degree N.

    ``N`` may be an integer array; the result then has the same shape.
    """
    _check_s(s)
    p = s + 2
    ip = _int_order(p)
    if ip is not None and ip >= 0:
        out = 1.0
        for i in range(1, ip + 1):
            out = out * (i / (N + i))
        return out
    out = special.gamma(s + 3) / special.poch(np.asarray(N, float) + 1, p)
    return float(out) if np.ndim(out) == 0 else out


def besov_weight(s: float, m: int, n: int, exact: bool = False):
    """``||z1^m z2^n||^2 = m! n! Gamma(s+3) / Gamma(m+n+s+3)`` in the order-s space.

    ``exact=True`` needs an integer s and returns a :class:`~fractions.Fraction`.
    """
    _check_s(s)
    if m < 0 or n < 0:
        raise ParameterError(f"indices must be nonnegative, got ({m}, {n})")
    if exact:
        ip = _int_order(s)
        if ip is None:
            raise ParameterError(f"exact Besov weights need an integer order, got s = {s}")
        return Fraction(
            math.factorial(m) * math.factorial(n) * math.factorial(ip + 2),
            math.factorial(m + n + ip + 2),
        )
    return binomial_weight(m, n) * besov_ratio(s, m + n)


def smoothing_factor(s_target: float, n: int) -> float:
    """``S(n) = p! n! / (n+p)!`` with ``p = s_target + 2`` (6 for s_target = 4)."""
    _check_s(s_target)
    if n < 0:
        raise ParameterError(f"n must be nonnegative, got {n}")
    return besov_ratio(s_target, n)


def smoothing_order(l: int, sigma: float) -> float:
    """Target order ``2l + 1 + sigma`` at which l derivatives are Hilbert-Schmidt."""
    if l < 0 or not sigma > 0:
        raise ParameterError(f"need l >= 0 and sigma > 0, got l={l}, sigma={sigma}")
    return 2 * l + 1 + sigma


def _chain_probs(k: int, eps: float, r: int, n: int, trim: float = 1e-30):
    """Normalised chain weights, trimmed to the numerically relevant window.

    Returns ``(q, p)`` with q the retained indices (always starting at 0 when
    eps = 0).
    """
    if eps == 0:
        return np.array([0]), np.array([1.0])
    cw = chain_weights(k, float(eps) ** 2, r, n, rel_tol=1e-20)
    p = cw.w / np.sum(cw.w)
    keep = p > trim * p.max()
    return cw.q[keep], p[keep]


@dataclass(frozen=True)
class MixedProjectionMatrix:
    """Matrix of the j-th t-derivative of ``P_t`` into the order-``s_target`` space.

    Columns are the orthonormal basis ``e_{m,n}`` of H^2_2, rows the
    orthonormal basis of the target space; ``entries[(row, col)]`` with both
    indices monomials ``(m, n)``.
    """

    k: int
    epsilon: float
    t: float
    s_target: float
    derivative_order: int
    n_max: int
    entries: dict = field(repr=False)

    def apply(self, v: dict) -> dict:
        out: dict = {}
        for (row, col), a in self.entries.items():
            c = v.get(col)
            if c:
                out[row] = out.get(row, 0) + a * c
        return out


def projection_matrix(k: int, eps: float, t: float, s_target: float, j: int,
                      trunc: TruncationSpec = DEFAULT_TRUNC) -> MixedProjectionMatrix:
    """Entries ``sqrt(p_Q p_q rho_q) (i(Q-q))^j e^{i(Q-q)t}`` for column m = kQ + r, row r + kq.

    ``rho_q`` is the ratio of the target Besov weight to the Drury-Arveson
    weight at the row monomial.  Columns with n <= ``trunc.n_max``; within a
    chain Q and q run over the window where the weights are numerically
    nonzero (or up to ``trunc.q_max`` when given).
    """
    _check_s(s_target)
    if j < 0:
        raise ParameterError(f"derivative order must be >= 0, got {j}")
    entries = {}
    for n in range(trunc.n_max + 1):
        for r in range(k):
            _check_params(k, eps, r, n)
            qs, p = _chain_probs(k, eps, r, n)
            if trunc.q_max is not None:
                sel = qs <= trunc.q_max
                qs, p = qs[sel], p[sel]
            rho = besov_ratio(s_target, r + k * qs + n)
            row_amp = np.sqrt(p * rho)
            col_amp = np.sqrt(p)
            for Q, ca in zip(qs, col_amp):
                x = Q - qs
                vals = ca * row_amp * (1j * x) ** j * np.exp(1j * x * t)
                col = (r + k * int(Q), n)
                for q, v in zip(qs, vals):
                    if v != 0:
                        entries[((r + k * int(q), n), col)] = complex(v)
    return MixedProjectionMatrix(k, float(eps), float(t), float(s_target), j, trunc.n_max, entries)


def hs_norm(matrix: MixedProjectionMatrix, n_cutoff: int | None = None) -> tuple[float, np.ndarray]:
    """Hilbert-Schmidt norm over columns with n <= n_cutoff, and the ladder of squared partial sums by n."""
    n_cut = matrix.n_max if n_cutoff is None else min(n_cutoff, matrix.n_max)
    inc = np.zeros(n_cut + 1)
    for (_, col), v in matrix.entries.items():
        if col[1] <= n_cut:
            inc[col[1]] += abs(v) ** 2
    ladder = np.cumsum(inc)
    return math.sqrt(ladder[-1]), ladder


@dataclass(frozen=True)
class HSLadder:
    """Squared Hilbert-Schmidt mass by column row n, and its partial sums."""

    n: np.ndarray
    increments: np.ndarray
    partial_sums: np.ndarray

    @property
    def norm(self) -> float:
        return math.sqrt(self.partial_sums[-1])

    def tail_after(self, n0: int) -> float:
        """Mass accumulated after row n0 within the computed window."""
        return float(self.partial_sums[-1] - self.partial_sums[n0])


def _central_moments(qs: np.ndarray, p: np.ndarray, order: int) -> tuple[float, np.ndarray]:
    mu = float(np.sum(qs * p))
    d = qs - mu
    return mu, np.array([float(np.sum(p * d**i)) for i in range(order + 1)])


def _chain_hs_sq(k: int, eps: float, r: int, n: int, s_target: float, j: int) -> float:
    """``sum_{Q,q} p_Q p_q rho_q (Q-q)^(2j)`` for one column chain.

    The inner sum over Q is a polynomial in q expanded around the chain mean,
    ``sum_i C(2j, i) c_i (mu - q)^(2j-i)`` with central moments ``c_i``.
    """
    qs, p = _chain_probs(k, eps, r, n)
    rho = besov_ratio(s_target, r + k * qs + n)
    if j == 0:
        return float(np.sum(p * rho))
    mu, c = _central_moments(qs, p, 2 * j)
    inner = np.zeros(len(qs))
    for i in range(2 * j + 1):
        inner += math.comb(2 * j, i) * c[i] * (mu - qs) ** (2 * j - i)
    return float(np.sum(p * rho * inner))


def hs_ladder(k: int, eps: float, s_target: float, j: int, n_cutoff: int) -> HSLadder:
    """Chain-wise Hilbert-Schmidt accounting of the j-th derivative matrix.

    Independent of t.  Increments are accumulated in index order.
    """
    _check_s(s_target)
    inc = np.array([
        sum(_chain_hs_sq(k, eps, r, n, s_target, j) for r in range(k))
        for n in range(n_cutoff + 1)
    ])
    return HSLadder(np.arange(n_cutoff + 1), inc, np.cumsum(inc))


def nonsmooth_ratio(k: int, eps: float, r: int, n: int, method: str = "central") -> float:
    """``||d/dt delta|| / ||delta||`` for the flat section ``delta = e^{ift} alpha_{r,n}``.

    ``method='central'`` sums ``(q - f)^2`` against the chain weights directly;
    ``method='long'`` combines the three closed-form terms
    ``f^2 - 2 f E[q] + E[q^2]``.
    """
    _check_params(k, eps, r, n)
    if eps == 0:
        return 0.0
    if method == "central":
        qs, p = _chain_probs(k, eps, r, n, trim=0.0)
        mu = float(np.sum(qs * p))
        return math.sqrt(float(np.sum(p * (qs - mu) ** 2)))
    if method == "long":
        rd = root_data(k, float(eps) ** 2)
        s0, l0 = _closed_mantissa(rd, r, n, 0)
        s1, l1 = _closed_mantissa(rd, r, n, 1)
        s2, l2 = _closed_mantissa(rd, r, n, 2)
        m1 = (s1 / s0).real * math.exp(l1 - l0)
        m2 = (s2 / s0).real * math.exp(l2 - l0)
        f = frequency(k, eps, r, n)
        return math.sqrt(max(f * f - 2 * f * m1 + m2, 0.0))
    raise ParameterError(f"method must be 'central' or 'long', got {method!r}")


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    stderr: float
    ci95: tuple[float, float]


def fit_loglog(x, y) -> SlopeFit:
    """Least-squares slope of log y against log x with a 95% confidence interval."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    res = stats.linregress(lx, ly)
    if len(lx) > 2:
        half = stats.t.ppf(0.975, len(lx) - 2) * res.stderr
    else:
        half = math.nan
    return SlopeFit(float(res.slope), float(res.intercept), float(res.stderr),
                    (float(res.slope - half), float(res.slope + half)))


def taylor_remainder_check(k: int, eps: float, t: float, h: float, s_target: float,
                           j: int = 1, trunc: TruncationSpec = DEFAULT_TRUNC) -> float:
    """HS norm of ``D^(j-1)P(t+h) - D^(j-1)P(t) - h D^j P(t)`` over n <= trunc.n_max.

    Entry moduli are ``sqrt(p_Q p_q rho_q) |x|^(j-1) |e^{ixh} - 1 - ixh|``
    with ``x = Q - q``; the remainder does not depend on t.
    """
    if h == 0:
        raise ParameterError("h must be nonzero")
    if j < 1:
        raise ParameterError(f"j must be >= 1, got {j}")
    _check_s(s_target)
    total = 0.0
    for n in range(trunc.n_max + 1):
        for r in range(k):
            _check_params(k, eps, r, n)
            qs, p = _chain_probs(k, eps, r, n)
            rho = besov_ratio(s_target, r + k * qs + n)
            x = (qs[:, None] - qs[None, :]).astype(float)
            y = x * h
            # e^{iy} - 1 - iy, with cos y - 1 written as -2 sin^2(y/2)
            rem_sq = (2 * np.sin(y / 2) ** 2) ** 2 + (np.sin(y) - y) ** 2
            amp = p[:, None] * (p * rho)[None, :] * np.abs(x) ** (2 * (j - 1))
            total += float(np.sum(amp * rem_sq))
    return math.sqrt(total)


def taylor_order(k: int, eps: float, t: float, hs, s_target: float, j: int = 1,
                 trunc: TruncationSpec = DEFAULT_TRUNC) -> tuple[float, list[float]]:
    """Observed order of the Taylor remainder over the step sizes ``hs``."""
    rem = [taylor_remainder_check(k, eps, t, h, s_target, j, trunc) for h in hs]
    return fit_loglog(np.abs(hs), rem).slope, rem
