"""Transport frequencies, the diagonal parallel transport and the monodromy.

The flat sections of the fibre bundle evolve chain by chain as
``U_t beta_{r,n}(0) = exp(i f_{r,n} t) beta_{r,n}(t)``, where ``f_{r,n}`` is the
mean of q under the chain weights ``C(r+kq+n, n) eps^(2q)``.

Frequencies grow linearly in n, so differences of neighbouring frequencies
lose all significant digits when formed naively.  :func:`frequency_gap`
returns ``f - asymptote`` directly from the subdominant roots of unity, and
the difference tables are assembled from gaps.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core_series import chain_weights, closed_condition, root_data, scaled_root_sums
from .frames import (
    COND_LIMIT,
    DEFAULT_TRUNC,
    ParameterError,
    TruncationSpec,
    _check_params,
    alpha_norm_sq,
    chain_coordinates,
    frame_time_derivative,
)

__all__ = [
    "FrequencyTable",
    "TransportDiagonal",
    "FrequencyDifferences",
    "frequency",
    "frequency_series",
    "frequency_asymptote",
    "frequency_gap",
    "frequency_table",
    "transport_apply",
    "monodromy_diagonal",
    "frequency_differences",
    "flatness_residual",
    "mod1_distance",
    "chain_F",
]


def chain_F(k: int, eps: float) -> float:
    """``F = eps^(2/k)``."""
    return float(eps) ** (2.0 / k)


def _ill_conditioned(rd, r: int, n: int) -> bool:
    return max(closed_condition(rd, r, n, 0), closed_condition(rd, r, n, 1)) > COND_LIMIT


def frequency(k: int, eps: float, r: int, n: int) -> float:
    """Transport frequency from the roots-of-unity closed form (0 at eps = 0).

    Falls back to the direct series where the closed form cancels (small eps).
    """
    _check_params(k, eps, r, n)
    if eps == 0:
        return 0.0
    rd = root_data(k, float(eps) ** 2)
    if _ill_conditioned(rd, r, n):
        return frequency_series(k, eps, r, n)
    s, _ = scaled_root_sums(rd, r, n, 1)
    F = rd.F.real
    return float(((-r * s[0] + F * (n + 1) * s[1]) / (k * s[0])).real)


def frequency_series(k: int, eps: float, r: int, n: int, rel_tol: float = 1e-17) -> float:
    """Transport frequency as a ratio of directly summed series."""
    _check_params(k, eps, r, n)
    if eps == 0:
        return 0.0
    return chain_weights(k, float(eps) ** 2, r, n, rel_tol=rel_tol, l=1).moment(1)


def frequency_asymptote(k: int, eps: float, r: int, n: int) -> float:
    """Large-n behaviour ``F n/(k(1-F)) + F/(k(1-F)) - r/k``."""
    _check_params(k, eps, r, n)
    F = chain_F(k, eps)
    c = F / (k * (1 - F))
    return c * n + c - r / k


def frequency_gap(k: int, eps: float, r: int, n: int) -> float:
    """``f_{r,n} - asymptote`` without cancellation.

    With ``s0 = a0^(-n-1)(1 + d0)`` and ``s1 = a0^(-n-2)(1 + d1)`` the closed
    form gives ``gap = F(n+1)(d1 - d0) / (k(1-F)(1+d0))``; the ``d`` carry
    only the roots j >= 1 and are evaluated to full relative precision.
    """
    _check_params(k, eps, r, n)
    if eps == 0:
        return r / k
    if k == 1:
        return 0.0
    rd = root_data(k, float(eps) ** 2)
    if _ill_conditioned(rd, r, n):
        # small eps: f and the asymptote are both small, no cancellation to avoid
        return frequency_series(k, eps, r, n) - frequency_asymptote(k, eps, r, n)
    F = rd.F.real
    ratio = rd.a[0] / rd.a[1:]
    d0 = np.sum(rd.zeta_pow(-r)[1:] * ratio ** (n + 1))
    d1 = np.sum(rd.zeta_pow(-r + 1)[1:] * ratio ** (n + 2))
    return float((F * (n + 1) * (d1 - d0) / (k * (1 - F) * (1 + d0))).real)


@dataclass(frozen=True)
class FrequencyTable:
    k: int
    epsilon: float
    values: dict

    def __getitem__(self, key):
        return self.values[key]


def frequency_table(k: int, eps: float, n_max: int) -> FrequencyTable:
    vals = {(r, n): frequency(k, eps, r, n) for n in range(n_max + 1) for r in range(k)}
    return FrequencyTable(k, float(eps), vals)


@dataclass(frozen=True)
class TransportDiagonal:
    t: float
    phases: dict

    def __getitem__(self, key):
        return self.phases[key]


def transport_apply(k: int, eps: float, t: float, v: Mapping[tuple[int, int], complex]) -> dict:
    """Apply ``U_t`` to chain coordinates; the result is in the ``beta(t)`` frame."""
    return {idx: c * cmath.exp(1j * frequency(k, eps, *idx) * t) for idx, c in v.items()}


def monodromy_diagonal(k: int, eps: float, n_max: int) -> TransportDiagonal:
    """Phases ``exp(2 pi i f_{r,n})`` of the monodromy for n <= n_max."""
    ph = {(r, n): cmath.exp(2j * math.pi * frequency(k, eps, r, n))
          for n in range(n_max + 1) for r in range(k)}
    return TransportDiagonal(2 * math.pi, ph)


@dataclass(frozen=True)
class FrequencyDifferences:
    """Neighbouring-frequency differences with wrap ``f_{-1,n} := f_{k-1,n}``.

    ``delta_n`` has no entry at n = 0.  Limits are the large-n values of the
    r- and n-differences; the r-limit holds modulo 1 at the wrap r = 0.
    """

    k: int
    epsilon: float
    delta_r: dict
    delta_n: dict
    limit_r: float
    limit_n: float


def frequency_differences(k: int, eps: float, n_max: int) -> FrequencyDifferences:
    if n_max < 2:
        raise ParameterError(f"n_max must be >= 2, got {n_max}")
    F = chain_F(k, eps)
    c = F / (k * (1 - F))
    gaps = {(r, n): frequency_gap(k, eps, r, n) for n in range(n_max + 1) for r in range(k)}
    dr, dn = {}, {}
    for n in range(n_max + 1):
        for r in range(k):
            if r == 0:
                # asymptote(0) - asymptote(k-1) = (k-1)/k
                dr[(r, n)] = (k - 1) / k + gaps[(0, n)] - gaps[(k - 1, n)]
            else:
                dr[(r, n)] = -1 / k + gaps[(r, n)] - gaps[(r - 1, n)]
            if n >= 1:
                dn[(r, n)] = c + gaps[(r, n)] - gaps[(r, n - 1)]
    return FrequencyDifferences(k, float(eps), dr, dn, -1 / k, c)


def mod1_distance(x: float, y: float) -> float:
    """Distance between x and y on the circle R/Z."""
    d = (x - y) % 1.0
    return min(d, 1.0 - d)


def flatness_residual(k: int, eps: float, t: float, r: int, n: int,
                      trunc: TruncationSpec = DEFAULT_TRUNC, section: str = "gamma") -> float:
    """Norm of the fibre projection of ``d/dt`` of a frame section.

    For ``section='gamma'`` this certifies the parallel frame is flat; with
    ``section='beta'`` it returns ``|f_{r,n}|`` up to truncation, the
    non-flat control.
    """
    if section not in ("gamma", "beta"):
        raise ParameterError(f"section must be 'gamma' or 'beta', got {section!r}")
    d_alpha = frame_time_derivative(k, eps, t, r, n, 1, trunc)
    a = frame_time_derivative(k, eps, t, r, n, 0,
                              TruncationSpec(q_max=d_alpha.q_max, tail_tol=trunc.tail_tol))
    inv_norm = 1.0 / math.sqrt(alpha_norm_sq(k, eps, r, n))
    if section == "gamma":
        f = frequency(k, eps, r, n)
        phase = cmath.exp(1j * f * t)
        coeffs = phase * inv_norm * (1j * f * a.coeffs + d_alpha.coeffs)
    else:
        coeffs = inv_norm * d_alpha.coeffs
    deriv = {(r + k * q, n): c for q, c in enumerate(coeffs)}
    coords = chain_coordinates(deriv, k, eps, t, trunc)
    return math.sqrt(sum(abs(c) ** 2 for c in coords.values()))
