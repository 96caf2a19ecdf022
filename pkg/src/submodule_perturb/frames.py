"""Frames of the fibre ``<z1^k - eps e^{it}>^perp`` as truncated coefficient tables.

A frame element lives on a single chain of monomials ``z1^(r+kq) z2^n``,
q = 0, 1, ..., so it is stored as one coefficient per q plus the chain
header ``(k, r, n)``.  Inner products use the Drury-Arveson monomial norms
``||z1^m z2^n||^2 = 1/C(m+n, m)``; vectors on different chains are
orthogonal without any arithmetic.

Generic vectors in monomial coordinates are plain ``dict`` objects
mapping ``(m, n)`` to a complex coefficient.

The base circle is taken with period 2 pi throughout.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

import numpy as np

from .core_series import (
    binomial_weight,
    chain_weights,
    closed_condition,
    closed_sum,
    root_data,
    series_sum,
)

# closed forms losing more than about three digits are replaced by direct sums
COND_LIMIT = 1e3

__all__ = [
    "ParameterError",
    "TruncationSpec",
    "FrameVector",
    "alpha",
    "alpha_norm_sq",
    "beta",
    "gamma",
    "frame_time_derivative",
    "h2_inner",
    "h2_norm_sq",
    "gram",
    "membership_residual",
    "chain_coordinates",
    "synthesize",
    "chain_index_set",
]


class ParameterError(ValueError):
    """Invalid model parameters (eps outside [0, 1), chain index outside J, ...)."""


@dataclass(frozen=True)
class TruncationSpec:
    """Finite-approximation controls shared by every module.

    ``q_max`` fixes the number of chain terms; otherwise it is chosen per
    chain so that the discarded squared norm of a unit frame vector is below
    ``tail_tol**2``.  ``backend='exact'`` switches frame coefficients to
    :class:`~fractions.Fraction` (rational eps, t = 0 only).
    """

    q_max: int | None = None
    tail_tol: float = 1e-14
    n_max: int = 20
    m_max: int | None = None
    backend: str = "float"

    def __post_init__(self):
        if self.q_max is not None and self.q_max < 0:
            raise ParameterError(f"q_max must be >= 0, got {self.q_max}")
        if not self.tail_tol > 0:
            raise ParameterError(f"tail_tol must be positive, got {self.tail_tol}")
        if self.n_max < 0:
            raise ParameterError(f"n_max must be >= 0, got {self.n_max}")
        if self.backend not in ("float", "exact"):
            raise ParameterError(f"backend must be 'float' or 'exact', got {self.backend!r}")

    @property
    def exact(self) -> bool:
        return self.backend == "exact"


DEFAULT_TRUNC = TruncationSpec()


@dataclass(frozen=True)
class FrameVector:
    """One frame element (or a time derivative of one) on the chain ``(r, n)``.

    ``coeffs[q]`` is the coefficient of ``z1^(r+kq) z2^n``.  ``tail_bound``
    bounds the H^2_2 norm of the omitted part of the (infinite) vector.
    """

    k: int
    epsilon: float | Fraction
    t: float
    r: int
    n: int
    kind: str
    coeffs: np.ndarray | tuple
    tail_bound: float
    order: int = 0
    trunc: TruncationSpec = field(default=DEFAULT_TRUNC, compare=False, repr=False)

    @property
    def q_max(self) -> int:
        return len(self.coeffs) - 1

    @property
    def chain(self) -> tuple[int, int]:
        return (self.r, self.n)

    def monomial(self, q: int) -> tuple[int, int]:
        return (self.r + self.k * q, self.n)

    def items(self) -> Iterator[tuple[tuple[int, int], complex]]:
        for q, c in enumerate(self.coeffs):
            yield self.monomial(q), c

    def to_dict(self) -> dict:
        return dict(self.items())

    def weights(self) -> np.ndarray | tuple:
        """Monomial norms ``omega_{r+kq, n}`` along the stored chain."""
        return _chain_omegas(self.k, self.r, self.n, self.q_max, exact=self.trunc.exact)

    def norm_sq(self):
        return h2_inner(self, self)

    def to_json(self) -> dict:
        if self.trunc.exact:
            coeffs = [[m, n, str(Fraction(c)), "0"] for (m, n), c in self.items()]
            tail = float(self.tail_bound)
            eps = str(self.epsilon)
        else:
            coeffs = [[m, n, float(np.real(c)), float(np.imag(c))] for (m, n), c in self.items()]
            tail = float(self.tail_bound)
            eps = float(self.epsilon)
        return {
            "k": self.k,
            "epsilon": eps,
            "t": float(self.t),
            "r": self.r,
            "n": self.n,
            "kind": self.kind,
            "order": self.order,
            "q_max": self.q_max,
            "coeffs": coeffs,
            "tail_bound": tail,
        }


def _check_params(k: int, eps, r: int, n: int) -> None:
    if k < 1:
        raise ParameterError(f"k must be a positive integer, got {k}")
    if not 0 <= eps < 1:
        raise ParameterError(f"epsilon must lie in [0, 1), got {eps}")
    if not 0 <= r < k or n < 0:
        raise ParameterError(f"(r, n) = ({r}, {n}) is not in J for k = {k}")


def _chain_omegas(k: int, r: int, n: int, q_max: int, exact: bool = False):
    if exact:
        return tuple(Fraction(1, math.comb(r + k * q + n, n)) for q in range(q_max + 1))
    m = r + k * np.arange(q_max + 1)
    # 1/C(m+n, n) = prod_{i=1..n} i / (m + i), vectorised over m
    w = np.ones(q_max + 1)
    for i in range(1, n + 1):
        w *= i / (m + i)
    return w


def _inv_omegas(k: int, r: int, n: int, q_max: int) -> np.ndarray:
    """``C(r+kq+n, n)`` for q = 0..q_max by the multiplicative recurrence."""
    out = np.empty(q_max + 1)
    c = float(math.comb(r + n, n))
    for q in range(q_max + 1):
        out[q] = c
        m = r + k * q
        for i in range(1, k + 1):
            c *= (m + n + i) / (m + i)
    if not np.all(np.isfinite(out)):
        raise OverflowError(f"chain ({r}, {n}) coefficients overflow double precision")
    return out


def _resolve_qmax(k: int, eps, r: int, n: int, trunc: TruncationSpec, l: int = 0) -> tuple[int, float]:
    """Number of chain terms and the relative squared-norm tail they leave out."""
    if trunc.q_max is not None:
        q_max = trunc.q_max
        if float(eps) == 0:
            return q_max, 0.0
        cw = chain_weights(k, float(eps) ** 2, r, n, rel_tol=trunc.tail_tol**2, l=2 * l)
        if q_max >= len(cw.w) - 1:
            return q_max, cw.rel_tail
        rest = float(np.sum(cw.w[q_max + 1:] * cw.q[q_max + 1:] ** (2 * l)))
        head = float(np.sum(cw.w * cw.q ** (2 * l)) - rest)
        return q_max, (rest / head if head > 0 else math.inf) + cw.rel_tail
    if float(eps) == 0:
        return 0, 0.0
    cw = chain_weights(k, float(eps) ** 2, r, n, rel_tol=trunc.tail_tol**2, l=2 * l)
    return len(cw.w) - 1, cw.rel_tail


def alpha(k: int, eps, t: float, r: int, n: int, trunc: TruncationSpec = DEFAULT_TRUNC) -> FrameVector:
    """Orthogonal frame element ``sum_q C(r+kq+n, n) eps^q e^{-iqt} z1^(r+kq) z2^n``."""
    return frame_time_derivative(k, eps, t, r, n, 0, trunc)


def frame_time_derivative(k: int, eps, t: float, r: int, n: int, l: int,
                          trunc: TruncationSpec = DEFAULT_TRUNC) -> FrameVector:
    """Termwise ``d^l alpha_{r,n} / dt^l``; coefficient q picks up ``(-iq)^l``."""
    _check_params(k, eps, r, n)
    if l < 0:
        raise ParameterError(f"derivative order must be >= 0, got {l}")
    q_max, rel_tail = _resolve_qmax(k, eps, r, n, trunc, l)
    if trunc.exact:
        if t != 0 or l != 0:
            raise ParameterError("the exact backend supports only t = 0 and l = 0")
        eps = Fraction(eps)
        coeffs = tuple(math.comb(r + k * q + n, n) * eps**q for q in range(q_max + 1))
        if eps:
            # omitted mass = full series minus stored partial mass; the series
            # certificate bounds the part the exact partial sum itself misses
            full = series_sum(k, eps**2, r, n, 0, tol=Fraction(1, 10**30))
            stored = sum(c * c * w for c, w in zip(coeffs, _chain_omegas(k, r, n, q_max, exact=True)))
            tail = math.sqrt(float(max(full.value - stored, Fraction(0)) + full.tail_bound))
        else:
            tail = 0.0
        return FrameVector(k, eps, 0.0, r, n, "alpha", coeffs, tail, 0, trunc)
    eps = float(eps)
    q = np.arange(q_max + 1)
    coeffs = _inv_omegas(k, r, n, q_max) * eps**q * np.exp(-1j * q * t)
    if l:
        coeffs = coeffs * (-1j * q) ** l
    mass = float(np.sum(np.abs(coeffs) ** 2 * _chain_omegas(k, r, n, q_max)))
    tail = math.sqrt(rel_tail * mass) if math.isfinite(rel_tail) else math.inf
    kind = "alpha" if l == 0 else f"d{l}alpha"
    return FrameVector(k, eps, float(t), r, n, kind, coeffs, tail, l, trunc)


def alpha_norm_sq(k: int, eps, r: int, n: int) -> float:
    """``||alpha_{r,n}||^2 = sum_q C(r+kq+n, n) eps^(2q)`` by the roots-of-unity closed form.

    Independent of t.  At eps = 0 the closed form is singular and the single
    surviving term ``C(r+n, n)`` is returned; for small eps, where the roots
    of unity cancel, the (then rapidly convergent) series is summed instead.
    """
    _check_params(k, eps, r, n)
    if eps == 0:
        return float(math.comb(r + n, n))
    E = float(eps) ** 2
    if closed_condition(root_data(k, E), r, n, 0) > COND_LIMIT:
        return series_sum(k, E, r, n, 0, tol=1e-17).value.real
    return closed_sum(k, E, r, n, 0).real


def beta(k: int, eps, t: float, r: int, n: int, trunc: TruncationSpec = DEFAULT_TRUNC) -> FrameVector:
    """Orthonormal frame element ``alpha / ||alpha||``."""
    if trunc.exact:
        raise ParameterError("beta has irrational normalisation; use the float backend")
    a = alpha(k, eps, t, r, n, trunc)
    s = 1.0 / math.sqrt(alpha_norm_sq(k, eps, r, n))
    return FrameVector(k, a.epsilon, a.t, r, n, "beta", a.coeffs * s, a.tail_bound * s, 0, trunc)


def gamma(k: int, eps, t: float, r: int, n: int, trunc: TruncationSpec = DEFAULT_TRUNC,
          frequency: float | None = None) -> FrameVector:
    """Parallel frame element ``e^{i f_{r,n} t} beta_{r,n}(t)``."""
    if frequency is None:
        from .transport import frequency as _freq

        frequency = _freq(k, eps, r, n)
    b = beta(k, eps, t, r, n, trunc)
    ph = cmath.exp(1j * frequency * t)
    return FrameVector(k, b.epsilon, b.t, r, n, "gamma", b.coeffs * ph, b.tail_bound, 0, trunc)


def _items(v) -> Iterable[tuple[tuple[int, int], complex]]:
    return v.items() if isinstance(v, (FrameVector, Mapping)) else v


def h2_inner(u, v):
    """Drury-Arveson inner product ``<u, v>`` (linear in u).

    Accepts :class:`FrameVector` objects or monomial dictionaries.  Two frame
    vectors on different chains of the same k share no monomial and give an
    exact zero.
    """
    if isinstance(u, FrameVector) and isinstance(v, FrameVector) and u.k == v.k:
        if u.chain != v.chain:
            return 0.0
        qm = min(u.q_max, v.q_max)
        exact = u.trunc.exact and v.trunc.exact
        w = _chain_omegas(u.k, u.r, u.n, qm, exact=exact)
        if exact:
            return sum(a * b * c for a, b, c in zip(u.coeffs, v.coeffs, w))
        return complex(np.sum(u.coeffs[: qm + 1] * np.conj(v.coeffs[: qm + 1]) * w))
    vd = v.to_dict() if isinstance(v, FrameVector) else dict(v)
    total = 0
    for mono, c in _items(u):
        d = vd.get(mono)
        if d is None:
            continue
        m, n = mono
        if isinstance(c, Fraction) and isinstance(d, Fraction):
            total += c * d * binomial_weight(m, n, exact=True)
        else:
            total += c * np.conj(d) * binomial_weight(m, n)
    return total


def h2_norm_sq(v) -> float:
    return float(np.real(h2_inner(v, v)))


def chain_index_set(k: int, n_max: int) -> list[tuple[int, int]]:
    """All ``(r, n)`` in J with ``n <= n_max``, ordered by n then r."""
    return [(r, n) for n in range(n_max + 1) for r in range(k)]


def gram(k: int, eps, t: float, index_set: Iterable[tuple[int, int]],
         trunc: TruncationSpec = DEFAULT_TRUNC) -> np.ndarray:
    """Matrix of ``<beta_a, beta_b>`` over ``index_set`` (rows a, columns b)."""
    idx = list(index_set)
    frames = [beta(k, eps, t, r, n, trunc) for r, n in idx]
    G = np.zeros((len(idx), len(idx)), dtype=complex)
    for i, fa in enumerate(frames):
        for j in range(i, len(idx)):
            G[i, j] = h2_inner(fa, frames[j])
            G[j, i] = np.conj(G[i, j])
    return G


def membership_residual(k: int, eps, t: float, r: int, n: int, M: int, N: int,
                        trunc: TruncationSpec = DEFAULT_TRUNC):
    """``<alpha_{r,n}, z1^M z2^N (z1^k - eps e^{it})>`` from the stored coefficients.

    Vanishes exactly when both touched monomials lie inside the truncation;
    otherwise its modulus is at most the recorded tail bound.
    """
    if M < 0 or N < 0:
        raise ParameterError(f"(M, N) must be nonnegative, got ({M}, {N})")
    a = alpha(k, eps, t, r, n, trunc)
    if trunc.exact:
        generator = {(M + k, N): Fraction(1), (M, N): -Fraction(eps)}
    else:
        generator = {(M + k, N): 1.0 + 0j, (M, N): -float(eps) * cmath.exp(1j * t)}
    return h2_inner(a, generator)


def _beta_covering(k: int, eps, t: float, r: int, n: int, q_need: int, trunc: TruncationSpec) -> FrameVector:
    b = beta(k, eps, t, r, n, trunc)
    if b.q_max >= q_need or float(eps) == 0:
        return b
    wider = TruncationSpec(q_max=q_need, tail_tol=trunc.tail_tol, n_max=trunc.n_max,
                           m_max=trunc.m_max, backend=trunc.backend)
    return beta(k, eps, t, r, n, wider)


def chain_coordinates(v: Mapping[tuple[int, int], complex], k: int, eps, t: float,
                      trunc: TruncationSpec = DEFAULT_TRUNC) -> dict[tuple[int, int], complex]:
    """Coordinates ``<v, beta_{r,n}(t)>`` for every chain meeting the support of ``v``."""
    by_chain: dict[tuple[int, int], dict] = {}
    for (m, n), c in _items(v):
        by_chain.setdefault((m % k, n), {})[(m, n)] = c
    out = {}
    for (r, n) in sorted(by_chain):
        part = by_chain[(r, n)]
        q_need = max((m - r) // k for m, _ in part)
        b = _beta_covering(k, eps, t, r, n, q_need, trunc)
        out[(r, n)] = complex(h2_inner(part, b))
    return out


def synthesize(coords: Mapping[tuple[int, int], complex], k: int, eps, t: float,
               trunc: TruncationSpec = DEFAULT_TRUNC) -> dict[tuple[int, int], complex]:
    """Monomial coefficients of ``sum a_{r,n} beta_{r,n}(t)``."""
    out: dict[tuple[int, int], complex] = {}
    for (r, n), a in coords.items():
        if a == 0:
            continue
        for mono, c in beta(k, eps, t, r, n, trunc).items():
            out[mono] = out.get(mono, 0) + a * c
    return out
