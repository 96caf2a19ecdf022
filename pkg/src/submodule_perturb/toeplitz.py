"""Compressed coordinate multipliers on the fibre, in the beta basis.

``T1`` and ``T2`` are multiplication by ``z1`` and ``z2`` followed by the
orthogonal projection onto the fibre.  In the beta basis both are weighted
shifts along the chain lattice: ``T1`` moves ``(r, n) -> (r+1, n)`` and wraps
``(k-1, n) -> (0, n)``; ``T2`` moves ``(r, n) -> (r, n+1)``.

:func:`toeplitz_matrix` is the ground truth.  Its entries are raw H^2_2
inner products of coefficient tables; no closed form enters.  The
roots-of-unity weights of :func:`shift_weight` are checked against it.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core_series import closed_condition, root_data
from .frames import (
    COND_LIMIT,
    DEFAULT_TRUNC,
    FrameVector,
    ParameterError,
    TruncationSpec,
    _chain_omegas,
    _check_params,
    alpha_norm_sq,
    beta,
    chain_index_set,
)
from .transport import frequency, frequency_gap, monodromy_diagonal

__all__ = [
    "OPERATORS",
    "ChainOperatorMatrix",
    "toeplitz_matrix",
    "matrix_entry",
    "shift_weight",
    "shift_weight_norm_ratio",
    "shift_target",
    "conjugation_residual",
    "ConjugationResidual",
    "compactness_profile",
    "limit_phase",
]

OPERATORS = ("T1", "T1adj", "T2", "T2adj")


def _check_op(op: str) -> None:
    if op not in OPERATORS:
        raise ParameterError(f"unknown operator {op!r}; expected one of {OPERATORS}")


def shift_target(k: int, op: str, r: int, n: int) -> tuple[int, int] | None:
    """Chain index that ``op`` sends ``beta_{r,n}`` to (None when it is killed)."""
    _check_op(op)
    if op == "T1":
        return ((r + 1) % k, n)
    if op == "T1adj":
        return ((r - 1) % k, n)
    if op == "T2":
        return (r, n + 1)
    return (r, n - 1) if n >= 1 else None


def _is_wrap(k: int, op: str, r: int) -> bool:
    return (op == "T1" and r == k - 1) or (op == "T1adj" and r == 0)


@dataclass(frozen=True)
class ChainOperatorMatrix:
    """Sparse matrix ``entries[(row, col)] = <T beta_col, beta_row>`` on n <= n_max."""

    k: int
    epsilon: float
    t: float
    op: str
    n_max: int
    entries: dict

    def index(self) -> list[tuple[int, int]]:
        return chain_index_set(self.k, self.n_max)

    def to_dense(self) -> np.ndarray:
        idx = {a: i for i, a in enumerate(self.index())}
        A = np.zeros((len(idx), len(idx)), dtype=complex)
        for (row, col), v in self.entries.items():
            A[idx[row], idx[col]] = v
        return A

    def adjoint_entries(self) -> dict:
        return {(col, row): complex(np.conj(v)) for (row, col), v in self.entries.items()}

    def rows(self):
        """Coordinate-format rows ``(row_r, row_n, col_r, col_n, re, im)`` in index order."""
        for (row, col) in sorted(self.entries, key=lambda rc: (rc[1][1], rc[1][0], rc[0][1], rc[0][0])):
            v = self.entries[(row, col)]
            yield (row[0], row[1], col[0], col[1], float(v.real), float(v.imag))

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "epsilon": self.epsilon,
            "t": self.t,
            "op": self.op,
            "n_max": self.n_max,
            "entries": [list(row) for row in self.rows()],
        }


def _shift_inner(src: FrameVector, dst: FrameVector, variable: int) -> complex:
    """``<z_variable * src, dst>`` for frame vectors on adjacent chains.

    Multiplying by z1 sends the monomial of ``src`` at q to ``dst``'s monomial
    at q (same residue class moved up) or at q+1 (wrap k-1 -> 0); by z2 it
    keeps q and raises n.
    """
    k = src.k
    if variable == 1:
        offset = 1 if src.r == k - 1 else 0
        if dst.chain != ((src.r + 1) % k, src.n):
            return 0j
    else:
        offset = 0
        if dst.chain != (src.r, src.n + 1):
            return 0j
    nq = min(src.q_max, dst.q_max - offset) + 1
    if nq <= 0:
        return 0j
    w = _chain_omegas(k, dst.r, dst.n, dst.q_max)[offset: offset + nq]
    return complex(np.sum(src.coeffs[:nq] * np.conj(dst.coeffs[offset: offset + nq]) * w))


def toeplitz_matrix(k: int, eps: float, t: float, op: str,
                    trunc: TruncationSpec = DEFAULT_TRUNC) -> ChainOperatorMatrix:
    """Inner-product matrix of ``op`` on the window ``n <= trunc.n_max``.

    Targets leaving the window (``T2`` from the top row) are dropped.
    """
    _check_op(op)
    if trunc.n_max < 0:
        raise ParameterError("truncation window is empty")
    frames = {idx: beta(k, eps, t, *idx, trunc) for idx in chain_index_set(k, trunc.n_max)}
    entries = {}
    for col, fcol in frames.items():
        row = shift_target(k, op, *col)
        if row is None or row not in frames:
            continue
        frow = frames[row]
        if op == "T1":
            v = _shift_inner(fcol, frow, 1)
        elif op == "T2":
            v = _shift_inner(fcol, frow, 2)
        elif op == "T1adj":
            v = complex(np.conj(_shift_inner(frow, fcol, 1)))
        else:
            v = complex(np.conj(_shift_inner(frow, fcol, 2)))
        entries[(row, col)] = v
    return ChainOperatorMatrix(k, float(eps), float(t), op, trunc.n_max, entries)


def matrix_entry(k: int, eps: float, t: float, op: str, r: int, n: int,
                 trunc: TruncationSpec = DEFAULT_TRUNC) -> complex:
    """Single entry ``<op beta_{r,n}, beta_target>`` by raw inner product (0 when killed)."""
    _check_op(op)
    _check_params(k, eps, r, n)
    row = shift_target(k, op, r, n)
    if row is None:
        return 0j
    fcol, frow = beta(k, eps, t, r, n, trunc), beta(k, eps, t, *row, trunc)
    if op in ("T1", "T2"):
        return _shift_inner(fcol, frow, 1 if op == "T1" else 2)
    return complex(np.conj(_shift_inner(frow, fcol, 1 if op == "T1adj" else 2)))


def _log_root_sum(rd, p: int, e: int) -> tuple[complex, float]:
    """``sum_j zeta_j^p a_j^(-e)`` as (mantissa, log scale)."""
    amin = float(np.abs(rd.a).min())
    mant = complex(np.sum(rd.zeta_pow(p) * (amin / rd.a) ** e))
    return mant, -e * math.log(amin)


def _root_ratio(rd, p1: int, e1: int, p2: int, e2: int) -> float:
    m1, l1 = _log_root_sum(rd, p1, e1)
    m2, l2 = _log_root_sum(rd, p2, e2)
    return (m1 / m2).real * math.exp(l1 - l2)


def shift_weight(k: int, eps: float, op: str, r: int, n: int) -> float:
    """Weight of the weighted shift ``op`` at ``beta_{r,n}`` (t = 0 basis).

    Roots-of-unity closed forms for eps > 0; the norm-ratio form at eps = 0,
    where the closed forms divide by zero, and for small eps, where they cancel.
    """
    _check_op(op)
    _check_params(k, eps, r, n)
    if eps == 0:
        return shift_weight_norm_ratio(k, eps, op, r, n)
    if op == "T2adj" and n == 0:
        return 0.0
    rd = root_data(k, float(eps) ** 2)
    if any(closed_condition(rd, rr % k, nn, 0) > COND_LIMIT
           for rr in (r - 1, r, r + 1) for nn in (max(n - 1, 0), n, n + 1)):
        return shift_weight_norm_ratio(k, eps, op, r, n)
    F = rd.F.real
    if op == "T1":
        return math.sqrt(F * _root_ratio(rd, -r, n + 1, -r - 1, n + 1))
    if op == "T1adj":
        return math.sqrt(F * _root_ratio(rd, -r + 1, n + 1, -r, n + 1))
    if op == "T2":
        return math.sqrt(_root_ratio(rd, -r, n + 1, -r, n + 2))
    return math.sqrt(_root_ratio(rd, -r, n, -r, n + 1))


def shift_weight_norm_ratio(k: int, eps: float, op: str, r: int, n: int) -> float:
    """Same weights from ``||alpha||`` ratios; eps enters explicitly at the T1 wrap."""
    _check_op(op)
    nrm = lambda rr, nn: math.sqrt(alpha_norm_sq(k, eps, rr, nn))  # noqa: E731
    if op == "T1":
        if r == k - 1:
            return eps * nrm(r, n) / nrm(0, n)
        return nrm(r, n) / nrm(r + 1, n)
    if op == "T1adj":
        if r == 0:
            return eps * nrm(k - 1, n) / nrm(0, n)
        return nrm(r - 1, n) / nrm(r, n)
    if op == "T2":
        return nrm(r, n) / nrm(r, n + 1)
    return nrm(r, n - 1) / nrm(r, n) if n >= 1 else 0.0


@dataclass(frozen=True)
class ConjugationResidual:
    deviations: dict
    max_interior: float
    max_wrap: float


def conjugation_residual(k: int, eps: float, op: str,
                         trunc: TruncationSpec = DEFAULT_TRUNC) -> ConjugationResidual:
    """Entrywise ``|U* T U - phase T|`` at t = 0 with U the monodromy.

    ``U* T U`` is formed as a matrix product with the monodromy diagonal; the
    predicted phase ``exp(2 pi i (f_col - f_row))`` uses the wrap conventions
    ``f_{k,n} := f_{0,n}`` and ``f_{-1,n} := f_{k-1,n}``.
    """
    T = toeplitz_matrix(k, eps, 0.0, op, trunc)
    idx = T.index()
    mono = monodromy_diagonal(k, eps, trunc.n_max)
    u = np.array([mono[a] for a in idx])
    A = T.to_dense()
    conj = np.conj(u)[:, None] * A * u[None, :]
    pos = {a: i for i, a in enumerate(idx)}
    dev, mi, mw = {}, 0.0, 0.0
    for (row, col), v in T.entries.items():
        ph = cmath.exp(2j * math.pi * (frequency(k, eps, *col) - frequency(k, eps, *row)))
        d = abs(conj[pos[row], pos[col]] - ph * v)
        dev[(row, col)] = d
        if _is_wrap(k, op, col[0]):
            mw = max(mw, d)
        else:
            mi = max(mi, d)
    return ConjugationResidual(dev, mi, mw)


def limit_phase(k: int, eps: float, op: str) -> complex:
    """Phase by which ``U* T U`` differs from ``T`` modulo compacts."""
    _check_op(op)
    F = float(eps) ** (2.0 / k)
    c = F / (k * (1 - F))
    return {
        "T1": cmath.exp(2j * math.pi / k),
        "T1adj": cmath.exp(-2j * math.pi / k),
        "T2": cmath.exp(-2j * math.pi * c),
        "T2adj": cmath.exp(2j * math.pi * c),
    }[op]


def _phase_offset(k: int, eps: float, op: str, r: int, n: int) -> float:
    """Exponent of the conjugation phase minus its limit, modulo 1.

    The linear parts of neighbouring frequencies differ by exactly the limit
    exponent (mod 1), so only the gaps ``f - asymptote`` remain.
    """
    g = lambda rr, nn: frequency_gap(k, eps, rr, nn)  # noqa: E731
    F = float(eps) ** (2.0 / k)
    c = F / (k * (1 - F)) if eps else 0.0
    if op == "T1":
        lin = (1 / k if r < k - 1 else -(k - 1) / k) - 1 / k
        return lin + g(r, n) - g((r + 1) % k, n)
    if op == "T1adj":
        lin = (-1 / k if r > 0 else (k - 1) / k) + 1 / k
        return lin + g(r, n) - g((r - 1) % k, n)
    if op == "T2":
        return g(r, n) - g(r, n + 1)
    return g(r, n) - g(r, n - 1)


def compactness_profile(k: int, eps: float, op: str, n_max: int) -> np.ndarray:
    """``d(n) = max_r |phase(r, n) - limit phase| * |weight(r, n)|`` for n = 0..n_max.

    ``|e^{2 pi i x} - e^{2 pi i y}| = 2 |sin(pi (x - y))|`` is evaluated on
    the cancellation-free offset, so the profile keeps relative precision as
    it decays.
    """
    _check_op(op)
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    out = np.zeros(n_max + 1)
    for n in range(n_max + 1):
        best = 0.0
        for r in range(k):
            if op == "T2adj" and n == 0:
                continue
            off = _phase_offset(k, eps, op, r, n)
            off -= round(off)
            best = max(best, 2 * abs(math.sin(math.pi * off)) * shift_weight(k, eps, op, r, n))
        out[n] = best
    return out
