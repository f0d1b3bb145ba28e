"""Binomial-Chebyshev expansion of ``P^n``, its truncation, and the Varopoulos-Carne check.

For a self-adjoint contraction ``P``,

    P^n = sum_k q_n(k) T_|k|(P),

with ``q_n`` the law of a simple random walk on Z after ``n`` steps. Since
``|T_k| <= 1`` on the spectrum and ``T_k(P)(x, y) = 0`` beyond graph distance
``k``, dropping the tail ``|k| > r`` costs at most the dropped mass, and the
Hoeffding tail bound gives ``P^n(x, y) <= 2 exp(-d(x, y)^2 / 2n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .cheb_engine import DENSE_CAP, cheb_sweep
from .graph_core import TransitionMatrix

VC_FLAG_WINDOW = 1e-9


@dataclass(frozen=True)
class LineWalkCoeffs:
    """Law ``q_n(k)`` of the n-step simple walk on Z, stored for ``k = -n..n``."""

    n: int
    probs: np.ndarray

    def __getitem__(self, k: int) -> float:
        if abs(k) > self.n:
            return 0.0
        return float(self.probs[k + self.n])

    @property
    def displacements(self) -> np.ndarray:
        return np.arange(-self.n, self.n + 1)

    def as_dict(self) -> dict[int, float]:
        return {int(k): float(p) for k, p in zip(self.displacements, self.probs) if p != 0.0}

    def folded(self) -> np.ndarray:
        """Weights ``c_j`` with ``sum_k q(k) T_|k| = sum_j c_j T_j``: ``c_0 = q(0)``, ``c_j = 2 q(j)``."""
        c = self.probs[self.n:].copy()
        c[1:] *= 2.0
        return c

    def tail_mass(self, radius: int) -> float:
        """``sum_{|k| > radius} q_n(k)``."""
        c = self.folded()
        return float(c[radius + 1:].sum()) if radius < self.n else 0.0


def line_walk_coeffs(n: int) -> LineWalkCoeffs:
    """Binomial probabilities by the averaging Pascal recurrence (no factorials)."""
    if int(n) != n or n < 0:
        raise ValueError(f"n must be a nonnegative integer, got {n!r}")
    n = int(n)
    row = np.ones(1)
    for _ in range(n):
        nxt = np.empty(row.size + 1)
        nxt[0] = 0.5 * row[0]
        nxt[-1] = 0.5 * row[-1]
        nxt[1:-1] = 0.5 * (row[:-1] + row[1:])
        row = nxt
    probs = np.zeros(2 * n + 1)
    probs[::2] = row  # k = -n, -n+2, ..., n sit at the even offsets
    return LineWalkCoeffs(n=n, probs=probs)


def hoeffding_radius(n: int, eps: float) -> float:
    """A-priori radius ``sqrt(2 n ln(2/eps))`` at which the Hoeffding tail drops below ``eps``."""
    return math.sqrt(2.0 * n * math.log(2.0 / eps))


def exact_power_apply(P: TransitionMatrix, v, n: int) -> np.ndarray:
    if int(n) != n or n < 0:
        raise ValueError(f"n must be a nonnegative integer, got {n!r}")
    out = np.array(v, dtype=np.float64)
    if out.shape[0] != P.n_vertices:
        raise ValueError("dimension mismatch")
    for _ in range(int(n)):
        out = P.entries @ out
    return out


def _weighted_cheb_sum(P: TransitionMatrix, v, weights: np.ndarray) -> np.ndarray:
    acc = None
    degree = len(weights) - 1
    for w, t in zip(weights, cheb_sweep(P, v, degree)):
        acc = w * t if acc is None else acc + w * t
    return acc


def cheb_binomial_apply(P: TransitionMatrix, v, n: int) -> np.ndarray:
    """Full expansion ``sum_k q_n(k) T_|k|(P) v``; equals ``P^n v`` exactly in exact arithmetic."""
    return _weighted_cheb_sum(P, v, line_walk_coeffs(n).folded())


def truncation_radius(n: int, eps: float, coeffs: Optional[LineWalkCoeffs] = None) -> int:
    """Smallest ``r`` with ``sum_{|k| > r} q_n(k) <= eps``, from the exact tail sums."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps!r}")
    c = (coeffs or line_walk_coeffs(n)).folded()
    # tails[r] = sum_{j > r} c_j
    tails = np.concatenate([np.cumsum(c[::-1])[::-1][1:], [0.0]])
    return int(np.flatnonzero(tails <= eps)[0])


def ff_approx_apply(P: TransitionMatrix, v, n: int, eps: float) -> tuple[np.ndarray, int]:
    """Truncated expansion of ``P^n v`` with error at most ``eps * |v|``.

    Returns the approximation and the radius ``r``; only ``r`` sparse products
    are spent instead of ``n``.
    """
    if np.shape(v)[0] != P.n_vertices:
        raise ValueError("dimension mismatch")
    coeffs = line_walk_coeffs(n)
    r = truncation_radius(n, eps, coeffs)
    return _weighted_cheb_sum(P, v, coeffs.folded()[: r + 1]), r


@dataclass(frozen=True)
class VCReport:
    """Worst slack of ``P^n(x, y) <= 2 exp(-d^2/2n)`` over all connected pairs.

    ``worst_margin >= 0`` means the bound holds. ``convention`` records which
    matrix was checked; ``flagged`` marks irregular graphs whose margin sits
    within ``VC_FLAG_WINDOW`` of zero.
    """

    worst_margin: float
    witness: tuple[int, int]
    n: int
    distance: int
    convention: str = "as-given"
    flagged: bool = False


def graph_distances(P: TransitionMatrix) -> np.ndarray:
    """All-pairs hop distances on the support of ``P``'s off-diagonal entries (inf across components)."""
    A = P.entries.copy()
    A.setdiag(0.0)
    A.eliminate_zeros()
    A.data[:] = 1.0
    return shortest_path(A, method="D", directed=False, unweighted=True)


def dense_power(P: TransitionMatrix, n: int, cap: int = DENSE_CAP) -> np.ndarray:
    if P.n_vertices > cap:
        raise ValueError(f"dense computation limited to {cap} vertices, got {P.n_vertices}")
    M = np.eye(P.n_vertices)
    for _ in range(n):
        M = P.entries @ M
    return np.asarray(M)


def vc_bound(distance, n: int):
    return 2.0 * np.exp(-np.asarray(distance, dtype=float) ** 2 / (2.0 * n))


def vc_check(P: TransitionMatrix, n: int, cap: int = DENSE_CAP) -> VCReport:
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    Pn = dense_power(P, n, cap)
    dist = graph_distances(P)
    finite = np.isfinite(dist)
    margin = np.where(finite, vc_bound(np.where(finite, dist, 0.0), n) - Pn, np.inf)
    flat = int(np.argmin(margin))
    x, y = divmod(flat, P.n_vertices)
    worst = float(margin[x, y])
    irregular = P.degrees is not None and np.unique(P.degrees).size > 1
    convention = "symmetric-normalized" if P.degrees is not None else "as-given"
    return VCReport(
        worst_margin=worst,
        witness=(x, y),
        n=n,
        distance=int(dist[x, y]),
        convention=convention,
        flagged=bool(irregular and abs(worst) <= VC_FLAG_WINDOW),
    )
