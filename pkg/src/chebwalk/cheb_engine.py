"""Chebyshev polynomials of a transition matrix and the discrete wave equation.

The sparse path only ever applies ``P``: ``T_n(P) v`` and ``U_n(P) v`` come
from the three-term recurrence ``p_{k+1} = 2 P p_k - p_{k-1}`` with three
rolling vectors. The square root ``sqrt(I - P^2)`` is only formed by the
dense oracles, which exist for cross-checking on small instances.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Iterator

import numpy as np

from .graph_core import TransitionMatrix, matvec

DENSE_CAP = 400
EIGEN_CLAMP = 1e-9
ENERGY_CLAMP = 1e-12


@dataclass(frozen=True)
class WavePair:
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if np.shape(self.u) != np.shape(self.v):
            raise ValueError("u and v must have matching dimensions")


@dataclass(frozen=True)
class DenseDilation:
    """Dense propagator ``U = [[P, S], [-S, P]]`` with ``S = sqrt(I - P^2)``."""

    U: np.ndarray
    sqrt_block: np.ndarray

    @property
    def n_vertices(self) -> int:
        return self.sqrt_block.shape[0]

    def power(self, n: int) -> np.ndarray:
        return np.linalg.matrix_power(self.U, n)

    def blocks(self, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Top-left, top-right, bottom-left, bottom-right blocks of ``U^n``."""
        N = self.n_vertices
        Un = self.power(n)
        return Un[:N, :N], Un[:N, N:], Un[N:, :N], Un[N:, N:]


def _as_vector(P: TransitionMatrix, v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim not in (1, 2) or v.shape[0] != P.n_vertices:
        raise ValueError(f"dimension mismatch: matrix has {P.n_vertices} vertices, vector shape {v.shape}")
    return v


def _check_degree(n) -> int:
    if int(n) != n or n < 0:
        raise ValueError(f"degree must be a nonnegative integer, got {n!r}")
    return int(n)


def cheb_sweep(P: TransitionMatrix, v, n: int, first: float = 1.0) -> Iterator[np.ndarray]:
    """Yield ``p_0(P)v, ..., p_n(P)v`` for the family with ``p_0 = 1``, ``p_1 = first * x``.

    ``first=1`` gives the first kind ``T_k``, ``first=2`` the second kind ``U_k``.
    Exactly ``n`` sparse products are performed.
    """
    v = _as_vector(P, v)
    n = _check_degree(n)
    A = P.entries
    prev = v.copy()
    yield prev
    if n == 0:
        return
    cur = first * (A @ v)
    yield cur
    for _ in range(n - 1):
        nxt = 2.0 * (A @ cur)
        nxt -= prev
        prev, cur = cur, nxt
        yield cur


def cheb_T_apply(P: TransitionMatrix, v, n: int) -> np.ndarray:
    """``T_n(P) v`` by the first-kind recurrence."""
    out = None
    for out in cheb_sweep(P, v, n, first=1.0):
        pass
    return out


def cheb_U_apply(P: TransitionMatrix, v, n: int) -> np.ndarray:
    """``U_n(P) v`` by the second-kind recurrence (``U_0 = 1``, ``U_1 = 2x``)."""
    out = None
    for out in cheb_sweep(P, v, n, first=2.0):
        pass
    return out


def wave_step(P: TransitionMatrix, state: WavePair) -> WavePair:
    A = P.entries
    Pu = A @ state.u
    u_next = Pu + state.v
    v_next = A @ state.v - (state.u - A @ Pu)
    return WavePair(u_next, v_next)


def wave_trajectory(P: TransitionMatrix, init: WavePair, n: int) -> Iterator[WavePair]:
    """Yield the wave states at steps ``0..n``."""
    n = _check_degree(n)
    state = WavePair(_as_vector(P, init.u).copy(), _as_vector(P, init.v).copy())
    yield state
    for _ in range(n):
        state = wave_step(P, state)
        yield state


def wave_evolve(P: TransitionMatrix, init: WavePair, n: int) -> WavePair:
    """Evolve ``u <- P u + v``, ``v <- P v - (I - P^2) u`` for ``n`` steps."""
    state = None
    for state in wave_trajectory(P, init, n):
        pass
    return state


def energy(P: TransitionMatrix, state: WavePair) -> float:
    """Conserved energy ``u.(I - P^2)u + |v|^2``, computed without square roots."""
    u = _as_vector(P, state.u)
    v = _as_vector(P, state.v)
    Pu = matvec(P, u)
    e = float(u @ u - Pu @ Pu + v @ v)
    if -ENERGY_CLAMP < e < 0.0:
        return 0.0
    return e


def write_trajectory_csv(P: TransitionMatrix, init: WavePair, n: int, stream: IO[str]) -> None:
    """Dump ``step,vertex,u,v`` rows for every step and every vertex."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["step", "vertex", "u", "v"])
    for step, state in enumerate(wave_trajectory(P, init, n)):
        for i in range(P.n_vertices):
            writer.writerow([step, i, f"{state.u[i]:.17g}", f"{state.v[i]:.17g}"])


# --- dense oracles -------------------------------------------------------


def _dense_eigh(P: TransitionMatrix, cap: int):
    if P.n_vertices > cap:
        raise ValueError(f"dense oracle limited to {cap} vertices, got {P.n_vertices}")
    lam, V = np.linalg.eigh(P.dense())
    if lam.size and (lam.min() < -1 - EIGEN_CLAMP or lam.max() > 1 + EIGEN_CLAMP):
        raise ValueError(f"spectrum [{lam.min()}, {lam.max()}] leaves [-1, 1]")
    return np.clip(lam, -1.0, 1.0), V


def dense_cheb_T(P: TransitionMatrix, n: int, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense ``T_n(P) = V cos(n arccos L) V^T``."""
    lam, V = _dense_eigh(P, cap)
    return (V * np.cos(n * np.arccos(lam))) @ V.T


def _cheb_U_scalar(lam: np.ndarray, n: int) -> np.ndarray:
    theta = np.arccos(lam)
    s = np.sin(theta)
    out = np.empty_like(lam)
    regular = np.abs(s) > 1e-7
    out[regular] = np.sin((n + 1) * theta[regular]) / s[regular]
    edge = ~regular
    # U_n(1) = n + 1, U_n(-1) = (-1)^n (n + 1)
    out[edge] = np.where(lam[edge] > 0, n + 1.0, (-1.0) ** n * (n + 1.0))
    return out


def dense_cheb_U(P: TransitionMatrix, n: int, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense ``U_n(P)`` via ``sin((n+1) t) / sin t`` on the spectrum."""
    if n < 0:
        return np.zeros((P.n_vertices, P.n_vertices))
    lam, V = _dense_eigh(P, cap)
    return (V * _cheb_U_scalar(lam, n)) @ V.T


def dense_sqrt_block(P: TransitionMatrix, cap: int = DENSE_CAP) -> np.ndarray:
    lam, V = _dense_eigh(P, cap)
    return (V * np.sqrt(1.0 - lam * lam)) @ V.T


def dilation_dense(P: TransitionMatrix, cap: int = DENSE_CAP) -> DenseDilation:
    """Assemble the unitary dilation of ``P`` (small instances only)."""
    S = dense_sqrt_block(P, cap)
    D = P.dense()
    U = np.block([[D, S], [-S, D]])
    return DenseDilation(U=U, sqrt_block=S)
