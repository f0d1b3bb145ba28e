"""Transition matrices for the walks.

Every matrix produced here is a sparse, exactly symmetric contraction stored
in CSR form with sorted column indices, so that polynomial recurrences over
it are reproducible bit for bit.

Infinite lattices are truncated to a window ``[-W, W]^d`` with an absorbing
boundary: mass leaving the window is dropped. A degree-``n`` polynomial in
``P`` applied to a vector supported at the origin only reaches vertices at
graph distance ``<= n``, so for ``W >= n`` the truncation is invisible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional

import numpy as np
import scipy.sparse as sp

ROW_SUM_TOL = 1e-12
CONTRACTION_TOL = 1e-12


class GraphParseError(ValueError):
    """Malformed edge-list input. ``line`` is 1-based, or None for global errors."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """A sparse self-adjoint contraction ``P`` on a finite vertex set.

    Attributes
    ----------
    entries : scipy.sparse.csr_matrix
        Symmetric matrix of transition weights.
    vertex_labels : ndarray or None
        Per-vertex coordinates: shape ``(N,)`` for the line, ``(N, 2)`` for
        the 2D lattice, None for cycles and loaded graphs.
    degrees : ndarray or None
        Vertex degrees of a loaded graph. ``entries`` is then
        ``D^{-1/2} A D^{-1/2}`` and ``D^{-1} A = D^{-1/2} entries D^{1/2}``.
    halfwidth : int or None
        Window half-width ``W`` for truncated lattice families.
    kind : str
        Family tag, used in reports.
    """

    entries: sp.csr_matrix
    vertex_labels: Optional[np.ndarray] = None
    degrees: Optional[np.ndarray] = None
    halfwidth: Optional[int] = None
    kind: str = "custom"
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        m = self.entries
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"transition matrix must be square, got {m.shape}")
        if self.vertex_labels is not None and len(self.vertex_labels) != m.shape[0]:
            raise ValueError("vertex_labels length does not match matrix size")

    @property
    def n_vertices(self) -> int:
        return self.entries.shape[0]

    def __len__(self) -> int:
        return self.n_vertices

    def index_of(self, label) -> int:
        """Vertex index of a coordinate label (integer on the line, pair on the lattice)."""
        if self.vertex_labels is None:
            idx = int(label)
            if not 0 <= idx < self.n_vertices:
                raise KeyError(label)
            return idx
        if not self._index:
            labels = self.vertex_labels
            keys = labels.tolist() if labels.ndim == 1 else [tuple(r) for r in labels.tolist()]
            self._index.update({k: i for i, k in enumerate(keys)})
        key = tuple(label) if np.ndim(label) else int(label)
        return self._index[key]

    def basis(self, label=None) -> np.ndarray:
        """Indicator vector ``e_x``; defaults to the origin (or vertex 0 if unlabelled)."""
        if label is None:
            label = self.origin
        e = np.zeros(self.n_vertices)
        e[self.index_of(label)] = 1.0
        return e

    @property
    def origin(self):
        if self.vertex_labels is None:
            return 0
        if self.vertex_labels.ndim == 1:
            return 0
        return (0, 0)

    def dense(self) -> np.ndarray:
        return self.entries.toarray()

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.entries.sum(axis=1)).ravel()

    def is_symmetric(self) -> bool:
        """Bitwise symmetry of the stored entries."""
        return (self.entries != self.entries.T).nnz == 0


def _finalize(m) -> sp.csr_matrix:
    m = sp.csr_matrix(m, dtype=np.float64)
    m.eliminate_zeros()
    m.sum_duplicates()
    m.sort_indices()
    return m


def _check_halfwidth(W: int) -> None:
    if int(W) != W or W < 1:
        raise ValueError(f"halfwidth must be a positive integer, got {W!r}")


def _path_adjacency(size: int) -> sp.csr_matrix:
    off = np.ones(size - 1)
    return sp.diags([off, off], [-1, 1], shape=(size, size), format="csr")


def build_line(halfwidth: int) -> TransitionMatrix:
    """Nearest-neighbour walk ``(Q + Q^{-1})/2`` on the window ``[-W, W]``."""
    _check_halfwidth(halfwidth)
    W = int(halfwidth)
    size = 2 * W + 1
    P = _finalize(0.5 * _path_adjacency(size))
    labels = np.arange(-W, W + 1)
    return TransitionMatrix(P, vertex_labels=labels, halfwidth=W, kind="line")


def build_lattice2d(halfwidth: int) -> TransitionMatrix:
    """Walk ``(P_1 + P_2)/2`` on ``[-W, W]^2``, vertices in row-major order over ``(x+W, y+W)``."""
    _check_halfwidth(halfwidth)
    W = int(halfwidth)
    size = 2 * W + 1
    A = _path_adjacency(size)
    eye = sp.identity(size, format="csr")
    P = _finalize(0.25 * (sp.kron(A, eye) + sp.kron(eye, A)))
    coords = np.arange(-W, W + 1)
    xs, ys = np.meshgrid(coords, coords, indexing="ij")
    labels = np.column_stack([xs.ravel(), ys.ravel()])
    return TransitionMatrix(P, vertex_labels=labels, halfwidth=W, kind="lattice2d")


def lattice_index(x: int, y: int, halfwidth: int) -> int:
    size = 2 * halfwidth + 1
    return (x + halfwidth) * size + (y + halfwidth)


def build_cycle(size: int) -> TransitionMatrix:
    """Simple walk on the cycle ``Z/N``; doubly stochastic."""
    if int(size) != size or size < 3:
        raise ValueError(f"cycle needs at least 3 vertices, got {size!r}")
    N = int(size)
    i = np.arange(N)
    rows = np.concatenate([i, i])
    cols = np.concatenate([(i + 1) % N, (i - 1) % N])
    P = sp.coo_matrix((np.full(2 * N, 0.5), (rows, cols)), shape=(N, N))
    return TransitionMatrix(_finalize(P), kind="cycle")


def _parse_edges(lines: Iterable[str]) -> list[tuple[int, int]]:
    edges = []
    seen = set()
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.split()
        if len(parts) != 2:
            raise GraphParseError(f"expected 'i j', got {raw.strip()!r}", lineno)
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError(f"non-integer vertex in {raw.strip()!r}", lineno) from None
        if i < 0 or j < 0:
            raise GraphParseError("vertex indices must be nonnegative", lineno)
        if i == j:
            raise GraphParseError(f"self-loop at vertex {i}", lineno)
        key = (min(i, j), max(i, j))
        if key in seen:
            raise GraphParseError(f"duplicate edge {key}", lineno)
        seen.add(key)
        edges.append(key)
    return edges


def edges_to_matrix(edges: list[tuple[int, int]], n_vertices: Optional[int] = None) -> TransitionMatrix:
    """Symmetric normalized walk ``D^{-1/2} A D^{-1/2}`` from an undirected edge list."""
    if not edges:
        raise GraphParseError("edge list is empty")
    arr = np.asarray(edges, dtype=np.int64)
    N = int(arr.max()) + 1 if n_vertices is None else int(n_vertices)
    deg = np.bincount(arr.ravel(), minlength=N)
    isolated = np.flatnonzero(deg == 0)
    if isolated.size:
        raise GraphParseError(f"isolated vertices: {isolated.tolist()[:10]}")
    d = deg.astype(np.float64)
    i, j = arr[:, 0], arr[:, 1]
    w = 1.0 / np.sqrt(d[i] * d[j])
    rows = np.concatenate([i, j])
    cols = np.concatenate([j, i])
    vals = np.concatenate([w, w])
    P = _finalize(sp.coo_matrix((vals, (rows, cols)), shape=(N, N)))
    return TransitionMatrix(P, degrees=deg, kind="graph")


def load_graph(stream: IO[str] | str) -> TransitionMatrix:
    """Read an edge list ("i j" per line, ``#`` comments) into a normalized walk matrix.

    Raises
    ------
    GraphParseError
        On malformed lines, self-loops, duplicate edges or isolated vertices.
    """
    lines = stream.splitlines() if isinstance(stream, str) else stream
    return edges_to_matrix(_parse_edges(lines))


def to_random_walk_convention(P: TransitionMatrix, v: np.ndarray) -> np.ndarray:
    """Map ``f(S) v`` for ``S = D^{-1/2}AD^{-1/2}`` to ``f(D^{-1}A)`` acting on ``D^{-1/2} v``.

    With ``M = D^{-1}A = D^{-1/2} S D^{1/2}``, a vector ``v`` in the symmetric
    frame corresponds to ``D^{-1/2} v`` in the random-walk frame.
    """
    if P.degrees is None:
        return np.asarray(v, dtype=float).copy()
    return np.asarray(v, dtype=float) / np.sqrt(P.degrees)


def from_random_walk_convention(P: TransitionMatrix, v: np.ndarray) -> np.ndarray:
    if P.degrees is None:
        return np.asarray(v, dtype=float).copy()
    return np.asarray(v, dtype=float) * np.sqrt(P.degrees)


def lazy(P: TransitionMatrix) -> TransitionMatrix:
    """Lazy walk ``(I + P)/2``; spectrum maps to ``(1 + lambda)/2``."""
    eye = sp.identity(P.n_vertices, format="csr")
    L = _finalize(0.5 * (eye + P.entries))
    return TransitionMatrix(
        L,
        vertex_labels=P.vertex_labels,
        degrees=P.degrees,
        halfwidth=P.halfwidth,
        kind=f"lazy-{P.kind}",
    )


def matvec(P: TransitionMatrix, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape[0] != P.n_vertices:
        raise ValueError(f"dimension mismatch: matrix has {P.n_vertices} vertices, vector has {v.shape[0]}")
    return P.entries @ v


def check_contraction(P: TransitionMatrix, samples: int = 8, rng=None) -> float:
    """Largest ``|v.(Pv)|`` over random unit vectors plus power-iteration estimate.

    Returns the maximum observed value; a contraction keeps it ``<= 1``.
    """
    rng = np.random.default_rng(rng)
    N = P.n_vertices
    worst = 0.0
    for _ in range(samples):
        v = rng.standard_normal(N)
        v /= np.linalg.norm(v)
        worst = max(worst, abs(float(v @ (P.entries @ v))))
    # power iteration on P^2 for the operator norm
    v = rng.standard_normal(N)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(200):
        w = P.entries @ (P.entries @ v)
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            break
        est = math.sqrt(nrm)
        v = w / nrm
    return max(worst, est)


def random_connected_graph(n_vertices: int, extra_edges: int, rng=None) -> TransitionMatrix:
    """Random spanning tree plus ``extra_edges`` distinct chords, normalized as in :func:`load_graph`."""
    if n_vertices < 2:
        raise ValueError("need at least 2 vertices")
    rng = np.random.default_rng(rng)
    edges = {(int(rng.integers(0, i)), i) for i in range(1, n_vertices)}
    max_edges = n_vertices * (n_vertices - 1) // 2
    target = min(len(edges) + extra_edges, max_edges)
    while len(edges) < target:
        i, j = sorted(int(t) for t in rng.choice(n_vertices, size=2, replace=False))
        edges.add((i, j))
    return edges_to_matrix(sorted(edges), n_vertices)


def edge_list_text(edges: Iterable[tuple[int, int]]) -> str:
    return "".join(f"{i} {j}\n" for i, j in edges)
