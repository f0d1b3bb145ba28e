"""Figure data: walk and quantum-walk profiles on the line and on the lattice."""

from __future__ import annotations

import math
from typing import IO

import numpy as np

from .cheb_engine import cheb_T_apply
from .fast_forward import exact_power_apply
from .graph_core import TransitionMatrix, build_lattice2d, build_line, lazy

MODES = ("walk", "quantum")


def _check(n: int, halfwidth: int, mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    if halfwidth < max(n, 1):
        raise ValueError(f"halfwidth W={halfwidth} must be >= n={n}")


def _evolve(P: TransitionMatrix, n: int, mode: str) -> np.ndarray:
    e0 = P.basis()
    if mode == "walk":
        return exact_power_apply(P, e0, n)
    return cheb_T_apply(P, e0, n) ** 2


def line_profile(n: int, halfwidth: int, mode: str = "quantum", use_lazy: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Positions ``-n..n`` and probabilities ``[P^n]_{0,x}`` or ``[T_n(P)]_{0,x}^2``."""
    _check(n, halfwidth, mode)
    P = build_line(halfwidth)
    if use_lazy:
        P = lazy(P)
    probs = _evolve(P, n, mode)
    lo = halfwidth - n
    return np.arange(-n, n + 1), probs[lo : lo + 2 * n + 1]


def figure_window(n: int) -> int:
    return math.ceil(0.7 * n)


def lattice_profile(
    n: int, halfwidth: int, mode: str = "quantum", use_lazy: bool = False, window: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Coordinates ``-w..w`` and the ``(2w+1, 2w+1)`` probability grid indexed ``[x+w, y+w]``."""
    _check(n, halfwidth, mode)
    w = figure_window(n) if window is None else int(window)
    if w > halfwidth:
        raise ValueError(f"window {w} exceeds halfwidth {halfwidth}")
    P = build_lattice2d(halfwidth)
    if use_lazy:
        P = lazy(P)
    size = 2 * halfwidth + 1
    grid = _evolve(P, n, mode).reshape(size, size)
    c = halfwidth
    return np.arange(-w, w + 1), grid[c - w : c + w + 1, c - w : c + w + 1]


def write_line_csv(xs: np.ndarray, ys: np.ndarray, stream: IO[str]) -> None:
    stream.write("X,Y\n")
    for x, y in zip(xs, ys):
        stream.write(f"{int(x)},{y:.17g}\n")


def write_lattice_table(coords: np.ndarray, grid: np.ndarray, stream: IO[str]) -> None:
    """Whitespace table ``x y z``, x outer, y inner (one mesh row per x)."""
    stream.write("x y z\n")
    for i, x in enumerate(coords):
        for j, y in enumerate(coords):
            stream.write(f"{int(x)} {int(y)} {grid[i, j]:.17g}\n")


def read_line_csv(stream: IO[str]) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(stream, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0].astype(int), data[:, 1]


def read_lattice_table(stream: IO[str]) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(stream, skiprows=1, ndmin=2)
    coords = np.unique(data[:, 0]).astype(int)
    size = coords.size
    return coords, data[:, 2].reshape(size, size)
