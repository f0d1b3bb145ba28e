"""Bivariate Chebyshev coefficients on Z^2 and the spreading measures they define.

The coefficients ``a[p, q]`` are defined by

    T_n((X + Y)/2) = sum_{p, q <= n} a[p, q] T_p(X) T_q(Y),

and are reachable in two independent ways: from the quantum-walk amplitude
``T_n(P) e_0`` on the lattice (an entry at ``(p, q)`` equals
``a[|p|, |q|] / 2^k`` with ``k`` the number of nonzero coordinates), or from
samples of ``h(x, y) = T_n((cos x + cos y)/2)`` on a cosine grid.

Normalization of the limit
--------------------------
``limit_moment`` integrates the moments of the image of the uniform law on
``[0, pi]^2`` under ``Psi = (sin x, sin y) / sin(theta)``. The atomic
measures ``gamma_n`` do not converge to that law: ``xi^2`` averages to 1/2
and each derivative of ``cos(n theta)`` carries ``d theta/dx = sin x / (2 sin
theta)``, so

    lim gamma_n[x^2K y^2L] = 2 * 4^-(K+L) * limit_moment(K, L),

i.e. ``gamma_n`` tends to twice the image of the uniform law under ``Psi/2``
(total mass 2, support inside ``[0, 1/sqrt(2)]^2``). ``coefficient_limit_moment``
returns this rescaled value; the normalized measures ``mu_n`` tend to the
image under ``Psi/2``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Callable, Iterable, Sequence

import numpy as np
from scipy.fft import dct

from .cheb_engine import cheb_T_apply
from .graph_core import build_lattice2d

MASS_BOUND = 4.0


@dataclass(frozen=True)
class CoeffTable:
    """``a[p, q] = a_{n,p,q}`` for ``0 <= p, q <= n``."""

    n: int
    a: np.ndarray

    def __post_init__(self):
        if self.a.shape != (self.n + 1, self.n + 1):
            raise ValueError(f"coefficient array must be {(self.n + 1,) * 2}, got {self.a.shape}")

    @property
    def mass(self) -> float:
        return float(np.sum(self.a**2))

    def row_mass(self) -> float:
        """``sum_p a[p, 0]^2``, the edge row that vanishes as ``n`` grows."""
        return float(np.sum(self.a[:, 0] ** 2))

    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.a - self.a.T)))

    def parity_defect(self) -> float:
        """Largest entry with ``p + q`` of the wrong parity (should be zero)."""
        p = np.arange(self.n + 1)
        wrong = (p[:, None] + p[None, :] - self.n) % 2 == 1
        return float(np.max(np.abs(self.a[wrong]), initial=0.0))


# --- coefficient extraction ---------------------------------------------


def _check_n(n) -> int:
    if int(n) != n or n < 0:
        raise ValueError(f"degree must be a nonnegative integer, got {n!r}")
    return int(n)


def lattice_amplitude(n: int, halfwidth: int | None = None) -> np.ndarray:
    """``T_n(P) e_(0,0)`` on the lattice, reshaped to a ``(2W+1, 2W+1)`` grid indexed ``[x+W, y+W]``."""
    n = _check_n(n)
    W = max(n, 1) if halfwidth is None else int(halfwidth)
    if W < n:
        raise ValueError(f"halfwidth {W} < degree {n}: the walk would reach the boundary")
    P = build_lattice2d(W)
    amp = cheb_T_apply(P, P.basis((0, 0)), n)
    return amp.reshape(2 * W + 1, 2 * W + 1)


def _nonzero_count_weights(n: int) -> np.ndarray:
    """``2^k(p, q)`` for the quadrant ``0 <= p, q <= n``."""
    k = (np.arange(n + 1) > 0).astype(int)
    return 2.0 ** (k[:, None] + k[None, :])


def coeffs_matvec(n: int, halfwidth: int | None = None) -> CoeffTable:
    """Read ``a[p, q] = 2^k(p,q) * (T_n(P) e_0)(p, q)`` off the lattice walk."""
    n = _check_n(n)
    grid = lattice_amplitude(n, halfwidth)
    W = (grid.shape[0] - 1) // 2
    quadrant = grid[W : W + n + 1, W : W + n + 1]
    return CoeffTable(n=n, a=quadrant * _nonzero_count_weights(n))


def cheb_T_scalar(z: np.ndarray, n: int) -> np.ndarray:
    """``T_n(z) = cos(n arccos z)`` for ``z`` in ``[-1, 1]``."""
    return np.cos(n * np.arccos(np.clip(z, -1.0, 1.0)))


def coeffs_sampling(n: int) -> CoeffTable:
    """Recover ``a`` from ``h`` sampled on the closed grid ``x_j = pi j / n``.

    Type-I cosine quadrature (trapezoid weights 1/2 at the endpoints) is exact
    for cosine series of degree ``<= n`` in each variable.
    """
    n = _check_n(n)
    if n == 0:
        return CoeffTable(n=0, a=np.ones((1, 1)))
    c = np.cos(np.pi * np.arange(n + 1) / n)
    h = cheb_T_scalar(0.5 * (c[:, None] + c[None, :]), n)
    a = dct(dct(h, type=1, axis=0), type=1, axis=1) / float(n * n)
    a[[0, -1], :] *= 0.5
    a[:, [0, -1]] *= 0.5
    return CoeffTable(n=n, a=a)


def coeffs_symbolic(n: int) -> dict[tuple[int, int], Fraction]:
    """Exact ``a[p, q]`` by expanding the Chebyshev recurrence in the ``T_p(X) T_q(Y)`` basis.

    Uses ``X T_p = (T_{p+1} + T_{|p-1|})/2``; cost grows like ``n^3``, meant for small ``n``.
    """
    n = _check_n(n)
    half = Fraction(1, 2)

    def times_z(poly):
        out: dict[tuple[int, int], Fraction] = {}
        for (p, q), c in poly.items():
            w = c * half * half
            for key in ((p + 1, q), (abs(p - 1), q), (p, q + 1), (p, abs(q - 1))):
                out[key] = out.get(key, Fraction(0)) + w
        return out

    prev = {(0, 0): Fraction(1)}
    if n == 0:
        return prev
    cur = times_z(prev)
    for _ in range(n - 1):
        nxt = {k: 2 * c for k, c in times_z(cur).items()}
        for k, c in prev.items():
            nxt[k] = nxt.get(k, Fraction(0)) - c
        prev, cur = cur, nxt
    return {k: c for k, c in cur.items() if c != 0}


def symbolic_table(n: int) -> CoeffTable:
    a = np.zeros((n + 1, n + 1))
    for (p, q), c in coeffs_symbolic(n).items():
        a[p, q] = float(c)
    return CoeffTable(n=n, a=a)


# --- moments of gamma_n ---------------------------------------------------


def gamma_moment(table: CoeffTable, K: int, L: int) -> float:
    """``gamma_n[x^2K y^2L] = sum a[p,q]^2 (p/n)^2K (q/n)^2L`` (with ``0^0 = 1``)."""
    if K < 0 or L < 0:
        raise ValueError("moment orders must be nonnegative")
    n = table.n
    if n == 0:
        if K + L > 0:
            raise ValueError("gamma_0 has atoms at p/n with n = 0; only K = L = 0 is defined")
        return table.mass
    r = np.arange(n + 1) / n
    return float(np.sum(table.a**2 * np.outer(r ** (2 * K), r ** (2 * L))))


def parseval_weight(k: int, r: np.ndarray) -> np.ndarray:
    """``w_k(r)``: 2 at ``r = 0`` for even ``k``, 0 at ``r = 0`` for odd ``k``, 1 elsewhere."""
    r = np.asarray(r)
    at_zero = 2.0 if k % 2 == 0 else 0.0
    return np.where(r == 0, at_zero, 1.0)


# --- the limit measure ----------------------------------------------------


def theta(x, y):
    """Unique ``t`` in ``[0, pi]`` with ``cos t = (cos x + cos y)/2``."""
    s2, c2 = _half_angle_squares(x, y)
    return 2.0 * np.arctan2(np.sqrt(s2), np.sqrt(c2))


def _half_angle_squares(x, y):
    """``sin^2(t/2)`` and ``cos^2(t/2)`` for ``t = theta(x, y)``.

    From ``(cos x + cos y)/2 = 1 - sin^2(x/2) - sin^2(y/2)``; unlike ``arccos``
    this keeps full relative accuracy near both corners.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any((x < 0) | (x > np.pi) | (y < 0) | (y > np.pi)):
        raise ValueError("theta is defined on [0, pi]^2")
    s2 = 0.5 * (np.sin(0.5 * x) ** 2 + np.sin(0.5 * y) ** 2)
    c2 = 0.5 * (np.cos(0.5 * x) ** 2 + np.cos(0.5 * y) ** 2)
    return s2, c2


def _sin_theta(x, y):
    s2, c2 = _half_angle_squares(x, y)
    return 2.0 * np.sqrt(s2 * c2)


def psi(x, y):
    """``(sin x, sin y) / sin(theta(x, y))``; undefined at the corners ``(0,0)`` and ``(pi,pi)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = _sin_theta(x, y)
    corner = ((x == 0.0) & (y == 0.0)) | ((x == np.pi) & (y == np.pi))
    if np.any(corner | (s == 0.0)):
        raise ValueError("psi is 0/0 at (0, 0) and (pi, pi)")
    return np.sin(x) / s, np.sin(y) / s


def _midpoints(M: int) -> np.ndarray:
    return (np.arange(M) + 0.5) * (np.pi / M)


def limit_moment(K: int, L: int, M: int = 512) -> float:
    """``(1/pi^2) int_{[0,pi]^2} (sin x / sin t)^2K (sin y / sin t)^2L`` by the midpoint rule.

    Cell centres never touch the singular corners; the integrand stays below
    ``2^(K+L)`` near them, so the rule converges.
    """
    if M < 64:
        raise ValueError("quadrature resolution must be at least 64")
    g = _midpoints(M)
    sx = np.sin(g)
    total = 0.0
    # row blocks keep memory flat for large M
    for start in range(0, M, 256):
        xs = g[start : start + 256, None]
        s = _sin_theta(xs, g[None, :])
        f = (sx[start : start + 256, None] / s) ** (2 * K) * (sx[None, :] / s) ** (2 * L)
        total += float(f.sum())
    return total / (M * M)


def coefficient_limit_moment(K: int, L: int, M: int = 512) -> float:
    """Limit of ``gamma_n[x^2K y^2L]``: ``2 * 4^-(K+L) * limit_moment(K, L, M)``."""
    return 2.0 * 0.25 ** (K + L) * limit_moment(K, L, M)


def psi_mass_outside_unit_square(samples: int = 200_000, seed: int = 0, scale: float = 1.0) -> float:
    """Monte Carlo mass that ``scale * Psi`` sends outside ``[0, 1]^2`` under the uniform law."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, np.pi, samples)
    y = rng.uniform(0.0, np.pi, samples)
    s = _sin_theta(x, y)
    ok = s > 0
    u = scale * np.sin(x[ok]) / s[ok]
    v = scale * np.sin(y[ok]) / s[ok]
    return float(np.mean((u > 1.0) | (v > 1.0)))


@dataclass(frozen=True)
class MomentReport:
    n: int
    K: int
    L: int
    gamma_n: float
    gamma_limit: float

    @property
    def discrepancy(self) -> float:
        return abs(self.gamma_n - self.gamma_limit)


def moment_convergence_report(
    K: int,
    L: int,
    n_list: Sequence[int],
    M: int = 512,
    limit: str = "unit",
    extractor: Callable[[int], CoeffTable] | None = None,
) -> list[MomentReport]:
    """Pair ``gamma_n[x^2K y^2L]`` with the limit moment for each ``n``.

    ``limit="unit"`` compares with :func:`limit_moment`, ``limit="rescaled"``
    with :func:`coefficient_limit_moment`.
    """
    if any(n < 1 for n in n_list):
        raise ValueError("all degrees must be >= 1")
    if limit == "unit":
        target = limit_moment(K, L, M)
    elif limit == "rescaled":
        target = coefficient_limit_moment(K, L, M)
    else:
        raise ValueError(f"unknown limit normalization {limit!r}")
    extractor = extractor or coeffs_sampling
    return [
        MomentReport(n=int(n), K=K, L=L, gamma_n=gamma_moment(extractor(int(n)), K, L), gamma_limit=target)
        for n in n_list
    ]


def trend_holds(values: Sequence[float], slack: float = 0.1) -> bool:
    """Weakly decreasing up to a multiplicative ``1 + slack`` per step."""
    return all(b <= (1.0 + slack) * a for a, b in zip(values, values[1:]))


# --- Parseval-type identity ------------------------------------------------


def cheb_T_derivatives(z: np.ndarray, n: int, order: int) -> list[np.ndarray]:
    """``[T_n(z), T_n'(z), ..., T_n^(order)(z)]`` from the differentiated recurrence.

    ``T_{k+1}^(r) = 2 z T_k^(r) + 2 r T_k^(r-1) - T_{k-1}^(r)``.
    """
    z = np.asarray(z, dtype=float)
    zero = np.zeros_like(z)
    prev = [np.ones_like(z)] + [zero] * order
    if n == 0:
        return prev
    cur = [z.copy(), np.ones_like(z)] + [zero] * (order - 1)
    cur = cur[: order + 1]
    for _ in range(n - 1):
        nxt = []
        for r in range(order + 1):
            t = 2.0 * z * cur[r] - prev[r]
            if r:
                t += 2.0 * r * cur[r - 1]
            nxt.append(t)
        prev, cur = cur, nxt
    return cur


def _bell_terms(k: int, t: np.ndarray) -> dict[int, np.ndarray]:
    """Faa di Bruno factors of ``d^k/dt^k g(cos(t)/2)``: {order of g-derivative: factor}."""
    d1 = -0.5 * np.sin(t)
    d2 = -0.5 * np.cos(t)
    if k == 0:
        return {0: np.ones_like(t)}
    if k == 1:
        return {1: d1}
    if k == 2:
        return {1: d2, 2: d1 * d1}
    raise ValueError("derivative orders above 2 are not supported")


def parseval_lhs(n: int, K: int, L: int, M: int = 2048, block: int = 128) -> float:
    """``(1 / (pi^2 n^2(K+L))) int_{[0,2pi]^2} (d_x^K d_y^L h)^2`` by the periodic trapezoid rule.

    The integrand is a trigonometric polynomial of degree ``2n`` per variable,
    so the rule is exact once ``M > 2n``.
    """
    if K > 2 or L > 2:
        raise ValueError("K and L must be <= 2")
    if n < 1:
        raise ValueError("n must be >= 1")
    g = 2.0 * np.pi * np.arange(M) / M
    ys = g[None, :]
    by = _bell_terms(L, ys)
    cy = 0.5 * np.cos(ys)
    total = 0.0
    for start in range(0, M, block):
        xs = g[start : start + block, None]
        bx = _bell_terms(K, xs)
        derivs = cheb_T_derivatives(0.5 * np.cos(xs) + cy, n, K + L)
        f = np.zeros((xs.shape[0], M))
        for j, fx in bx.items():
            for i, fy in by.items():
                f += derivs[i + j] * fx * fy
        total += float(np.sum(f * f))
    integral = total * (2.0 * np.pi / M) ** 2
    return integral / (np.pi**2 * float(n) ** (2 * (K + L)))


def parseval_rhs(table: CoeffTable, K: int, L: int) -> float:
    """``n^-2(K+L) sum a^2 p^2K q^2L w_K(p) w_L(q)``."""
    n = table.n
    p = np.arange(n + 1, dtype=float)
    wx = parseval_weight(K, p) * p ** (2 * K)
    wy = parseval_weight(L, p) * p ** (2 * L)
    return float(np.sum(table.a**2 * np.outer(wx, wy))) / float(n) ** (2 * (K + L))


def verify_parseval(n: int, K: int, L: int, M: int = 2048, table: CoeffTable | None = None) -> tuple[float, float]:
    """Both sides of the Parseval-type identity for the derivatives of ``h``."""
    if K > 2 or L > 2:
        raise ValueError("K and L must be <= 2")
    lhs = parseval_lhs(n, K, L, M)
    rhs = parseval_rhs(table or coeffs_sampling(n), K, L)
    return lhs, rhs


# --- spreading on the lattice ---------------------------------------------


def lattice_distances(halfwidth: int) -> np.ndarray:
    c = np.arange(-halfwidth, halfwidth + 1, dtype=float)
    return np.hypot(c[:, None], c[None, :])


def quantum_lattice_measure(n: int, halfwidth: int | None = None) -> np.ndarray:
    """``|T_n(P) e_0|^2`` on the lattice grid (subnormalized)."""
    return lattice_amplitude(n, halfwidth) ** 2


def walk_lattice_measure(n: int, halfwidth: int | None = None) -> np.ndarray:
    """``P^n e_0`` on the lattice grid."""
    n = _check_n(n)
    W = max(n, 1) if halfwidth is None else int(halfwidth)
    if W < n:
        raise ValueError(f"halfwidth {W} < degree {n}")
    P = build_lattice2d(W)
    v = P.basis((0, 0))
    for _ in range(n):
        v = P.entries @ v
    return v.reshape(2 * W + 1, 2 * W + 1)


def mean_distance(measure: np.ndarray) -> float:
    """``sum_x measure(x) |x|`` for a square grid centred at the origin (not normalized)."""
    W = (measure.shape[0] - 1) // 2
    return float(np.sum(measure * lattice_distances(W)))


# --- CSV --------------------------------------------------------------------


def write_coeff_csv(table: CoeffTable, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["p", "q", "a"])
    for p in range(table.n + 1):
        for q in range(table.n + 1):
            writer.writerow([p, q, f"{table.a[p, q]:.17g}"])


def read_coeff_csv(stream: IO[str]) -> CoeffTable:
    rows = list(csv.DictReader(stream))
    n = max(int(r["p"]) for r in rows)
    a = np.zeros((n + 1, n + 1))
    for r in rows:
        a[int(r["p"]), int(r["q"])] = float(r["a"])
    return CoeffTable(n=n, a=a)


def write_moment_csv(reports: Iterable[MomentReport], stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["n", "K", "L", "gamma_n", "gamma_limit", "discrepancy"])
    for r in reports:
        writer.writerow([r.n, r.K, r.L, f"{r.gamma_n:.17g}", f"{r.gamma_limit:.17g}", f"{r.discrepancy:.17g}"])


def k_nonzero(p: int, q: int) -> int:
    return int(p != 0) + int(q != 0)


def amplitude_from_coeffs(table: CoeffTable, p: int, q: int) -> float:
    """``(T_n(P) e_0)(p, q) = a[|p|, |q|] / 2^k`` (zero outside the quadrant of degree ``n``)."""
    ap, aq = abs(p), abs(q)
    if ap > table.n or aq > table.n:
        return 0.0
    return float(table.a[ap, aq]) / 2.0 ** k_nonzero(ap, aq)

