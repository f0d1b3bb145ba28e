import io
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chebwalk import graph_core as gc
from chebwalk import lattice_limit as ll

# --- coefficient extraction ------------------------------------------------


def test_symbolic_low_degrees():
    assert ll.coeffs_symbolic(0) == {(0, 0): Fraction(1)}
    assert ll.coeffs_symbolic(1) == {(1, 0): Fraction(1, 2), (0, 1): Fraction(1, 2)}
    # T_2((X+Y)/2) = T_2(X)/4 + T_2(Y)/4 + T_1(X)T_1(Y) - 1/2
    assert ll.coeffs_symbolic(2) == {
        (0, 0): Fraction(-1, 2),
        (2, 0): Fraction(1, 4),
        (0, 2): Fraction(1, 4),
        (1, 1): Fraction(1),
    }
    assert ll.coeffs_symbolic(3) == {
        (1, 0): Fraction(-3, 8),
        (0, 1): Fraction(-3, 8),
        (3, 0): Fraction(1, 8),
        (0, 3): Fraction(1, 8),
        (2, 1): Fraction(3, 4),
        (1, 2): Fraction(3, 4),
    }


def _poly_T(k, z):
    return np.cos(k * np.arccos(z))


def test_symbolic_n4_reconstructs_h():
    a = ll.coeffs_symbolic(4)
    rng = np.random.default_rng(0)
    X, Y = rng.uniform(-1, 1, (2, 50))
    series = sum(float(c) * _poly_T(p, X) * _poly_T(q, Y) for (p, q), c in a.items())
    assert series == pytest.approx(_poly_T(4, (X + Y) / 2), abs=1e-14)


@pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
def test_extractors_match_symbolic(n):
    ref = ll.symbolic_table(n).a
    assert np.max(np.abs(ll.coeffs_sampling(n).a - ref)) <= 1e-13
    assert np.max(np.abs(ll.coeffs_matvec(n).a - ref)) <= 1e-13


@pytest.mark.parametrize("n", [1, 5, 25, 50])
def test_extractors_agree(n):
    assert np.max(np.abs(ll.coeffs_matvec(n).a - ll.coeffs_sampling(n).a)) <= 1e-10


def test_matvec_wider_window_is_identical():
    assert np.array_equal(ll.coeffs_matvec(12, 12).a, ll.coeffs_matvec(12, 30).a)
    with pytest.raises(ValueError):
        ll.coeffs_matvec(12, 11)


def test_lattice_entry_matches_coefficient():
    n = 50
    grid = ll.lattice_amplitude(n, 60)
    table = ll.coeffs_sampling(n)
    assert grid[60 + 50, 60] == pytest.approx(table.a[50, 0] / 2, abs=1e-15)
    # X^n enters T_n((X+Y)/2) with weight 2^(n-1) 2^-n = 1/2, and X^n = 2^(1-n) T_n(X) + ..., so a[n, 0] = 2^-n
    assert ll.coeffs_matvec(n).a[50, 0] == 2.0**-50
    assert grid[60 + 50, 60] == 2.0**-51


@pytest.mark.parametrize("n", [7, 25, 60])
def test_symmetry_and_parity(n):
    t = ll.coeffs_sampling(n)
    assert t.symmetry_defect() <= 1e-11
    assert t.parity_defect() <= 1e-11


def test_mass_values():
    # sum_{p,q} a^2 frozen at the degrees the battery uses
    expected = {25: 1.9291433374449625, 50: 1.9918638346126532, 100: 1.9981076478065605, 200: 1.9982758792147475}
    for n, m in expected.items():
        t = ll.coeffs_sampling(n)
        assert t.mass == pytest.approx(m, rel=1e-10)
        assert 0 < t.mass <= ll.MASS_BOUND + 1e-9


def test_mass_tends_to_two():
    m = [ll.coeffs_sampling(n).mass for n in (200, 800)]
    assert abs(m[1] - 2) < abs(m[0] - 2) < 2e-3


def test_row_mass_vanishes():
    r25 = ll.coeffs_sampling(25).row_mass()
    r200 = ll.coeffs_sampling(200).row_mass()
    assert r200 < r25
    assert r200 == pytest.approx(0.002444620284068069, rel=1e-9)


def test_gamma_moment_examples():
    t = ll.coeffs_sampling(20)
    assert ll.gamma_moment(t, 0, 0) == t.mass
    assert ll.gamma_moment(t, 1, 0) <= ll.gamma_moment(t, 0, 0)
    assert ll.gamma_moment(t, 2, 1) <= ll.gamma_moment(t, 1, 1)
    assert ll.gamma_moment(t, 1, 2) == pytest.approx(ll.gamma_moment(t, 2, 1), rel=1e-12)
    assert ll.gamma_moment(ll.coeffs_sampling(0), 0, 0) == 1.0
    with pytest.raises(ValueError):
        ll.gamma_moment(ll.coeffs_sampling(0), 1, 0)


def test_gamma_moment_n200_near_two():
    g200 = ll.gamma_moment(ll.coeffs_sampling(200), 0, 0)
    g50 = ll.gamma_moment(ll.coeffs_sampling(50), 0, 0)
    assert 1.9 <= g200 <= 2.1
    assert abs(g200 - 2) < abs(g50 - 2)


def test_coeff_csv_round_trip():
    t = ll.coeffs_sampling(6)
    buf = io.StringIO()
    ll.write_coeff_csv(t, buf)
    assert buf.getvalue().startswith("p,q,a\n0,0,")
    buf.seek(0)
    back = ll.read_coeff_csv(buf)
    assert np.array_equal(back.a, t.a)


def test_amplitude_from_coeffs():
    t = ll.coeffs_sampling(5)
    grid = ll.lattice_amplitude(5, 5)
    for p in range(-5, 6):
        for q in range(-5, 6):
            assert ll.amplitude_from_coeffs(t, p, q) == pytest.approx(grid[p + 5, q + 5], abs=1e-14)
    assert ll.amplitude_from_coeffs(t, 6, 0) == 0.0
    assert [ll.k_nonzero(0, 0), ll.k_nonzero(3, 0), ll.k_nonzero(-1, 2)] == [0, 1, 2]


# --- theta, psi and the limit integral --------------------------------------


def test_theta_examples():
    assert ll.theta(0, 0) == 0.0
    assert ll.theta(np.pi, np.pi) == pytest.approx(np.pi, abs=1e-15)
    assert ll.theta(np.pi / 2, np.pi / 2) == pytest.approx(np.pi / 2, abs=1e-15)
    assert ll.theta(np.pi / 2, 0) == pytest.approx(np.pi / 3, abs=1e-15)
    with pytest.raises(ValueError):
        ll.theta(-0.1, 1.0)
    with pytest.raises(ValueError):
        ll.theta(1.0, 4.0)


def test_psi_examples():
    assert ll.psi(np.pi / 2, np.pi / 2) == pytest.approx((1.0, 1.0), abs=1e-15)
    u, v = ll.psi(np.pi / 2, 0)
    assert u == pytest.approx(2 / math.sqrt(3), rel=1e-15) and v == 0.0
    for t in (1e-2, 1e-4, 1e-6):
        assert ll.psi(t, t) == pytest.approx((1.0, 1.0), abs=1e-9)
    with pytest.raises(ValueError):
        ll.psi(0.0, 0.0)
    with pytest.raises(ValueError):
        ll.psi(np.pi, np.pi)


@settings(max_examples=200, deadline=None)
@given(x=st.floats(1e-6, np.pi - 1e-6), y=st.floats(1e-6, np.pi - 1e-6))
def test_psi_bounded_by_sqrt2(x, y):
    u, v = ll.psi(x, y)
    assert 0 <= u <= math.sqrt(2) + 1e-9
    assert 0 <= v <= math.sqrt(2) + 1e-9
    # cos t = (cos x + cos y)/2 reproduces
    assert math.cos(ll.theta(x, y)) == pytest.approx(0.5 * (math.cos(x) + math.cos(y)), abs=1e-12)


def test_limit_moment_probability():
    for M in (64, 128, 512):
        assert ll.limit_moment(0, 0, M) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        ll.limit_moment(0, 0, 32)


def test_limit_moment_swap_symmetry():
    assert ll.limit_moment(1, 0) == pytest.approx(ll.limit_moment(0, 1), abs=1e-12)
    assert ll.limit_moment(2, 1, 256) == pytest.approx(ll.limit_moment(1, 2, 256), abs=1e-12)


def test_limit_moment_resolution_convergence():
    vals = [ll.limit_moment(1, 1, M) for M in (128, 256, 512)]
    assert abs(vals[1] - vals[0]) <= 1e-3 and abs(vals[2] - vals[1]) <= 1e-3
    assert vals[2] == pytest.approx(0.42441622651658717, rel=1e-12)
    assert ll.limit_moment(1, 0, 512) == pytest.approx(0.7267604552689426, rel=1e-12)


def test_limit_moment_matches_monte_carlo():
    rng = np.random.default_rng(7)
    x, y = rng.uniform(0, np.pi, (2, 400_000))
    u, v = ll.psi(x, y)
    mc = float(np.mean(u**2))
    assert mc == pytest.approx(ll.limit_moment(1, 0), abs=5e-3)


def test_psi_support_diagnostic():
    # Psi leaves [0,1]^2 on most of its mass; Psi/2 never does (max |Psi| = sqrt 2)
    assert ll.psi_mass_outside_unit_square() == pytest.approx(0.637, abs=0.01)
    assert ll.psi_mass_outside_unit_square(scale=0.5) == 0.0


@pytest.mark.parametrize("K, L", [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2)])
def test_gamma_converges_to_rescaled_limit(K, L):
    reps = ll.moment_convergence_report(K, L, [25, 50, 100, 200], limit="rescaled")
    d = [r.discrepancy for r in reps]
    assert d[-1] < d[0]
    assert ll.trend_holds(d, 0.1)
    assert d[-1] < 2e-3


def test_gamma_against_unit_limit_is_far():
    # comparing gamma_n with the unrescaled limit leaves an O(1) gap
    reps = ll.moment_convergence_report(0, 0, [50, 200])
    assert all(r.gamma_limit == pytest.approx(1.0, abs=1e-12) for r in reps)
    assert all(r.discrepancy > 0.9 for r in reps)


def test_moment_report_shapes_and_csv():
    reps = ll.moment_convergence_report(1, 1, [10])
    assert len(reps) == 1 and reps[0].n == 10
    buf = io.StringIO()
    ll.write_moment_csv(reps, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "n,K,L,gamma_n,gamma_limit,discrepancy"
    assert lines[1].startswith("10,1,1,")
    with pytest.raises(ValueError):
        ll.moment_convergence_report(0, 0, [0, 5])
    with pytest.raises(ValueError):
        ll.moment_convergence_report(0, 0, [5], limit="other")


def test_trend_holds():
    assert ll.trend_holds([1.0, 0.5, 0.52, 0.1])
    assert not ll.trend_holds([1.0, 0.5, 0.6])
    assert ll.trend_holds([3.0])


# --- Parseval-type identity -------------------------------------------------


def test_parseval_weights():
    r = np.array([0, 1, 2])
    assert np.array_equal(ll.parseval_weight(0, r), [2, 1, 1])
    assert np.array_equal(ll.parseval_weight(1, r), [0, 1, 1])
    assert np.array_equal(ll.parseval_weight(2, r), [2, 1, 1])


def test_derivatives_of_T():
    z = np.linspace(-0.9, 0.9, 7)
    T, d1, d2 = ll.cheb_T_derivatives(z, 6, 2)
    th = np.arccos(z)
    # T_n' = n U_{n-1} = n sin(n t)/sin t
    assert d1 == pytest.approx(6 * np.sin(6 * th) / np.sin(th), abs=1e-11)
    poly = np.polynomial.chebyshev.Chebyshev.basis(6)
    assert T == pytest.approx(poly(z), abs=1e-13)
    assert d2 == pytest.approx(poly.deriv(2)(z), abs=1e-10)


def test_parseval_n1_by_hand():
    # (1/pi^2) int_{[0,2pi]^2} ((cos x + cos y)/2)^2 = (1/pi^2) * pi^2 = 1; rhs: w(1)w(0)(1/2)^2 * 2 = 1
    lhs, rhs = ll.verify_parseval(1, 0, 0, 64)
    assert lhs == pytest.approx(1.0, abs=1e-14)
    assert rhs == pytest.approx(1.0, abs=1e-14)


def test_parseval_n10_k0():
    t = ll.coeffs_sampling(10)
    w = ll.parseval_weight(0, np.arange(11))
    weighted = float(np.sum(np.outer(w, w) * t.a**2))
    lhs, rhs = ll.verify_parseval(10, 0, 0, 2048, table=t)
    assert rhs == pytest.approx(weighted, rel=1e-15)
    assert rhs >= t.mass
    assert lhs == pytest.approx(rhs, rel=1e-12)
    assert rhs == pytest.approx(2.060562133789061, rel=1e-12)


@pytest.mark.parametrize("K, L", [(1, 0), (1, 1), (2, 0), (2, 1), (2, 2)])
def test_parseval_higher_orders(K, L):
    lhs, rhs = ll.verify_parseval(10, K, L, 2048)
    assert lhs == pytest.approx(rhs, rel=1e-6)


def test_parseval_rejects_high_orders():
    with pytest.raises(ValueError):
        ll.verify_parseval(5, 3, 0, 64)


# --- spreading ----------------------------------------------------------------


def test_quantum_spreading_is_ballistic():
    q = [ll.mean_distance(ll.quantum_lattice_measure(n)) / n for n in (25, 50, 100)]
    assert q[0] == pytest.approx(0.2922134932396539, rel=1e-10)
    assert all(abs(x / q[0] - 1) <= 0.1 for x in q)


def test_walk_spreading_is_diffusive():
    w = [ll.mean_distance(ll.walk_lattice_measure(n)) / math.sqrt(n) for n in (25, 50, 100)]
    assert w[0] == pytest.approx(0.8889414677929398, rel=1e-10)
    assert all(abs(x / w[0] - 1) <= 0.1 for x in w)
    # mean distance over n shrinks for the walk
    assert w[2] / 10 < w[0] / 5


def test_walk_mass_is_one():
    assert ll.walk_lattice_measure(30).sum() == pytest.approx(1.0, abs=1e-12)
    assert ll.quantum_lattice_measure(30).sum() <= 1.0


def test_lattice_distances():
    d = ll.lattice_distances(1)
    assert d[1, 1] == 0 and d[0, 1] == 1 and d[0, 0] == pytest.approx(math.sqrt(2))
    assert gc.lattice_index(0, 0, 1) == 4
