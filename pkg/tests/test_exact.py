"""Exact linear algebra helpers: rational determinants, GF(2) solving,
Lagrange interpolation."""

from fractions import Fraction

import numpy as np
from hypothesis import given, settings, strategies as st

from dimerlab.exact import det_fraction, gf2_solve, lagrange_coeffs_1d


def test_det_small_known():
    assert det_fraction([[Fraction(2)]]) == 2
    assert det_fraction([[1, 2], [3, 4]]) == -2
    assert det_fraction([[0, 1, 0], [0, 0, 1], [1, 0, 0]]) == 1
    assert det_fraction([]) == 1          # empty product convention


@given(st.integers(0, 10 ** 6))
@settings(max_examples=30, deadline=None)
def test_det_matches_numpy_on_integer_matrices(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    A = rng.integers(-5, 6, size=(n, n))
    exact = det_fraction([[Fraction(int(v)) for v in row] for row in A])
    assert exact == round(float(np.linalg.det(A.astype(float))))


def test_det_multiplicative():
    rng = np.random.default_rng(3)
    A = rng.integers(-4, 5, size=(4, 4))
    B = rng.integers(-4, 5, size=(4, 4))
    fa = [[Fraction(int(v)) for v in r] for r in A]
    fb = [[Fraction(int(v)) for v in r] for r in B]
    fab = [[sum(fa[i][k] * fb[k][j] for k in range(4)) for j in range(4)]
           for i in range(4)]
    assert det_fraction(fab) == det_fraction(fa) * det_fraction(fb)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=40, deadline=None)
def test_gf2_solve_solves_consistent_systems(seed):
    rng = np.random.default_rng(seed)
    nvars = int(rng.integers(1, 9))
    nrows = int(rng.integers(1, 9))
    rows = [list(np.flatnonzero(rng.integers(0, 2, nvars)))
            for _ in range(nrows)]
    planted = rng.integers(0, 2, nvars)
    rhs = [int(sum(planted[j] for j in r) % 2) for r in rows]
    x = gf2_solve(rows, rhs, nvars)
    assert x is not None
    for r, b in zip(rows, rhs):
        assert sum(x[j] for j in r) % 2 == b


def test_gf2_solve_reports_inconsistency():
    # x0 = 0 and x0 = 1 cannot both hold
    assert gf2_solve([[0], [0]], [0, 1], 2) is None


def test_lagrange_recovers_polynomial_exactly():
    cs = [Fraction(3), Fraction(-1, 2), Fraction(0), Fraction(7, 3)]
    xs = [Fraction(k) for k in (-2, -1, 1, 4)]
    ys = [sum(c * x ** i for i, c in enumerate(cs)) for x in xs]
    assert lagrange_coeffs_1d(xs, ys) == cs


@given(st.integers(0, 10 ** 6))
@settings(max_examples=30, deadline=None)
def test_lagrange_round_trip(seed):
    rng = np.random.default_rng(seed)
    deg = int(rng.integers(1, 6))
    cs = [Fraction(int(a), int(b)) for a, b in
          zip(rng.integers(-9, 10, deg + 1), rng.integers(1, 7, deg + 1))]
    xs = [Fraction(int(v)) for v in
          rng.choice(np.arange(-8, 9), size=deg + 1, replace=False)]
    ys = [sum(c * x ** i for i, c in enumerate(cs)) for x in xs]
    assert lagrange_coeffs_1d(xs, ys) == cs
