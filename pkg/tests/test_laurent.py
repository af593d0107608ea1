"""Laurent polynomial ring operations and Newton polygon geometry."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dimerlab.laurent import LaurentPoly2, NewtonPolygon, convex_hull
from helpers import charpoly

coeff_st = st.fractions(min_value=-9, max_value=9, max_denominator=8)
mono_st = st.tuples(st.integers(-4, 4), st.integers(-4, 4))
poly_st = st.dictionaries(mono_st, coeff_st, min_size=1, max_size=6) \
    .map(LaurentPoly2)

PTS = [(0.7 + 0.4j, -1.3 + 0.2j), (1.1 - 0.9j, 0.3 + 0.8j)]


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def test_constructor_drops_zeros_and_tracks_mode():
    P = LaurentPoly2({(0, 0): Fraction(1), (2, -1): Fraction(0)})
    assert P.terms == {(0, 0): Fraction(1)}
    assert P.exact
    Q = LaurentPoly2({(1, 1): 0.5})
    assert not Q.exact
    with pytest.raises(ValueError):
        LaurentPoly2({(0, 0): Fraction(1), (1, 0): 0.5})


@given(poly_st, poly_st)
@settings(max_examples=60, deadline=None)
def test_ring_identities_by_evaluation(A, B):
    for z, w in PTS:
        assert close((A + B)(z, w), A(z, w) + B(z, w))
        assert close((A - B)(z, w), A(z, w) - B(z, w))
        assert close((A * B)(z, w), A(z, w) * B(z, w), tol=1e-8)


@given(poly_st, st.integers(-3, 3), st.integers(-3, 3))
@settings(max_examples=40, deadline=None)
def test_shift_is_monomial_multiplication(A, a, b):
    for z, w in PTS:
        assert close(A.shift(a, b)(z, w), z ** a * w ** b * A(z, w))


@given(poly_st, st.sampled_from([(1, 1), (-1, 1), (1, -1), (-1, -1)]))
@settings(max_examples=40, deadline=None)
def test_substitute_signs_by_evaluation(A, signs):
    sz, sw = signs
    for z, w in PTS:
        assert close(A.substitute_signs(sz, sw)(z, w), A(sz * z, sw * w))


@given(poly_st, st.sampled_from(["z", "w"]), st.integers(2, 4))
@settings(max_examples=40, deadline=None)
def test_radix_split_reassembles(A, var, r):
    parts = A.radix_split(var, r)
    for z, w in PTS:
        if var == "z":
            got = sum(z ** i * parts[i](z ** r, w) for i in range(r))
        else:
            got = sum(w ** i * parts[i](z, w ** r) for i in range(r))
        assert close(got, A(z, w), tol=1e-8)


def test_derivatives_of_monomials():
    P = LaurentPoly2({(3, -2): Fraction(5)})
    assert P.dz() == LaurentPoly2({(2, -2): Fraction(15)})
    assert P.dw() == LaurentPoly2({(3, -3): Fraction(-10)})
    C = LaurentPoly2({(0, 0): Fraction(7)})
    assert C.dz().is_zero() and C.dw().is_zero()


@given(poly_st)
@settings(max_examples=40, deadline=None)
def test_json_round_trip_is_exact(A):
    B = LaurentPoly2.loads(A.dumps())
    assert B == A and B.exact == A.exact


def test_eval_real_signed_matches_direct():
    A = charpoly("square_octagon")
    xs = np.array([-2.0, 0.3, 1.7])
    ys = np.array([0.1, -1.1, 2.2])
    vals, scale = A.eval_real_signed(xs, ys, sz=-1, sw=1)
    for v, s, x, y in zip(vals, scale, xs, ys):
        direct = A(-np.exp(x), np.exp(y)).real
        assert close(v * np.exp(s), direct, tol=1e-12)


def test_exact_evaluation_stays_rational():
    A = charpoly("square_2x2")
    v = A(Fraction(1, 2), Fraction(-3))
    assert isinstance(v, Fraction)
    assert v == sum(c * Fraction(1, 2) ** j * Fraction(-3) ** k
                    for (j, k), c in A.terms.items())


def test_pretty_of_honeycomb():
    assert charpoly("honeycomb").pretty() == "1 - z - w"


@given(st.lists(mono_st, min_size=1, max_size=12))
@settings(max_examples=60, deadline=None)
def test_convex_hull_contains_all_points(pts):
    hull = convex_hull(pts)
    assert set(hull) <= set(pts)
    poly = NewtonPolygon(LaurentPoly2({p: Fraction(1) for p in pts}))
    for p in pts:
        assert poly.classify(*p) != "outside"


def test_newton_polygon_of_diamond():
    poly = NewtonPolygon(charpoly("square_4x4_weighted"))
    assert set(poly.vertices) == {(0, 0), (-2, 2), (-4, 0), (-2, -2)}
    assert poly.area == Fraction(8)
    assert set(poly.interior) == {(-1, 0), (-2, 0), (-3, 0), (-2, 1),
                                  (-2, -1)}
    # boundary includes vertices and the mid-edge lattice points
    assert set(poly.boundary) == {(0, 0), (-2, 2), (-4, 0), (-2, -2),
                                  (-1, 1), (-3, 1), (-1, -1), (-3, -1)}
    assert poly.classify(-1, 1) == "boundary"
    assert poly.classify(-2, 0) == "interior"
    assert poly.classify(0, 0) == "vertex"
    assert poly.classify(1, 1) == "outside"


def test_newton_polygon_lattice_counts():
    poly = NewtonPolygon(charpoly("square_octagon"))
    assert len(poly.interior) == 1 and len(poly.boundary) == 4
    assert poly.area == Fraction(2)
    tri = NewtonPolygon(charpoly("honeycomb"))
    assert tri.area == Fraction(1, 2)
    assert tri.interior == []


def test_newton_polygon_pick_consistency():
    # Pick: A = I + B/2 - 1 for every fixture polygon
    for name in ("honeycomb", "square", "square_2x2", "square_octagon",
                 "square_4x4_weighted"):
        poly = NewtonPolygon(charpoly(name))
        assert poly.area == len(poly.interior) + Fraction(len(poly.boundary), 2) - 1
