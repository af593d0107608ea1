"""Characteristic polynomials, Kasteleyn signs, torus partition functions."""

from collections import Counter, defaultdict
from fractions import Fraction

import numpy as np
import pytest

from dimerlab.charpoly import (characteristic_polynomial,
                               characteristic_polynomial_raw,
                               face_sign_rule, kasteleyn_signs,
                               log_z_per_domain, newton_polygon,
                               partition_function_torus, poly_enlarged,
                               poly_enlarged_symbolic, reference_exponent)
from dimerlab.laurent import LaurentPoly2
from dimerlab.lattice import enumerate_matchings, expand_torus
from helpers import (CANONICAL, FIXTURE_NAMES, SMYTH, TWO_CATALAN_PI, Z_N1,
                     Z_N2, charpoly, domain)


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_canonical_polynomials(name):
    expected = LaurentPoly2({m: Fraction(c) for m, c in CANONICAL[name].items()})
    P = charpoly(name)
    assert P == expected
    assert P.exact


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_reference_class_sits_at_origin(name):
    # normalization shifts the reference matching's monomial to (0,0)
    P = charpoly(name)
    assert P.coeff(0, 0) > 0
    rx, ry = reference_exponent(domain(name))
    Praw = characteristic_polynomial_raw(domain(name))
    assert Praw.coeff(rx, ry) != 0


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_face_sign_rule_parity(name):
    """Product of edge signs around a face with 2m edges is -(-1)^m."""
    d = domain(name)
    signs = face_sign_rule(d)
    assert set(signs) <= {1, -1}
    for face in d.faces:
        prod = 1
        for e, _, _ in face.darts:
            prod *= signs[e]
        m = face.degree // 2
        assert prod == -((-1) ** m)


@pytest.mark.parametrize("name", ["honeycomb", "square"])
def test_signed_enumeration_reproduces_coefficients(name):
    P = charpoly(name)
    acc = defaultdict(Fraction)
    for r in enumerate_matchings(expand_torus(domain(name), 1)):
        j, k = r.height_change
        sgn = -1 if (j * k + j + k) % 2 else 1
        acc[(j, k)] += sgn * r.matching.weight_exact()
    assert {m: c for m, c in acc.items() if c} == P.terms


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_partition_function_frozen_values(name):
    assert partition_function_torus(domain(name), 1) == Z_N1[name]
    assert partition_function_torus(domain(name), 2) == Z_N2[name]


def test_partition_function_float_mode_agrees():
    d = domain("square_octagon")
    exact = partition_function_torus(d, 2, prefer_exact=True)
    approx = partition_function_torus(d, 2, prefer_exact=False)
    assert isinstance(exact, Fraction)
    assert abs(float(exact) - approx) < 1e-6 * float(exact)


def test_partition_function_odd_n_is_float_route():
    # 5 is not a product of 2s and 3s, so the symbolic route cannot run
    z5 = partition_function_torus(domain("honeycomb"), 5)
    recs = enumerate_matchings(expand_torus(domain("honeycomb"), 5))
    assert abs(z5 - len(recs)) < 1e-6 * len(recs)


def test_doubling_transform_hand_expanded():
    # prod over u^2=z, v^2=w of (1 - u - v)  =  (1 + w - z)^2 - 4w
    P2 = poly_enlarged_symbolic(charpoly("honeycomb"), 2)
    assert P2 == LaurentPoly2({(0, 0): 1, (2, 0): 1, (0, 2): 1,
                               (1, 0): -2, (0, 1): -2, (1, 1): -2})


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_symbolic_enlargement_matches_numeric(n):
    Praw = characteristic_polynomial_raw(domain("square_octagon"))
    Pn = poly_enlarged_symbolic(Praw, n)
    rng = np.random.default_rng(n)
    for _ in range(5):
        z = np.exp(rng.uniform(-0.4, 0.4) + 1j * rng.uniform(0, 2 * np.pi))
        w = np.exp(rng.uniform(-0.4, 0.4) + 1j * rng.uniform(0, 2 * np.pi))
        a = Pn.to_float()(z, w)
        b = poly_enlarged(Praw, n, z, w)
        assert abs(a - b) < 1e-9 * max(1.0, abs(b))


def test_newton_polygon_helper():
    poly = newton_polygon(charpoly("square_octagon"))
    assert set(poly.vertices) == {(1, 0), (0, 1), (-1, 0), (0, -1)}


def test_spin_structure_metadata():
    ks = kasteleyn_signs(domain("honeycomb"))
    assert set(ks.signs) <= {1, -1}
    assert ks.base_spin in [(s, t) for s in (1, -1) for t in (1, -1)]


def test_free_energy_against_closed_forms():
    """Torus-average log|P| per domain vs classical lattice constants."""
    assert abs(log_z_per_domain(domain("honeycomb")) - SMYTH) < 1e-4
    assert abs(log_z_per_domain(domain("square")) - TWO_CATALAN_PI) < 1e-4


def test_raw_and_normalized_agree_up_to_normalization():
    # normalization = shift by -reference exponent, sign substitution,
    # global sign; nothing else may change
    for name in FIXTURE_NAMES:
        rx, ry = reference_exponent(domain(name))
        Praw = characteristic_polynomial_raw(domain(name)).shift(-rx, -ry)
        P = charpoly(name)
        match = any(Praw.substitute_signs(sz, sw) in (P, P.scale(-1))
                    for sz in (1, -1) for sw in (1, -1))
        assert match, name
