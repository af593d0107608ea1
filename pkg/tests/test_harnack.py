"""Maximality checks: transfer-chain identity, spectral pattern, 2-to-1
covering, amoeba area, and a reducible counterexample that must fail."""

import numpy as np
import pytest

from dimerlab import harnack
from dimerlab.charpoly import characteristic_polynomial
from dimerlab.laurent import LaurentPoly2
from dimerlab import amoeba as am

from helpers import charpoly


def _reducible():
    # product of two axis diamonds with constants 5 and 6: a real but
    # non-maximal curve (two conjugate pairs over overlap points)
    base = {(0, 0): 5, (1, 0): 1, (-1, 0): 1, (0, 1): 1, (0, -1): 1}
    shifted = dict(base)
    shifted[(0, 0)] = 6
    return LaurentPoly2(base) * LaurentPoly2(shifted)


def test_transfer_chain_identity_random_weights():
    for n in (1, 2, 3):
        rng = np.random.default_rng(40 + n)
        wa, wb, wc = (rng.uniform(0.5, 2.0, (n, n)) for _ in range(3))
        chain = harnack.transfer_chain(wa, wb, wc)
        res = harnack.charpoly_identity(chain, seed=n)
        assert res["match"]
        assert res["max_rel_err"] < 1e-10
        assert res["points"] == (n + 2) ** 2


def test_transfer_chain_input_validation():
    ones = np.ones((2, 2))
    with pytest.raises(ValueError):
        harnack.transfer_chain(ones, np.ones((3, 3)), ones)
    with pytest.raises(ValueError):
        harnack.transfer_chain(ones, ones, 0.0 * ones)


def test_eigenvalue_pattern_random_trials():
    for trial in range(25):
        rng = np.random.default_rng(1000 + trial)
        wa, wb, wc = (np.exp(rng.normal(0, 0.5, (3, 3))) for _ in range(3))
        rep = harnack.eigenvalue_pattern_check(harnack.transfer_chain(wa, wb, wc))
        assert rep["applicable"]
        assert rep["factor_minors_ok"]
        assert rep["ok"], rep


def test_two_to_one_point_statuses():
    assert harnack.two_to_one_point(charpoly("honeycomb"), 0.1, 0.05)["status"] == "pair"
    res = harnack.two_to_one_point(charpoly("square_2x2"), 0.0, 0.0)
    assert res["status"] == "node"
    assert res["count"] == 1
    bad = harnack.two_to_one_point(_reducible(), 1.61, 0.3)
    assert bad["status"] == "violation"
    assert bad["count"] == 4


def test_two_to_one_check_on_fixture():
    chk = harnack.two_to_one_check(charpoly("honeycomb"), samples=30, seed=4)
    assert chk["ok"]
    assert chk["pairs"] == 30 and chk["nodes"] == 0


def test_sample_interior_respects_margin():
    P = charpoly("honeycomb")
    pts = harnack.sample_interior(P, 50, seed=3, margin=0.08)
    assert len(pts) == 50
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    for dx, dy in ((0, 0), (0.08, 0), (-0.08, 0), (0, 0.08), (0, -0.08)):
        inside, _ = am.amoeba_contains(P, xs + dx, ys + dy)
        assert inside.all()


@pytest.mark.slow
def test_amoeba_area_honeycomb():
    P = charpoly("honeycomb")
    ar = harnack.amoeba_area(P, samples=400_000, seed=2)
    assert abs(ar.lattice_bound - np.pi ** 2 / 2) < 1e-12
    # tentacle-tail truncation is well below this at the default padding
    assert abs(ar.area - ar.lattice_bound) < 5 * ar.stderr + 0.01 * ar.lattice_bound


@pytest.mark.slow
def test_maximality_report_with_chain():
    chain = harnack.transfer_chain(*(np.full((2, 2), 1.0) for _ in range(3)))
    P = characteristic_polynomial(chain.domain())
    rep = harnack.maximality_report(P, seed=0, two_to_one_samples=40,
                                    area_samples=400_000, chain=chain)
    assert rep["agree"]
    assert all(v["ok"] for v in rep["checks"].values())
    assert rep["violations"] == []


@pytest.mark.slow
def test_reducible_curve_fails_area_bound():
    rep = harnack.maximality_report(_reducible(), seed=0,
                                    two_to_one_samples=20,
                                    area_samples=200_000)
    assert not rep["checks"]["area"]["ok"]
    assert not rep["agree"]
    assert rep["violations"]
