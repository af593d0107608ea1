"""Surface tension: Legendre duality, Monge-Ampere, cone points."""

import math

import numpy as np
import pytest

from dimerlab.amoeba import ronkin_grid, suggest_window
from dimerlab.tension import (cusp_gaps, legendre_double, legendre_grid,
                              monge_ampere_residual, sigma_hessian_det,
                              slope_at, surface_tension,
                              surface_tension_grid)
from helpers import SMYTH, charpoly

_grids = {}


def grid_of(name, res=100, tol=1e-7):
    key = (name, res, tol)
    if key not in _grids:
        P = charpoly(name)
        _grids[key] = ronkin_grid(P, suggest_window(P), res, tol=tol)
    return _grids[key]


def test_sigma_at_the_symmetric_slope():
    # sup_x,y (x + y)/3 - F lands at the origin by symmetry, so
    # sigma(1/3, 1/3) = -F(0,0) = -m(1 - z - w)
    val = surface_tension(grid_of("honeycomb"), 1 / 3, 1 / 3)
    assert abs(val + SMYTH) < 1e-5


def test_sigma_vanishes_at_polygon_vertices():
    g = grid_of("honeycomb")
    for s, t in [(0, 0), (1, 0), (0, 1)]:
        assert abs(surface_tension(g, s, t, refine=False)) < 2e-2


def test_sigma_grid_support_and_convexity():
    sg = surface_tension_grid(grid_of("square_octagon"), resolution=60)
    assert sg.tol > 0
    inside = np.isfinite(sg.sigma)
    for i, s in enumerate(sg.ss):
        for j, t in enumerate(sg.ts):
            assert inside[i, j] == sg.polygon.contains(s, t, tol=1e-9)
    # convex along grid lines wherever three consecutive values are finite
    for arr in (sg.sigma, sg.sigma.T):
        with np.errstate(invalid="ignore"):
            d2 = arr[:, 2:] - 2 * arr[:, 1:-1] + arr[:, :-2]
        ok = np.isfinite(d2)
        assert d2[ok].min() > -2 * sg.tol


def test_legendre_grid_matches_direct_maximum():
    g = grid_of("honeycomb", res=60)
    ss = np.array([0.2, 1 / 3, 0.6])
    ts = np.array([0.25, 1 / 3])
    got = legendre_grid(g.F, g.xs, g.ys, ss, ts)
    X = g.xs[:, None]
    Y = g.ys[None, :]
    for i, s in enumerate(ss):
        for j, t in enumerate(ts):
            assert abs(got[i, j] - (s * X + t * Y - g.F).max()) < 1e-12


def test_double_transform_recovers_ronkin():
    g = grid_of("honeycomb", res=60)
    back = legendre_double(g)
    assert np.max(np.abs(back - g.F)) < 2 * g.tol


def test_monge_ampere_in_the_liquid_phase():
    P = charpoly("honeycomb")
    for (x, y) in [(0.0, 0.0), (0.3, 0.1)]:
        resid, info = monge_ampere_residual(P, x, y)
        assert abs(info["det"] * math.pi ** 2 - 1) < 0.05


def test_sigma_hessian_dual_value():
    det = sigma_hessian_det(grid_of("square_octagon"), -0.18, 0.07)
    assert abs(det / math.pi ** 2 - 1) < 0.10


def test_cone_point_versus_smooth_slope():
    gaps_cone = cusp_gaps(grid_of("square_octagon"), 0.0, 0.0,
                          deltas=(0.2, 0.1))
    assert min(gaps_cone) > 0.05          # gaseous slope: conical sigma
    gaps_smooth = cusp_gaps(grid_of("honeycomb"), 1 / 3, 1 / 3,
                            deltas=(0.2, 0.1))
    assert gaps_smooth[1] < gaps_smooth[0]
    assert gaps_smooth[1] < 0.5 * min(gaps_cone)


def test_slope_at_matches_argument_form():
    P = charpoly("honeycomb")
    (gx, gy), info = slope_at(P, 0.0, 0.0)
    assert info["liquid"]
    assert abs(gx - 1 / 3) < 1e-3 and abs(gy - 1 / 3) < 1e-3
    assert info["arg_form_distance"] < 1e-3
    _, info = slope_at(P, -4.0, -4.0)
    assert not info["liquid"]
