"""Surface tension as the Legendre dual of the Ronkin function.

sigma(s,t) = sup_{x,y} (s x + t y - F(x,y)) is finite exactly on the Newton
polygon.  The grid transform is a factored discrete Legendre transform;
pointwise values refine the grid supremum by a local convex minimization
with fresh Ronkin quadrature.
"""

from dataclasses import dataclass
import math

import numpy as np

from .laurent import NewtonPolygon
from .amoeba import RonkinGrid, ronkin, ronkin_gradient, ronkin_grid


@dataclass
class SurfaceTensionGrid:
    ss: np.ndarray
    ts: np.ndarray
    sigma: np.ndarray        # +inf outside the Newton polygon
    polygon: NewtonPolygon
    tol: float               # grid-sup discretization tolerance estimate


def legendre_grid(F, xs, ys, ss, ts):
    """max over the (xs, ys) grid of s x + t y - F, factored per variable."""
    A = np.empty((len(ss), len(ys)))
    for i, s in enumerate(ss):
        A[i] = (s * xs[:, None] - F).max(axis=0)
    out = np.empty((len(ss), len(ts)))
    for i in range(len(ss)):
        out[i] = (ts[:, None] * ys[None, :] + A[i][None, :]).max(axis=1)
    return out


def surface_tension_grid(grid: RonkinGrid, resolution=160, pad=0.05):
    """sigma on a slope grid covering N(P); outside the polygon set to +inf.

    The reported tolerance combines the Ronkin quadrature tolerance with the
    x-grid discretization gap h^2 kappa / 8 measured from second differences."""
    poly = NewtonPolygon(grid.P)
    verts = np.array(poly.vertices, dtype=float)
    s0, s1 = verts[:, 0].min() - pad, verts[:, 0].max() + pad
    t0, t1 = verts[:, 1].min() - pad, verts[:, 1].max() + pad
    ss = np.linspace(s0, s1, resolution)
    ts = np.linspace(t0, t1, resolution)
    sig = legendre_grid(grid.F, grid.xs, grid.ys, ss, ts)
    mask = np.ones((resolution, resolution), dtype=bool)
    for i, s in enumerate(ss):
        for j, t in enumerate(ts):
            mask[i, j] = poly.contains(s, t, tol=1e-9)
    sig = np.where(mask, sig, np.inf)
    hx = grid.xs[1] - grid.xs[0]
    hy = grid.ys[1] - grid.ys[0]
    kx = np.abs(np.diff(grid.F, 2, axis=0)).max() / hx ** 2
    ky = np.abs(np.diff(grid.F, 2, axis=1)).max() / hy ** 2
    tol = grid.tol + (hx ** 2 * kx + hy ** 2 * ky) / 8.0
    return SurfaceTensionGrid(ss, ts, sig, poly, tol)


def surface_tension(grid: RonkinGrid, s, t, refine=True, tol=1e-9):
    """sigma(s,t): grid supremum plus local refinement of the dual point.

    For slopes interior to N(P) the supremum is attained at a finite (x,y);
    the refinement minimizes F - s x - t y from the grid argmax.  At vertex
    slopes the minimizer runs to infinity and the grid value (a lower bound
    converging like the window tail) is returned."""
    obj = grid.F - s * grid.xs[:, None] - t * grid.ys[None, :]
    ix, iy = np.unravel_index(np.argmin(obj), obj.shape)
    best = -obj[ix, iy]
    if not refine:
        return best
    from scipy.optimize import minimize

    span = max(grid.xs[-1] - grid.xs[0], grid.ys[-1] - grid.ys[0])

    def f(p):
        return ronkin(grid.P, p[0], p[1], tol=tol) - s * p[0] - t * p[1]

    res = minimize(f, np.array([grid.xs[ix], grid.ys[iy]]),
                   method="Nelder-Mead",
                   options={"xatol": 1e-7, "fatol": 1e-12, "maxfev": 200})
    x, y = res.x
    if abs(x) > abs(grid.xs[0]) + 0.5 * span or \
            abs(y) > abs(grid.ys[0]) + 0.5 * span:
        return best
    return max(best, -res.fun)


def legendre_double(grid: RonkinGrid):
    """Discrete double Legendre transform of the F grid.

    Equal to the lower convex envelope of the sampled graph, evaluated at
    the grid points: the maximum over lower-hull facet planes.  For data
    convex up to quadrature noise this reproduces F up to that noise."""
    from scipy.spatial import ConvexHull

    X, Y = np.meshgrid(grid.xs, grid.ys, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel(), grid.F.ravel()])
    # lift corners up high so the upper hull never shadows data facets
    hull = ConvexHull(pts, qhull_options="Qt")
    eq = hull.equations                     # n . p + off = 0, n outward
    lower = eq[eq[:, 2] < -1e-12]           # facets facing down
    # plane z = -(a x + b y + off)/c supports all points from below
    a, b, c, off = lower[:, 0], lower[:, 1], lower[:, 2], lower[:, 3]
    Fhat = np.full(X.size, -np.inf)
    P = np.column_stack([X.ravel(), Y.ravel()])
    chunk = max(1, int(2e7) // max(1, len(lower)))
    for lo in range(0, len(P), chunk):
        sl = P[lo:lo + chunk]
        planes = -(sl[:, 0:1] * a[None, :] + sl[:, 1:2] * b[None, :]
                   + off[None, :]) / c[None, :]
        Fhat[lo:lo + chunk] = planes.max(axis=1)
    return Fhat.reshape(X.shape)


def slope_at(P, Bx, By, h=1e-4, tol=1e-10):
    """Average slope (s,t) = grad F at field (Bx, By), with a consistency
    check against the torus-root argument form in the liquid phase."""
    from .amoeba import amoeba_contains, torus_roots

    gx, gy = ronkin_gradient(P, Bx, By, h=h)
    info = {"slope": (gx, gy)}
    inside, margin = amoeba_contains(P, Bx, By)
    info["liquid"] = bool(inside) and not margin == 0.0
    if info["liquid"]:
        roots = [r for r in torus_roots(P, Bx, By) if not r.node]
        if roots:
            r = roots[0]
            aw = math.atan2(r.w0.imag, r.w0.real)
            az = math.atan2(r.z0.imag, r.z0.real)
            cands = []
            for u, v in ((aw, az), (az, aw)):
                for e1 in (1, -1):
                    for e2 in (1, -1):
                        for m in (-2, 0, 2):
                            for n in (-2, 0, 2):
                                cands.append((e1 * u / math.pi + m,
                                              e2 * v / math.pi + n))
            d = min(math.hypot(cs - gx, ct - gy) for cs, ct in cands)
            info["arg_form_distance"] = d
    return (gx, gy), info


def monge_ampere_residual(P, x, y, h=0.01, tol=1e-10):
    """det Hess F(x,y) - 1/pi^2 by centered finite differences."""
    def F(a, b):
        return ronkin(P, a, b, tol=tol)

    f0 = F(x, y)
    fxx = (F(x + h, y) - 2 * f0 + F(x - h, y)) / h ** 2
    fyy = (F(x, y + h) - 2 * f0 + F(x, y - h)) / h ** 2
    fxy = (F(x + h, y + h) - F(x + h, y - h) - F(x - h, y + h)
           + F(x - h, y - h)) / (4 * h ** 2)
    det = fxx * fyy - fxy ** 2
    return det - 1.0 / math.pi ** 2, {"det": det, "fxx": fxx, "fyy": fyy,
                                      "fxy": fxy}


def sigma_hessian_det(grid: RonkinGrid, s, t, ds=0.02):
    """det Hess sigma at (s,t) by finite differences of refined values.

    At slopes dual to liquid points this should equal pi^2 (the inverse of
    the Monge-Ampere value of F)."""
    vals = {}
    for (a, b) in [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1),
                   (1, 1), (1, -1), (-1, 1), (-1, -1)]:
        vals[(a, b)] = surface_tension(grid, s + a * ds, t + b * ds)
    sxx = (vals[(1, 0)] - 2 * vals[(0, 0)] + vals[(-1, 0)]) / ds ** 2
    stt = (vals[(0, 1)] - 2 * vals[(0, 0)] + vals[(0, -1)]) / ds ** 2
    sxt = (vals[(1, 1)] - vals[(1, -1)] - vals[(-1, 1)]
           + vals[(-1, -1)]) / (4 * ds ** 2)
    return sxx * stt - sxt ** 2


def cusp_gaps(grid: RonkinGrid, s, t, direction=(1.0, 0.0),
              deltas=(0.2, 0.1, 0.05, 0.025)):
    """Directional second differences of sigma at (s,t), divided by delta.

    At a cone point of sigma (gaseous slope) the ratio converges to the
    positive one-sided derivative gap; at a smooth slope it decays linearly
    in delta."""
    dx, dy = direction
    norm = math.hypot(dx, dy)
    dx, dy = dx / norm, dy / norm
    mid = surface_tension(grid, s, t)
    out = []
    for d in deltas:
        plus = surface_tension(grid, s + d * dx, t + d * dy)
        minus = surface_tension(grid, s - d * dx, t - d * dy)
        out.append((plus + minus - 2 * mid) / d)
    return out
