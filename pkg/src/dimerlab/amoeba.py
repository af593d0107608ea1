"""Ronkin function, amoeba membership, complement census, phase diagram.

The Ronkin function F(x,y) is the average of log|P| over the torus of radii
(e^x, e^y).  The inner integral over the z-circle is done exactly by Jensen's
formula in the roots of the z-slice polynomial; the outer phi integral by
adaptive trapezoid sums (spectrally accurate away from the amoeba boundary).
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .laurent import LaurentPoly2, NewtonPolygon


def _slice_root_data(P, y, phis):
    """Per-phi Jensen data of the z-slice at w = e^(y+i*phi).

    Returns a list of (jmin_eff, loglead, logroots): for each phi the
    effective lowest z-power, log|leading coeff|, and log|root moduli|.
    Full-degree slices are diagonalized in one batched companion-matrix
    eigenvalue call; degree drops fall back to np.roots per slice.
    """
    jmin, jmax, kmin, kmax = P.degree_box()
    mono = np.array(P.support())
    coeffs = np.array([float(P.terms[tuple(m)]) for m in mono])
    ws = np.exp(y + 1j * np.asarray(phis))
    # slice coefficient matrix: rows phi, cols z-powers jmin..jmax
    C = np.zeros((len(ws), jmax - jmin + 1), dtype=complex)
    for (j, k), c in zip(mono, coeffs):
        C[:, j - jmin] += c * ws ** k
    top = np.abs(C).max()
    d = C.shape[1] - 1
    full = (np.abs(C[:, 0]) > 1e-13 * top) & (np.abs(C[:, -1]) > 1e-13 * top)
    out = [None] * len(ws)
    if d >= 1 and full.any():
        rows = C[full]
        comp = np.zeros((len(rows), d, d), dtype=complex)
        comp[:, 1:, :-1] = np.eye(d - 1)
        comp[:, :, -1] = -rows[:, :-1] / rows[:, -1:]
        ev = np.linalg.eigvals(comp)
        lr = np.log(np.abs(ev))
        ll = np.log(np.abs(rows[:, -1]))
        for pos, i in enumerate(np.nonzero(full)[0]):
            out[i] = (jmin, ll[pos], lr[pos])
    for i in np.nonzero(~full)[0]:
        row = C[i]
        nz = np.abs(row) > 1e-13 * top
        if not nz.any():
            raise ArithmeticError("slice polynomial vanished identically")
        lo = int(np.argmax(nz))
        hi = len(row) - int(np.argmax(nz[::-1])) - 1
        poly = row[lo:hi + 1]
        roots = np.roots(poly[::-1]) if hi > lo else np.array([])
        out[i] = (jmin + lo, math.log(abs(poly[-1])),
                  np.log(np.abs(roots)))
    return out


def _row_values(data, xs):
    """Ronkin integrand averaged over phi for each x in xs (Jensen form)."""
    xs = np.asarray(xs, dtype=float)
    nphi = len(data)
    jmins = np.array([d[0] for d in data], dtype=float)
    logleads = np.array([d[1] for d in data])
    allroots = np.concatenate([d[2] for d in data]) if nphi else np.array([])
    base = (jmins.mean()) * xs + logleads.mean()
    if len(allroots):
        sroots = np.sort(allroots)
        csum = np.concatenate([[0.0], np.cumsum(sroots)])
        total = csum[-1]
        idx = np.searchsorted(sroots, xs)
        # sum over roots of max(x, logroot) = x*#(roots<=x) + sum of larger
        contrib = xs * idx + (total - csum[idx])
        base = base + contrib / nphi
    return base


def ronkin_row(P, y, xs, tol=1e-9, nphi0=64, max_nphi=8192):
    """F(x, y) for an array of x at fixed y, with adaptive phi resolution.

    Returns (values, error estimate)."""
    Pf = P.to_float()
    nphi = nphi0
    prev = None
    while True:
        phis = (np.arange(nphi) + 0.5) * (2 * np.pi / nphi)
        vals = _row_values(_slice_root_data(Pf, y, phis), xs)
        if prev is not None:
            err = np.max(np.abs(vals - prev))
            if err < tol or nphi >= max_nphi:
                return vals, err
        prev = vals
        nphi *= 2


def ronkin(P, x, y, order=None, tol=1e-11):
    """Ronkin function of P at (x,y).

    With `order` given, a fixed midpoint rule of that many phi nodes.
    Otherwise the integrand's kinks (slice roots crossing |z| = e^x) are
    located by bisection and each smooth piece is integrated by adaptive
    Gauss-Legendre, which converges spectrally."""
    Pf = P.to_float()
    if order is not None:
        phis = (np.arange(order) + 0.5) * (2 * np.pi / order)
        return float(_row_values(_slice_root_data(Pf, y, phis),
                                 np.array([x]))[0])

    def f(phis):
        data = _slice_root_data(Pf, y, phis)
        return np.array([d[0] * x + d[1] + np.maximum(x, d[2]).sum()
                         for d in data])

    def above_count(phi):
        d = _slice_root_data(Pf, y, [phi])[0]
        return len(d[2]) - int(np.searchsorted(np.sort(d[2]), x))

    # conjugation symmetry: integrate over [0, pi] only
    nscan = 256
    grid = np.linspace(0.0, np.pi, nscan + 1)
    scan = _slice_root_data(Pf, y, grid)
    counts = [len(d[2]) - int(np.searchsorted(np.sort(d[2]), x))
              for d in scan]
    cuts = [0.0]
    for i in range(nscan):
        if counts[i] != counts[i + 1]:
            lo, hi = grid[i], grid[i + 1]
            clo = counts[i]
            for _ in range(52):
                mid = 0.5 * (lo + hi)
                if above_count(mid) == clo:
                    lo = mid
                else:
                    hi = mid
            cuts.append(0.5 * (lo + hi))
    cuts.append(np.pi)

    total = 0.0
    worst = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a < 1e-14:
            continue
        val, err = _gauss_piece(f, a, b, tol * (b - a) / np.pi)
        total += val
        worst = max(worst, err)
    return float(total / np.pi)


def _gauss_piece(f, a, b, tol, n0=24, nmax=192):
    n = n0
    prev = None
    while True:
        xq, wq = np.polynomial.legendre.leggauss(n)
        phis = 0.5 * (b - a) * xq + 0.5 * (a + b)
        val = 0.5 * (b - a) * float((wq * f(phis)).sum())
        if prev is not None and (abs(val - prev) < tol or n >= nmax):
            return val, abs(val - prev)
        prev = val
        n *= 2


def ronkin_gradient(P, x, y, h=1e-5):
    fx = ronkin(P, x + h, y) - ronkin(P, x - h, y)
    fy = ronkin(P, x, y + h) - ronkin(P, x, y - h)
    return fx / (2 * h), fy / (2 * h)


@dataclass
class RonkinGrid:
    """F sampled on a rectangular window; carries P for pointwise refinement."""
    P: LaurentPoly2
    xs: np.ndarray
    ys: np.ndarray
    F: np.ndarray          # shape (len(xs), len(ys))
    tol: float             # quadrature tolerance of each entry

    @property
    def window(self):
        return (self.xs[0], self.xs[-1], self.ys[0], self.ys[-1])

    def gradient(self):
        dFdx = np.gradient(self.F, self.xs, axis=0)
        dFdy = np.gradient(self.F, self.ys, axis=1)
        return dFdx, dFdy


def ronkin_grid(P, window, resolution, tol=1e-9):
    """RonkinGrid over window=(x0,x1,y0,y1) at `resolution` points per axis."""
    x0, x1, y0, y1 = window
    xs = np.linspace(x0, x1, resolution)
    ys = np.linspace(y0, y1, resolution)
    F = np.empty((resolution, resolution))
    worst = 0.0
    for jy, y in enumerate(ys):
        vals, err = ronkin_row(P, y, xs, tol=tol)
        F[:, jy] = vals
        worst = max(worst, err)
    return RonkinGrid(P, xs, ys, F, worst)


# ---------------------------------------------------------------------------
# Membership


def amoeba_contains(P, x, y):
    """(inside, margin): inside iff prod over signs of P(+-e^x, +-e^y) <= 0.

    The margin is the signed product, computed in log space so deep frozen
    regions do not overflow."""
    Pf = P.to_float()
    sign = 1.0
    logmag = 0.0
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    for sz in (1, -1):
        for sw in (1, -1):
            val, scale = Pf.eval_real_signed(x, y, sz, sw)
            sign = sign * np.sign(val)
            logmag = logmag + np.log(np.maximum(np.abs(val), 1e-300)) + scale
    margin = sign * np.exp(np.minimum(logmag, 700.0))
    return margin <= 0, margin


def _slice_roots_at(Pf, y, phi):
    jmin, loglead, _ = (None, None, None)
    data = _slice_root_data(Pf, y, [phi])[0]
    return data


@dataclass
class TorusRoot:
    z0: complex
    w0: complex
    alpha: complex   # dP/dz of the field-shifted polynomial at the root
    beta: complex    # dP/dw
    node: bool = False


def torus_roots(P, x, y, nscan=720, tol=1e-11):
    """Roots of P(e^x z, e^y w) on the unit torus (|z|=|w|=1).

    Scans w over the circle, tracks |z|-crossings of the slice roots by sign
    change and bisection.  A real node at (+-1,+-1) is detected directly from
    vanishing value and gradient."""
    Pf = P.to_float()
    shifted = LaurentPoly2({(j, k): c * math.exp(j * x + k * y)
                            for (j, k), c in Pf.terms.items()})
    Pz, Pw = shifted.dz(), shifted.dw()
    scale = max(abs(c) for c in shifted.terms.values())

    roots = []
    # node check at the four real points
    for z0 in (1.0, -1.0):
        for w0 in (1.0, -1.0):
            v = shifted(z0, w0)
            a, b = Pz(z0, w0), Pw(z0, w0)
            if abs(v) < 1e-9 * scale and abs(a) < 1e-6 * scale \
                    and abs(b) < 1e-6 * scale:
                roots.append(TorusRoot(complex(z0), complex(w0), a, b, True))

    # track branches over the scan: roots of the slice polynomial
    def zroots(phi):
        w = np.exp(1j * phi)
        jlo, coeffs = shifted.slice_in_z(w)
        c = np.asarray(coeffs)
        top = np.abs(c).max()
        nz = np.abs(c) > 1e-13 * top
        lo = int(np.argmax(nz))
        hi = len(c) - int(np.argmax(nz[::-1])) - 1
        if hi == lo:
            return np.array([])
        return np.roots(c[lo:hi + 1][::-1])

    phis = np.linspace(0.0, 2 * np.pi, nscan, endpoint=False)
    prev = None
    prev_phi = None
    for phi in phis:
        cur = zroots(phi)
        if prev is not None and len(cur) == len(prev) and len(cur):
            # match branches by nearest neighbor to previous values
            order = _match(prev, cur)
            cur = cur[order]
            f0 = np.log(np.abs(prev))
            f1 = np.log(np.abs(cur))
            for i in range(len(cur)):
                if f0[i] == 0.0 or f1[i] == 0.0 or (f0[i] < 0) != (f1[i] < 0):
                    r = _bisect_crossing(zroots, prev_phi, phi, prev[i], i)
                    if r is not None:
                        roots.append(r)
        prev = cur
        prev_phi = phi

    # finalize: alpha, beta, dedupe
    out = []
    for r in roots:
        if r.node:
            out.append(r)
            continue
        z0, w0 = r
        a, b = Pz(z0, w0), Pw(z0, w0)
        out.append(TorusRoot(z0, w0, a, b, False))
    dedup = []
    for r in out:
        if not any(abs(r.z0 - s.z0) + abs(r.w0 - s.w0) < 1e-6 for s in dedup):
            dedup.append(r)
    return dedup


def _match(prev, cur):
    """Assignment of root branches minimizing total displacement."""
    from scipy.optimize import linear_sum_assignment

    d = np.abs(prev[:, None] - cur[None, :])
    _, cols = linear_sum_assignment(d)
    return cols


def _bisect_crossing(zroots_fn, phi0, phi1, zref, branch_hint, iters=60):
    """Bisect on phi for log|z(phi)| = 0 along the branch nearest zref."""
    def branch_val(phi, ref):
        rs = zroots_fn(phi)
        if not len(rs):
            return None, None
        i = int(np.argmin(np.abs(rs - ref)))
        return rs[i], math.log(abs(rs[i]))

    z0, f0 = branch_val(phi0, zref)
    z1, f1 = branch_val(phi1, zref if z0 is None else z0)
    if f0 is None or f1 is None:
        return None
    if f0 == 0.0:
        return _Root(z0 / abs(z0), np.exp(1j * phi0))
    if f0 * f1 > 0:
        return None
    ref = z0
    for _ in range(iters):
        mid = 0.5 * (phi0 + phi1)
        zm, fm = branch_val(mid, ref)
        if fm is None:
            return None
        if fm == 0.0 or abs(fm) < 1e-14:
            phi0, z0 = mid, zm
            break
        if (fm < 0) == (f0 < 0):
            phi0, f0, z0 = mid, fm, zm
        else:
            phi1, f1 = mid, fm
        ref = zm
    zc = z0 / abs(z0)
    return _Root(zc, np.exp(1j * phi0))


class _Root(tuple):
    """(z0, w0) pair standing in for a TorusRoot before derivative fill-in."""
    def __new__(cls, z0, w0):
        return super().__new__(cls, (z0, w0))

    node = False


# ---------------------------------------------------------------------------
# Phase diagram


@dataclass
class Component:
    label: int
    kind: str           # "bounded" | "semi-bounded" | "unbounded"
    slope: tuple        # lattice point of N(P)
    slope_residual: float
    cells: int


@dataclass
class PhaseDiagram:
    P: LaurentPoly2
    xs: np.ndarray
    ys: np.ndarray
    inside: np.ndarray          # boolean raster
    labels: np.ndarray          # 0 = amoeba, k>0 = complement component
    components: list
    polygon: NewtonPolygon

    def phase_at(self, x, y):
        ix = int(np.clip(np.searchsorted(self.xs, x), 0, len(self.xs) - 1))
        iy = int(np.clip(np.searchsorted(self.ys, y), 0, len(self.ys) - 1))
        lab = self.labels[ix, iy]
        if lab == 0:
            return "liquid"
        comp = self.components[lab - 1]
        return "gaseous" if comp.kind == "bounded" else "frozen"


def suggest_window(P, pad=1.5):
    """Window sized from coefficient scale so every tentacle is entered."""
    Pf = P.to_float()
    cmax = max(abs(c) for c in Pf.terms.values())
    cmin = min(abs(c) for c in Pf.terms.values())
    span = math.log(cmax / cmin) + math.log(len(Pf.terms)) + pad
    R = max(3.0, span)
    return (-R, R, -R, R)


def amoeba_grid(P, window=None, resolution=400, grad_tol=0.2):
    """Raster the amoeba and classify complement components.

    Complement cells are grouped by the rounded Ronkin gradient, which on a
    complement component is exactly a lattice point of N(P).  Grouping by
    slope rather than raster adjacency keeps components separate even where
    the tentacle arms between them are thinner than a raster cell.  Corner
    points are unbounded (frozen cones), other boundary points semi-bounded
    (frozen strips), interior points bounded (gaseous holes)."""
    from scipy import ndimage

    if window is None:
        window = suggest_window(P)
    x0, x1, y0, y1 = window
    xs = np.linspace(x0, x1, resolution)
    ys = np.linspace(y0, y1, resolution)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    inside, _ = amoeba_contains(P, X, Y)

    grid = RonkinGrid(P, xs, ys, _fast_F_grid(P, xs, ys), 1e-6)
    dFdx, dFdy = grid.gradient()
    S = np.rint(dFdx)
    T = np.rint(dFdy)
    res = np.maximum(np.abs(dFdx - S), np.abs(dFdy - T))
    settled = (~inside) & (res < grad_tol)

    poly = NewtonPolygon(P)
    labels = np.zeros(inside.shape, dtype=int)
    comps = []
    pairs = sorted({(int(s), int(t))
                    for s, t in zip(S[settled].ravel(), T[settled].ravel())})
    for (s, t) in pairs:
        where = poly.classify(s, t)
        if where == "outside":
            continue
        mask = settled & (S == s) & (T == t)
        if not mask.any():
            continue
        lab = len(comps) + 1
        labels[mask] = lab
        # deepest cell of the slope region, for an accurate residual readout
        dist = ndimage.distance_transform_cdt(mask)
        ix, iy = np.unravel_index(np.argmax(dist), dist.shape)
        gx, gy = ronkin_gradient(P, xs[ix], ys[iy])
        resid = math.hypot(gx - s, gy - t)
        kind = {"vertex": "unbounded", "boundary": "semi-bounded",
                "interior": "bounded"}[where]
        comps.append(Component(lab, kind, (s, t), resid, int(mask.sum())))
    return PhaseDiagram(P, xs, ys, inside, labels, comps, poly)


def _fast_F_grid(P, xs, ys, nphi=192):
    """Fixed-order F grid; accurate enough for gradient rounding."""
    Pf = P.to_float()
    F = np.empty((len(xs), len(ys)))
    phis = (np.arange(nphi) + 0.5) * (2 * np.pi / nphi)
    for jy, y in enumerate(ys):
        F[:, jy] = _row_values(_slice_root_data(Pf, y, phis), xs)
    return F


def phase_of(P, Bx, By, grad_tol=0.02):
    """Phase of the Gibbs measure at magnetic field (Bx, By).

    Returns (phase, info) where info carries the membership margin and, off
    the amoeba, the component slope."""
    inside, margin = amoeba_contains(P, Bx, By)
    if bool(inside):
        return "liquid", {"margin": float(margin), "boundary": margin == 0.0}
    gx, gy = ronkin_gradient(P, Bx, By)
    s, t = round(gx), round(gy)
    res = math.hypot(gx - s, gy - t)
    poly = NewtonPolygon(P)
    where = poly.classify(s, t)
    if res > grad_tol:
        return "liquid", {"margin": float(margin), "boundary": True,
                          "note": "gradient not at a lattice point"}
    phase = "gaseous" if where == "interior" else "frozen"
    return phase, {"margin": float(margin), "slope": (s, t),
                   "kind": {"vertex": "unbounded", "boundary": "semi-bounded",
                            "interior": "bounded"}.get(where, where),
                   "residual": res}
