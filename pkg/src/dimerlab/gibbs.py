"""Local statistics of the translation-invariant Gibbs measures.

Edge probabilities and covariances come from minors of the inverse Kasteleyn
operator.  On the infinite graph the inverse kernel is a torus integral of
the inverse of K(z,w) over the unit torus, evaluated here on odd-order FFT
grids (a pair of orders is averaged; odd orders keep half-turn points of the
spectral curve off the grid).  On finite tori the probability is the
four-determinant combination over the (+-1, +-1) twists.
"""

from fractions import Fraction
import math

import numpy as np

from .charpoly import MagneticKasteleyn, kasteleyn_signs
from .exact import det_fraction


def torus_kasteleyn(domain, n, z, w, field=(0.0, 0.0)):
    """Signed weighted adjacency matrix of G_n with winding monomials.

    Entry (white cell c) x (black cell c') accumulates sign * weight *
    e^(B.d) * z^wx * w^wy where the edge offset d lands in cell c' after
    wx, wy wraps around the torus."""
    signs = kasteleyn_signs(domain).signs
    m = len(domain.whites)
    size = m * n * n
    K = np.zeros((size, size), dtype=complex)
    for cx in range(n):
        for cy in range(n):
            for i, e in enumerate(domain.edges):
                r = domain.windex[e.white] * n * n + cx * n + cy
                dx, dy = e.offset
                wx, wy = (cx + dx) // n, (cy + dy) // n
                c = domain.bindex[e.black] * n * n \
                    + ((cx + dx) % n) * n + ((cy + dy) % n)
                coeff = signs[i] * math.exp(-e.energy
                                            + field[0] * dx + field[1] * dy)
                K[r, c] += coeff * z ** wx * w ** wy
    return K


def torus_kasteleyn_exact(domain, n, z, w):
    """Fraction-valued torus Kasteleyn matrix at rational (z,w)."""
    if domain.rational_weights is None:
        raise ValueError("weights are not rational")
    signs = kasteleyn_signs(domain).signs
    m = len(domain.whites)
    size = m * n * n
    z, w = Fraction(z), Fraction(w)
    K = [[Fraction(0)] * size for _ in range(size)]
    for cx in range(n):
        for cy in range(n):
            for i, e in enumerate(domain.edges):
                r = domain.windex[e.white] * n * n + cx * n + cy
                dx, dy = e.offset
                wx, wy = (cx + dx) // n, (cy + dy) // n
                c = domain.bindex[e.black] * n * n \
                    + ((cx + dx) % n) * n + ((cy + dy) % n)
                K[r][c] += signs[i] * domain.rational_weights[i] \
                    * z ** wx * w ** wy
    return K


class InverseKernel:
    """Infinite-volume inverse Kasteleyn kernel at a magnetic field.

    get(b, w, ux, uy) returns the kernel between the black vertex of class b
    in cell u and the white vertex of class w in cell 0.  Values are the
    average over the two FFT orders; `error` reports their half-difference,
    a convergence estimate that is large only in slowly mixing (liquid)
    phases."""

    def __init__(self, domain, field=(0.0, 0.0), orders=(127, 131)):
        self.domain = domain
        self.field = (float(field[0]), float(field[1]))
        signs = kasteleyn_signs(domain).signs
        self.K = MagneticKasteleyn(domain, signs, self.field)
        self.signs = signs
        self.orders = []
        self.tables = []
        for N in orders:
            # spectral-curve points at rational angles can land exactly on
            # the grid (e.g. cube roots of unity when 3 | N); step past
            N = N if N % 2 else N + 1
            for _ in range(12):
                th = np.exp(2j * np.pi * np.arange(N) / N)
                A = self.K.eval_grid(th, th)      # (N, N, m, m), rows white
                dets = np.abs(np.linalg.det(A))
                if dets.min() > 1e-10 * np.median(dets) \
                        and N not in self.orders:
                    break
                N += 2
            else:
                raise ArithmeticError("no non-singular FFT grid found; "
                                      "field sits on the spectral curve")
            self.orders.append(N)
            Ainv = np.linalg.inv(A)               # (N, N, m, m), rows black
            self.tables.append(np.fft.ifft2(Ainv, axes=(0, 1)))
        self.orders = tuple(self.orders)
        self.error = 0.0

    def get(self, b, w, ux, uy):
        Nmin = min(self.orders)
        if abs(ux) > (Nmin - 3) // 2 or abs(uy) > (Nmin - 3) // 2:
            raise ValueError("offset out of the alias-safe range; "
                             "raise the FFT orders")
        vals = [T[ux % N, uy % N, b, w]
                for T, N in zip(self.tables, self.orders)]
        v = sum(vals) / len(vals)
        if len(vals) == 2:
            self.error = max(self.error, abs(vals[0] - vals[1]) / 2)
        if abs(v.imag) > 1e-8 * max(1.0, abs(v.real)):
            raise ArithmeticError("inverse kernel came out non-real")
        return v.real

    def edge_coefficient(self, edge_index):
        e = self.domain.edges[edge_index]
        return self.signs[edge_index] * math.exp(
            -e.energy + self.field[0] * e.offset[0]
            + self.field[1] * e.offset[1])


def _instances(domain, instances):
    """Normalize [(edge_index, (cx,cy)), ...]; plain indices mean cell 0."""
    out = []
    for it in instances:
        if isinstance(it, int):
            out.append((it, (0, 0)))
        else:
            ei, cell = it
            out.append((int(ei), (int(cell[0]), int(cell[1]))))
    return out


def edge_probability(domain, instances, field=(0.0, 0.0), kernel=None):
    """Probability that all listed edge instances are matched, under the
    infinite-volume Gibbs measure of the given field.

    instances: edge indices (cell 0) or (edge_index, cell) pairs."""
    inst = _instances(domain, instances)
    ker = kernel if kernel is not None else InverseKernel(domain, field)
    whites = []
    blacks = []
    for ei, cell in inst:
        e = domain.edges[ei]
        wv = (domain.windex[e.white], cell)
        bv = (domain.bindex[e.black],
              (cell[0] + e.offset[0], cell[1] + e.offset[1]))
        if wv in whites or bv in blacks:
            return 0.0
        whites.append(wv)
        blacks.append(bv)
    k = len(inst)
    M = np.empty((k, k))
    for r, (bc, bcell) in enumerate(blacks):
        for c, (wc, wcell) in enumerate(whites):
            M[r, c] = ker.get(bc, wc, bcell[0] - wcell[0],
                              bcell[1] - wcell[1])
    pref = 1.0
    for ei, _ in inst:
        pref *= ker.edge_coefficient(ei)
    return float(pref * np.linalg.det(M))


def edge_covariance(domain, inst1, inst2, field=(0.0, 0.0), kernel=None):
    """Cov(1_{e1 in M}, 1_{e2 in M}) for two edge instances."""
    ker = kernel if kernel is not None else InverseKernel(domain, field)
    p12 = edge_probability(domain, [inst1, inst2], field, ker)
    p1 = edge_probability(domain, [inst1], field, ker)
    p2 = edge_probability(domain, [inst2], field, ker)
    return p12 - p1 * p2


# ---------------------------------------------------------------------------
# Finite torus: four-determinant formula


def _twist_points(n, field):
    ex, ey = math.exp(n * field[0]), math.exp(n * field[1])
    return [(s * ex, t * ey) for s in (1, -1) for t in (1, -1)]


def torus_edge_probability(domain, n, instances, field=(0.0, 0.0),
                           exact=False):
    """Probability of an edge set on the n x n torus.

    Per twist, the signed sum over matchings containing the edge set is a
    Laplace complementary minor: the product of the edge coefficients, the
    pairing sign, and the determinant of K with those rows and columns
    deleted.  With D_i the full determinants and sigma_i = +1 except -1 on
    the dominant twist, Z_signed = sum sigma_i D_i / 2 and the probability
    is sum sigma_i R_i / (2 Z_signed)."""
    inst = _instances(domain, instances)
    points = [(1, 1), (1, -1), (-1, 1), (-1, -1)] if exact \
        else _twist_points(n, field)
    if exact and domain.rational_weights is None:
        raise ValueError("exact mode needs rational weights")
    if exact and field != (0.0, 0.0):
        raise ValueError("exact mode is for zero field")
    Ds, Rs = [], []
    for (z, w) in points:
        if exact:
            K = torus_kasteleyn_exact(domain, n, z, w)
            D = det_fraction(K)
        else:
            K = torus_kasteleyn(domain, n, z, w, field)
            D = complex(np.linalg.det(K))
        rows, cols, pref, degenerate = _minor_data(domain, n, inst, z, w,
                                                   field, exact)
        if degenerate:
            R = Fraction(0) if exact else 0.0
        else:
            R = pref * _pairing_sign(rows, cols) \
                * _deleted_minor(K, rows, cols, exact)
        Ds.append(D)
        Rs.append(R)
    combos = [(sum(Ds) - 2 * Ds[i]) / 2 for i in range(4)]
    base = max(range(4), key=lambda i: abs(combos[i]))
    Zs = combos[base]
    if Zs == 0:
        raise ArithmeticError("vanishing torus partition function")
    total = sum((-1 if i == base else 1) * Rs[i] for i in range(4))
    pr = total / (2 * Zs)
    if exact:
        return pr
    pr = complex(pr)
    if abs(pr.imag) > 1e-9 * max(1.0, abs(pr.real)):
        raise ArithmeticError("torus probability came out non-real")
    return pr.real


def _minor_data(domain, n, inst, z, w, field, exact):
    """Deleted rows (whites), columns (blacks), and the edge coefficient
    product for the restricted signed sum at one twist point."""
    signs = kasteleyn_signs(domain).signs
    rows, cols = [], []
    pref = Fraction(1) if exact else 1.0
    for ei, cell in inst:
        e = domain.edges[ei]
        cx, cy = cell[0] % n, cell[1] % n
        dx, dy = e.offset
        wx, wy = (cx + dx) // n, (cy + dy) // n
        r = domain.windex[e.white] * n * n + cx * n + cy
        c = domain.bindex[e.black] * n * n \
            + ((cx + dx) % n) * n + ((cy + dy) % n)
        if r in rows or c in cols:
            return [], [], pref, True
        if exact:
            pref *= signs[ei] * domain.rational_weights[ei] \
                * Fraction(z) ** wx * Fraction(w) ** wy
        else:
            pref *= signs[ei] * math.exp(-e.energy + field[0] * dx
                                         + field[1] * dy) \
                * (z ** wx) * (w ** wy)
        rows.append(r)
        cols.append(c)
    return rows, cols, pref, False


def _pairing_sign(rows, cols):
    """Sign of the term picking entry (rows[j], cols[j]) for each j inside
    the Laplace expansion over the sorted row and column sets."""
    order_r = sorted(range(len(rows)), key=lambda j: rows[j])
    cset = sorted(cols)
    perm = [cset.index(cols[j]) for j in order_r]
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        clen = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            clen += 1
        if clen % 2 == 0:
            sign = -sign
    parity = sum(sorted(rows)) + sum(cset)
    return sign * (-1) ** parity


def _deleted_minor(K, rows, cols, exact):
    if exact:
        keep_r = [i for i in range(len(K)) if i not in set(rows)]
        keep_c = [j for j in range(len(K)) if j not in set(cols)]
        sub = [[K[i][j] for j in keep_c] for i in keep_r]
        return det_fraction(sub) if sub else Fraction(1)
    keep_r = np.setdiff1d(np.arange(K.shape[0]), rows)
    keep_c = np.setdiff1d(np.arange(K.shape[1]), cols)
    sub = K[np.ix_(keep_r, keep_c)]
    return complex(np.linalg.det(sub)) if sub.size else 1.0


# ---------------------------------------------------------------------------
# Decay profiles


def covariance_profile(domain, e1, e2, direction, rs, field=(0.0, 0.0),
                       kernel=None):
    """Cov between e1 at cell 0 and e2 at cell r*direction, for r in rs."""
    ker = kernel if kernel is not None else InverseKernel(
        domain, field, orders=_orders_for(max(rs)))
    out = []
    for r in rs:
        cell = (int(round(r * direction[0])), int(round(r * direction[1])))
        out.append(edge_covariance(domain, (e1, (0, 0)), (e2, cell),
                                   field, ker))
    return np.array(out)


def _orders_for(rmax):
    N = 2 * int(rmax) + 11
    if N % 2 == 0:
        N += 1
    N = max(N, 129)
    return (N, N + 2)


def fit_power_decay(rs, vals):
    """Least squares exponent of |vals| ~ r^p; returns (p, log prefactor)."""
    rs = np.asarray(rs, dtype=float)
    v = np.abs(np.asarray(vals, dtype=float))
    keep = v > 0
    p, c = np.polyfit(np.log(rs[keep]), np.log(v[keep]), 1)
    return float(p), float(c)


def fit_exponential_decay(rs, vals, floor=1e-14):
    """Least squares rate of |vals| ~ e^(a r), ignoring values below the
    double-precision floor relative to the largest sample."""
    rs = np.asarray(rs, dtype=float)
    v = np.abs(np.asarray(vals, dtype=float))
    keep = v > floor * max(v.max(), 1e-300)
    a, c = np.polyfit(rs[keep], np.log(v[keep]), 1)
    return float(a), float(c)
