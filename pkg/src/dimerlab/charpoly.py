"""Kasteleyn theory on the torus: sign assignment, the matrix K(z,w), the
characteristic polynomial P(z,w), Newton polygons, partition functions.

Convention: K rows are whites, columns blacks; the entry for an edge is
sign * e^(-energy) * z^dx * w^dy with (dx,dy) the edge's cell offset.  The
canonical P is shifted so the reference matching sits at exponent (0,0) and
twisted so coefficients at (even, even) height classes are >= 0 and all
others <= 0.
"""

from dataclasses import dataclass
from fractions import Fraction
import itertools
import math

import numpy as np

from .exact import det_fraction, gf2_solve, lagrange_coeffs_1d
from .lattice import (EnumerationTooLarge, enumerate_matchings,
                      reference_matching, _G1)
from .laurent import LaurentPoly2, NewtonPolygon


@dataclass(frozen=True)
class KasteleynSigns:
    signs: tuple          # +1/-1 per base edge
    base_spin: tuple      # (s, t) of the reference spin structure
    flipped: bool         # True when det carries a global sign flip


def face_sign_rule(domain):
    """A +-1 per edge satisfying the face condition: around a face with
    0 mod 4 edges an odd number of minus signs, with 2 mod 4 an even number.
    Edges repeating around a face count with multiplicity."""
    rows, rhs = [], []
    for face in domain.faces:
        mult = face.edge_multiplicity()
        rows.append([e for e, m in mult.items() if m % 2 == 1])
        # degree/2 even -> 0 mod 4 face -> odd minus count
        rhs.append(1 if (face.degree // 2) % 2 == 0 else 0)
    x = gf2_solve(rows, rhs, len(domain.edges))
    if x is None:
        raise RuntimeError("face sign system inconsistent; embedding bug")
    return tuple(1 - 2 * xi for xi in x)


# ---------------------------------------------------------------------------
# K(z,w) and its determinant


class MagneticKasteleyn:
    """K(z,w) with an optional magnetic field folded into (z,w) scaling."""

    def __init__(self, domain, signs=None, field=(0.0, 0.0)):
        self.domain = domain
        self.signs = signs if signs is not None else face_sign_rule(domain)
        self.field = (float(field[0]), float(field[1]))
        self.size = len(domain.whites)
        # entry list: (row, col, dx, dy, float coefficient)
        self.entries = []
        self._exact_entries = []
        for i, e in enumerate(domain.edges):
            r = domain.windex[e.white]
            c = domain.bindex[e.black]
            coeff = self.signs[i] * math.exp(-e.energy)
            self.entries.append((r, c, e.offset[0], e.offset[1], coeff))
            if domain.rational_weights is not None:
                self._exact_entries.append(
                    (r, c, e.offset[0], e.offset[1],
                     self.signs[i] * domain.rational_weights[i]))

    def eval(self, z, w):
        if z == 0 or w == 0:
            raise ValueError("K(z,w) needs nonzero z and w")
        z = z * math.exp(self.field[0])
        w = w * math.exp(self.field[1])
        K = np.zeros((self.size, self.size), dtype=complex)
        for r, c, dx, dy, coeff in self.entries:
            K[r, c] += coeff * z ** dx * w ** dy
        return K

    def eval_grid(self, zs, ws):
        """K on the product of two complex arrays: shape (|zs|,|ws|,m,m)."""
        zs = np.asarray(zs, dtype=complex) * math.exp(self.field[0])
        ws = np.asarray(ws, dtype=complex) * math.exp(self.field[1])
        K = np.zeros((len(zs), len(ws), self.size, self.size), dtype=complex)
        for r, c, dx, dy, coeff in self.entries:
            K[:, :, r, c] += coeff * np.outer(zs ** dx, ws ** dy)
        return K

    def eval_exact(self, z, w):
        """Matrix of Fractions at rational (z,w); needs rational weights."""
        if not self._exact_entries:
            raise ValueError("weights are not rational")
        z, w = Fraction(z), Fraction(w)
        if z == 0 or w == 0:
            raise ValueError("K(z,w) needs nonzero z and w")
        K = [[Fraction(0)] * self.size for _ in range(self.size)]
        for r, c, dx, dy, coeff in self._exact_entries:
            K[r][c] += coeff * z ** dx * w ** dy
        return K


def kasteleyn_eval(domain, z, w, field=(0.0, 0.0)):
    return MagneticKasteleyn(domain, kasteleyn_signs(domain).signs, field).eval(z, w)


def _degree_bounds(domain):
    """Per-variable exponent ranges of det K from per-white offset extremes."""
    jmin = jmax = kmin = kmax = 0
    for w in domain.whites:
        offs = [e.offset for e in domain.edges if e.white == w]
        jmin += min(o[0] for o in offs)
        jmax += max(o[0] for o in offs)
        kmin += min(o[1] for o in offs)
        kmax += max(o[1] for o in offs)
    return jmin, jmax, kmin, kmax


def characteristic_polynomial_raw(domain):
    """det K(z,w) with face-rule signs, unshifted; exact when weights are
    rational, else float with interpolation-residual validation."""
    cached = getattr(domain, "_praw_cache", None)
    if cached is not None:
        return cached
    K = MagneticKasteleyn(domain, face_sign_rule(domain))
    jmin, jmax, kmin, kmax = _degree_bounds(domain)
    Nz, Nw = jmax - jmin + 1, kmax - kmin + 1
    if domain.rational_weights is not None:
        P = _interp_exact(K, jmin, kmin, Nz, Nw)
        zt, wt = Fraction(Nz + 1), Fraction(Nw + 2)
        if P(zt, wt) != det_fraction(K.eval_exact(zt, wt)):
            raise RuntimeError("exact interpolation failed; degree bounds bug")
    else:
        P = _interp_float(K, jmin, kmin, Nz, Nw)
        zt, wt = 0.7 + 0.41j, -0.33 + 0.88j
        ref = np.linalg.det(K.eval(zt, wt))
        err = abs(P(zt, wt) - ref) / max(1e-300, abs(ref))
        if err > 1e-8:
            raise RuntimeError(f"ill-conditioned weights: interpolation "
                               f"residual {err:.2e} exceeds 1e-08")
    domain._praw_cache = P
    return P


def _interp_exact(K, jmin, kmin, Nz, Nw):
    zs = [Fraction(t) for t in range(1, Nz + 1)]
    ws = [Fraction(t) for t in range(1, Nw + 1)]
    vals = [[det_fraction(K.eval_exact(z, w)) * z ** (-jmin) * w ** (-kmin)
             for w in ws] for z in zs]
    # interpolate in z per w-node, then in w per z-power
    colpolys = [lagrange_coeffs_1d(zs, [vals[a][b] for a in range(Nz)])
                for b in range(Nw)]
    terms = {}
    for i in range(Nz):
        cw = lagrange_coeffs_1d(ws, [colpolys[b][i] for b in range(Nw)])
        for j in range(Nw):
            if cw[j] != 0:
                terms[(i + jmin, j + kmin)] = cw[j]
    return LaurentPoly2(terms)


def _interp_float(K, jmin, kmin, Nz, Nw):
    za = np.exp(2j * np.pi * np.arange(Nz) / Nz)
    wa = np.exp(2j * np.pi * np.arange(Nw) / Nw)
    dets = np.linalg.det(K.eval_grid(za, wa))
    dets *= np.outer(za ** (-jmin), wa ** (-kmin))
    C = np.fft.fft2(dets) / (Nz * Nw)
    top = np.abs(C).max()
    terms = {}
    for i in range(Nz):
        for j in range(Nw):
            c = C[i, j]
            if abs(c) > 1e-10 * top:
                if abs(c.imag) > 1e-8 * top:
                    raise RuntimeError("ill-conditioned weights: complex "
                                       "coefficient in a real polynomial")
                terms[(i + jmin, j + kmin)] = float(c.real)
    return LaurentPoly2(terms)


# ---------------------------------------------------------------------------
# Normalization and the canonical polynomial


def reference_exponent(domain):
    """Monomial exponent (x0, y0) of the reference matching in det K."""
    return reference_matching(domain).offset_sum()


def _pattern_ok(P, tol=0.0):
    for (j, k), c in P.terms.items():
        want_pos = j % 2 == 0 and k % 2 == 0
        v = c if P.exact else float(c)
        if want_pos and v < -tol:
            return False
        if not want_pos and v > tol:
            return False
    c0 = P.coeff(0, 0)
    return (c0 > 0) if P.exact else (float(c0) > tol)


def normalize_sign_convention(P, reference_exponent=None):
    """Representative of P under (z,w)->(+-z,+-w), global sign, and unit
    monomial shift with: nonnegative coefficients exactly at (even, even)
    exponents, positive constant term.  The shift is -reference_exponent when
    given, else chosen among support points nearest the origin.  Idempotent.
    """
    tol = 0.0 if P.exact else 1e-9 * max(abs(float(c)) for c in P.terms.values())
    if reference_exponent is not None:
        shifts = [(-reference_exponent[0], -reference_exponent[1])]
    else:
        shifts = [(-j, -k) for j, k in
                  sorted(P.support(), key=lambda m: (abs(m[0]) + abs(m[1]), m))]
    for a, b in shifts:
        Q = P.shift(a, b)
        for g, sz, sw in itertools.product((1, -1), repeat=3):
            cand = Q.substitute_signs(sz, sw).scale(g)
            if _pattern_ok(cand, tol):
                return cand
    raise RuntimeError("no admissible sign representative; "
                       "sign-assignment bug")


def characteristic_polynomial(domain):
    """Canonical P(z,w): reference matching at exponent (0,0), sign pattern
    normalized.  Coefficients are exact when all edge weights are rational."""
    cached = getattr(domain, "_pcanon_cache", None)
    if cached is not None:
        return cached
    P = normalize_sign_convention(characteristic_polynomial_raw(domain),
                                  reference_exponent(domain))
    domain._pcanon_cache = P
    return P


def newton_polygon(P):
    if isinstance(P, LaurentPoly2):
        return NewtonPolygon(P)
    return NewtonPolygon(characteristic_polynomial(P))


# ---------------------------------------------------------------------------
# Enlarged tori: P_n and partition functions


def poly_enlarged(P, n, z, w):
    """P_n(z,w) = product of P over all n-th root pairs, as a complex number."""
    if z == 0 or w == 0:
        raise ValueError("needs nonzero z and w")
    Pf = P.to_float()
    zr = np.exp((np.log(complex(z))) / n + 2j * np.pi * np.arange(n) / n)
    wr = np.exp((np.log(complex(w))) / n + 2j * np.pi * np.arange(n) / n)
    return complex(np.prod(Pf.eval_grid(zr, wr)))


def _double_in(P, var):
    """prod over a^2 = V of P(a, .): polynomial in V = var^2."""
    E, O = P.radix_split(var, 2)
    sq = O * O
    shift = sq.shift(1, 0) if var == "z" else sq.shift(0, 1)
    return E * E - shift


def _triple_in(P, var):
    """prod over a^3 = V of P(a, .): norm form of the cubic extension."""
    A0, A1, A2 = P.radix_split(var, 3)

    def sh(Q, p):
        return Q.shift(p, 0) if var == "z" else Q.shift(0, p)

    return (A0 * A0 * A0 + sh(A1 * A1 * A1, 1) + sh(A2 * A2 * A2, 2)
            - sh(A0 * A1 * A2, 1).scale(3))


def poly_enlarged_symbolic(P, n):
    """P_n as a LaurentPoly2, for n a product of 2s and 3s; exact in exact
    mode.  Composes variable-doubling and -tripling transforms."""
    m = n
    out = P
    while m % 2 == 0:
        out = _double_in(_double_in(out, "z"), "w")
        m //= 2
    while m % 3 == 0:
        out = _triple_in(_triple_in(out, "z"), "w")
        m //= 3
    if m != 1:
        raise ValueError(f"n={n} not a product of 2s and 3s")
    return out


def _four_combos(vals):
    """vals: {(s,t): P_n(s,t)}.  Returns {(s,t): Z candidate with that base}."""
    out = {}
    for s, t in vals:
        total = sum(vals.values()) - 2 * vals[(s, t)]
        out[(s, t)] = total / 2
    return out


def partition_function_torus(domain, n, prefer_exact=True):
    """Z(G_n): weighted matching count of the n x n torus via the four
    twisted determinants.  Fraction in exact mode (n a product of 2s and 3s),
    float otherwise."""
    Praw = characteristic_polynomial_raw(domain)
    exact = prefer_exact and Praw.exact and _factors_23(n)
    if exact:
        Pn = poly_enlarged_symbolic(Praw, n)
        vals = {(s, t): Pn(Fraction(s), Fraction(t))
                for s, t in itertools.product((1, -1), repeat=2)}
    else:
        vals = {(s, t): _real(poly_enlarged(Praw, n, s, t))
                for s, t in itertools.product((1, -1), repeat=2)}
    combos = _four_combos(vals)
    base = max(combos, key=lambda k: (abs(combos[k]), k))
    Z = abs(combos[base])
    if Z <= 0:
        raise RuntimeError("all twisted combinations vanish; "
                           "spin structure search failed")
    return Z


def _real(x):
    if abs(x.imag) > 1e-6 * max(1.0, abs(x.real)):
        raise RuntimeError(f"complex partition value {x}")
    return x.real


def _factors_23(n):
    while n % 2 == 0:
        n //= 2
    while n % 3 == 0:
        n //= 3
    return n == 1


def kasteleyn_signs(domain):
    """Face-rule signs plus the spin structure base: the twist pair whose
    four-determinant combination is the positive partition function,
    validated against enumeration when cheap."""
    cached = getattr(domain, "_signs_cache", None)
    if cached is not None:
        return cached
    signs = face_sign_rule(domain)
    Praw = characteristic_polynomial_raw(domain)
    if Praw.exact:
        vals = {(s, t): Praw(Fraction(s), Fraction(t))
                for s, t in itertools.product((1, -1), repeat=2)}
    else:
        vals = {(s, t): _real(complex(Praw(s, t)))
                for s, t in itertools.product((1, -1), repeat=2)}
    combos = _four_combos(vals)
    base = max(combos, key=lambda k: (abs(combos[k]), k))
    flipped = combos[base] < 0
    try:
        recs = enumerate_matchings(_G1(domain), cap=20000)
        if Praw.exact:
            Z = sum(r.matching.weight_exact() for r in recs)
            ok = abs(combos[base]) == Z
        else:
            Z = sum(math.exp(-r.energy) for r in recs)
            ok = abs(abs(combos[base]) - Z) <= 1e-8 * max(1.0, Z)
        if not ok:
            raise RuntimeError(
                f"spin structure search failed: best combination "
                f"{combos[base]} vs enumerated Z={Z}")
    except EnumerationTooLarge:
        pass
    out = KasteleynSigns(signs, base, bool(flipped))
    domain._signs_cache = out
    return out


def log_z_per_domain(domain, order=256):
    """log of the partition function per fundamental domain: the Ronkin
    function of P at the origin."""
    from .amoeba import ronkin
    return ronkin(characteristic_polynomial_raw(domain), 0.0, 0.0, order=order)
