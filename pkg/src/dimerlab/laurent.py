"""Bivariate Laurent polynomials with exact rational or float coefficients.

Coefficients are real; the zero set of such a polynomial is conjugation
symmetric, which the amoeba and root-finding code relies on.
"""

from fractions import Fraction
import json

import numpy as np


def _is_rational(c):
    return isinstance(c, (Fraction, int))


class LaurentPoly2:
    """Polynomial sum_{(j,k)} c_jk z^j w^k with integer exponents of either sign.

    Coefficients are Fraction (exact mode) or float.  Mixing the two in one
    polynomial is not allowed; `exact` reports which mode this instance is in.
    """

    def __init__(self, terms):
        clean = {}
        for (j, k), c in dict(terms).items():
            if isinstance(c, bool):
                raise ValueError("boolean coefficient")
            if isinstance(c, int):
                c = Fraction(c)
            if c == 0:
                continue
            clean[(int(j), int(k))] = c
        self.terms = clean
        kinds = {_is_rational(c) for c in clean.values()}
        if len(kinds) > 1:
            raise ValueError("mixed exact and float coefficients")
        self.exact = kinds == {True}

    # -- basic queries ----------------------------------------------------

    def support(self):
        return sorted(self.terms)

    def coeff(self, j, k):
        zero = Fraction(0) if self.exact else 0.0
        return self.terms.get((j, k), zero)

    def is_zero(self):
        return not self.terms

    def degree_box(self):
        """(jmin, jmax, kmin, kmax) over the support."""
        js = [j for j, _ in self.terms]
        ks = [k for _, k in self.terms]
        return min(js), max(js), min(ks), max(ks)

    def __eq__(self, other):
        if not isinstance(other, LaurentPoly2):
            return NotImplemented
        return self.terms == other.terms

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"LaurentPoly2({self.pretty()})"

    # -- arithmetic helpers ------------------------------------------------

    def __add__(self, other):
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return LaurentPoly2(out)

    def __neg__(self):
        return LaurentPoly2({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, LaurentPoly2):
            return self.scale(other)
        out = {}
        for (j1, k1), c1 in self.terms.items():
            for (j2, k2), c2 in other.terms.items():
                m = (j1 + j2, k1 + k2)
                out[m] = out.get(m, 0) + c1 * c2
        return LaurentPoly2(out)

    def __rmul__(self, other):
        return self.scale(other)

    def radix_split(self, var, r):
        """Decompose P = sum_i var^i * Q_i(var^r, other), i in 0..r-1.

        Exponents of the split variable are floor-divided, so negative
        exponents are handled: z^-3 = z^1 * (z^2)^-2 for r=2.
        """
        parts = [dict() for _ in range(r)]
        for (j, k), c in self.terms.items():
            t = j if var == "z" else k
            q, rem = divmod(t, r)
            m = (q, k) if var == "z" else (j, q)
            parts[rem][m] = parts[rem].get(m, 0) + c
        return [LaurentPoly2(p) for p in parts]

    def scale(self, c):
        return LaurentPoly2({m: c * v for m, v in self.terms.items()})

    def shift(self, a, b):
        """Multiply by the unit monomial z^a w^b."""
        return LaurentPoly2({(j + a, k + b): c for (j, k), c in self.terms.items()})

    def substitute_signs(self, sz, sw):
        """P(sz*z, sw*w) for sz, sw in {+1, -1}."""
        assert sz in (1, -1) and sw in (1, -1)
        return LaurentPoly2(
            {(j, k): c * (sz ** (j % 2)) * (sw ** (k % 2)) for (j, k), c in self.terms.items()}
        )

    def to_float(self):
        return LaurentPoly2({m: float(c) + 0.0 for m, c in self.terms.items()}) \
            if self.exact else self

    # -- evaluation --------------------------------------------------------

    def __call__(self, z, w):
        """Evaluate at scalar complex (or exact rational) arguments."""
        if self.exact and isinstance(z, (Fraction, int)) and isinstance(w, (Fraction, int)):
            z, w = Fraction(z), Fraction(w)
            return sum((c * z ** j * w ** k for (j, k), c in self.terms.items()),
                       Fraction(0))
        total = 0j
        for (j, k), c in self.terms.items():
            total += complex(c) * z ** j * w ** k
        return total

    def eval_grid(self, zs, ws):
        """Evaluate on the outer product of two complex 1-d arrays."""
        zs = np.asarray(zs, dtype=complex)
        ws = np.asarray(ws, dtype=complex)
        out = np.zeros((len(zs), len(ws)), dtype=complex)
        for (j, k), c in self.terms.items():
            out += complex(c) * np.outer(zs ** j, ws ** k)
        return out

    def eval_real_signed(self, x, y, sz=1, sw=1):
        """P(sz*e^x, sw*e^y) for real arrays x, y (elementwise), stably.

        Exponentials are normalized by the largest term to avoid overflow:
        the returned pair (value, scale) satisfies P = value * e^scale.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        monos = np.array(self.support())
        js, ks = monos[:, 0], monos[:, 1]
        cs = np.array([float(self.terms[(j, k)]) for j, k in monos])
        signs = np.where((js % 2)[:, None] != 0, sz, 1) * np.where((ks % 2)[:, None] != 0, sw, 1)
        expo = js[:, None] * x.ravel()[None, :] + ks[:, None] * y.ravel()[None, :]
        peak = expo.max(axis=0)
        vals = (cs[:, None] * signs * np.exp(expo - peak[None, :])).sum(axis=0)
        return vals.reshape(x.shape), peak.reshape(x.shape)

    def slice_in_z(self, w):
        """Coefficients of z^j at fixed complex w, as (jmin, complex array)."""
        jmin, jmax, _, _ = self.degree_box()
        out = np.zeros(jmax - jmin + 1, dtype=complex)
        for (j, k), c in self.terms.items():
            out[j - jmin] += complex(c) * w ** k
        return jmin, out

    def dz(self):
        return LaurentPoly2({(j - 1, k): c * j for (j, k), c in self.terms.items() if j})

    def dw(self):
        return LaurentPoly2({(j, k - 1): c * k for (j, k), c in self.terms.items() if k})

    # -- serialization -----------------------------------------------------

    def to_json_dict(self):
        terms = []
        for (j, k) in self.support():
            c = self.terms[(j, k)]
            if self.exact:
                terms.append({"j": j, "k": k,
                              "coeff_num": c.numerator, "coeff_den": c.denominator})
            else:
                terms.append({"j": j, "k": k, "coeff": float(c)})
        return {"schema": 1, "terms": terms}

    def dumps(self):
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json_dict(cls, d):
        terms = {}
        for t in d["terms"]:
            key = (int(t["j"]), int(t["k"]))
            if "coeff_num" in t:
                c = Fraction(int(t["coeff_num"]), int(t["coeff_den"]))
            else:
                c = float(t["coeff"])
            terms[key] = terms.get(key, 0) + c
        return cls(terms)

    @classmethod
    def loads(cls, text):
        return cls.from_json_dict(json.loads(text))

    def pretty(self):
        """Human readable form, e.g. '5 - z - z^-1 - w - w^-1'."""
        if not self.terms:
            return "0"
        def mono(j, k):
            parts = []
            if j:
                parts.append("z" if j == 1 else f"z^{j}")
            if k:
                parts.append("w" if k == 1 else f"w^{k}")
            return "*".join(parts)
        # constant first, then by (|j|+|k|, j, k) for a stable readable order
        keys = sorted(self.terms, key=lambda m: (abs(m[0]) + abs(m[1]), -m[0], -m[1]))
        out = []
        for j, k in keys:
            c = self.terms[(j, k)]
            neg = c < 0
            mag = -c if neg else c
            m = mono(j, k)
            if self.exact and mag.denominator == 1:
                mag_s = str(mag.numerator)
            else:
                mag_s = f"{float(mag):.10g}"
            body = m if (mag == 1 and m) else (mag_s if not m else f"{mag_s}*{m}")
            if not out:
                out.append(("-" if neg else "") + body)
            else:
                out.append(("- " if neg else "+ ") + body)
        return " ".join(out)


# ---------------------------------------------------------------------------
# Newton polygon


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points):
    """Andrew monotone chain on integer points; counterclockwise, no repeats."""
    pts = sorted(set(map(tuple, points)))
    if len(pts) <= 2:
        return pts
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


class NewtonPolygon:
    """Convex hull of the support of a LaurentPoly2, with its lattice points."""

    def __init__(self, poly_or_points):
        if isinstance(poly_or_points, LaurentPoly2):
            pts = poly_or_points.support()
        else:
            pts = list(poly_or_points)
        if not pts:
            raise ValueError("empty support")
        self.vertices = convex_hull(pts)
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        self.interior = []
        self.boundary = []
        for s in range(min(xs), max(xs) + 1):
            for t in range(min(ys), max(ys) + 1):
                where = self.classify(s, t)
                if where == "interior":
                    self.interior.append((s, t))
                elif where in ("boundary", "vertex"):
                    self.boundary.append((s, t))

    def classify(self, s, t):
        """'vertex' | 'boundary' | 'interior' | 'outside' for a lattice point."""
        verts = self.vertices
        if (s, t) in verts:
            return "vertex"
        n = len(verts)
        if n == 1:
            return "outside"
        if n == 2:
            a, b = verts
            if _cross(a, b, (s, t)) == 0 and \
                    min(a[0], b[0]) <= s <= max(a[0], b[0]) and \
                    min(a[1], b[1]) <= t <= max(a[1], b[1]):
                return "boundary"
            return "outside"
        on_edge = False
        for i in range(n):
            c = _cross(verts[i], verts[(i + 1) % n], (s, t))
            if c < 0:
                return "outside"
            if c == 0:
                on_edge = True
        return "boundary" if on_edge else "interior"

    def contains(self, s, t, tol=1e-9):
        """Float membership test (closed polygon) with tolerance."""
        verts = self.vertices
        if len(verts) == 1:
            return abs(s - verts[0][0]) <= tol and abs(t - verts[0][1]) <= tol
        if len(verts) == 2:
            (ax, ay), (bx, by) = verts
            ux, uy = bx - ax, by - ay
            L2 = ux * ux + uy * uy
            proj = ((s - ax) * ux + (t - ay) * uy) / L2
            if proj < -tol or proj > 1 + tol:
                return False
            perp = abs((s - ax) * uy - (t - ay) * ux) / L2 ** 0.5
            return perp <= tol
        for i in range(len(verts)):
            a, b = verts[i], verts[(i + 1) % len(verts)]
            if (b[0] - a[0]) * (t - a[1]) - (b[1] - a[1]) * (s - a[0]) < -tol:
                return False
        return True

    @property
    def area(self):
        verts = self.vertices
        if len(verts) < 3:
            return Fraction(0)
        tot = 0
        for i in range(len(verts)):
            a, b = verts[i], verts[(i + 1) % len(verts)]
            tot += a[0] * b[1] - b[0] * a[1]
        return Fraction(tot, 2)

    def edge_normals(self):
        """Outward primitive normal of each hull edge (tentacle directions)."""
        import math
        verts = self.vertices
        out = []
        for i in range(len(verts)):
            a, b = verts[i], verts[(i + 1) % len(verts)]
            dx, dy = b[0] - a[0], b[1] - a[1]
            g = math.gcd(abs(dx), abs(dy))
            out.append((dy // g, -dx // g))  # ccw hull -> outward is right normal
        return out
