"""Exact linear algebra helpers: rational determinants, GF(2) solves,
Lagrange interpolation over the rationals."""

from fractions import Fraction


def det_fraction(rows):
    """Determinant of a square matrix of Fractions by fraction-free pivoting."""
    a = [list(map(Fraction, r)) for r in rows]
    n = len(a)
    sign = 1
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            sign = -sign
        inv = a[col][col]
        for r in range(col + 1, n):
            if a[r][col] == 0:
                continue
            f = a[r][col] / inv
            for c in range(col, n):
                a[r][c] -= f * a[col][c]
    out = Fraction(sign)
    for i in range(n):
        out *= a[i][i]
    return out


def gf2_solve(rows, rhs, nvars):
    """One solution of a linear system over GF(2), free variables set to 0.

    rows: list of lists of variable indices appearing (odd multiplicity kept
    by the caller); rhs: parity list.  Returns a 0/1 list or None when the
    system is inconsistent.
    """
    eqs = []
    for idxs, b in zip(rows, rhs):
        mask = 0
        for i in idxs:
            mask ^= 1 << int(i)  # keep a python int; numpy would overflow
        eqs.append((mask, b & 1))
    pivots = {}  # column -> (mask, b)
    for mask, b in eqs:
        while mask:
            col = mask.bit_length() - 1
            if col in pivots:
                pm, pb = pivots[col]
                mask ^= pm
                b ^= pb
            else:
                pivots[col] = (mask, b)
                mask = 0
                b = 0
        if b:
            return None  # 0 = 1
    x = [0] * nvars
    # each pivot row's top bit is its column, so lower columns resolve first
    for col in sorted(pivots):
        mask, b = pivots[col]
        acc = b
        m = mask & ~(1 << col)
        while m:
            c = m.bit_length() - 1
            acc ^= x[c]
            m &= ~(1 << c)
        x[col] = acc
    return x


def lagrange_coeffs_1d(xs, ys):
    """Coefficients c_0..c_{n-1} of the unique degree<n polynomial through
    rational points (xs, ys)."""
    xs = [Fraction(x) for x in xs]
    n = len(xs)
    coeffs = [Fraction(0)] * n
    for i in range(n):
        # numerator polynomial prod_{j != i} (X - x_j), built incrementally
        num = [Fraction(1)]
        denom = Fraction(1)
        for j in range(n):
            if j == i:
                continue
            new = [Fraction(0)] * (len(num) + 1)
            for k, c in enumerate(num):
                new[k + 1] += c
                new[k] -= xs[j] * c
            num = new
            denom *= xs[i] - xs[j]
        scale = Fraction(ys[i]) / denom
        for k, c in enumerate(num):
            coeffs[k] += scale * c
    return coeffs
