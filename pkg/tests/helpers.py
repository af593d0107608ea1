"""Shared builders for the tests; domains and polynomials cached per process."""

from dimerlab import lattices
from dimerlab.charpoly import characteristic_polynomial

FIXTURE_NAMES = list(lattices.FIXTURE_NAMES)

# Characteristic polynomials of the built-in fixtures, frozen as coefficient
# dictionaries.  Cross-checked against signed enumeration over the one-cell
# torus; any change here must come with a matching enumeration check.
CANONICAL = {
    "honeycomb": {(0, 0): 1, (1, 0): -1, (0, 1): -1},
    "square": {(0, 0): 1, (0, -1): -1, (-1, 0): -1, (-1, -1): -1},
    "square_2x2": {(0, 0): 1, (-1, 0): -4, (-1, 1): -1, (-1, -1): -1,
                   (-2, 0): 1},
    "square_octagon": {(0, 0): 5, (1, 0): -1, (-1, 0): -1, (0, 1): -1,
                       (0, -1): -1},
    "square_4x4_weighted": {(0, 0): 10, (-1, 0): -203, (-1, 1): -11,
                            (-1, -1): -11, (-2, 0): 429, (-2, 1): -77,
                            (-2, -1): -77, (-2, 2): 1, (-2, -2): 1,
                            (-3, 0): -59, (-3, 1): -2, (-3, -1): -2,
                            (-4, 0): 1},
}

# Weighted matching counts of the n x n torus, frozen from enumeration.
Z_N1 = {"honeycomb": 3, "square": 4, "square_2x2": 8, "square_octagon": 9,
        "square_4x4_weighted": 884}
Z_N2 = {"honeycomb": 9, "square": 24, "square_2x2": 272,
        "square_octagon": 641, "square_4x4_weighted": 43116361632}

# m(1 - z - w) = 3 sqrt(3) / (4 pi) * L(chi_-3, 2), and twice Catalan/pi:
# the free energies per fundamental domain of the two classical lattices.
SMYTH = 0.3230659472194505
TWO_CATALAN_PI = 0.5831218080616376

_dom = {}
_pol = {}


def domain(name):
    if name not in _dom:
        _dom[name] = lattices.build(name)
    return _dom[name]


def charpoly(name):
    if name not in _pol:
        _pol[name] = characteristic_polynomial(domain(name))
    return _pol[name]
