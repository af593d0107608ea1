"""Built-in lattice constructions and shipped fixture files.

Builders construct domains either directly in cell coordinates or from a
drawing in original plane coordinates together with a period basis; the
reduction to cell positions and integer edge offsets is automatic.
"""

from fractions import Fraction
import importlib.resources
import json
import math
import os

from .lattice import Edge, FundamentalDomain, domain_from_dict

FIXTURE_NAMES = ("honeycomb", "square", "square_2x2", "square_octagon",
                 "square_4x4_weighted")


def from_original(name, whites, blacks, edges, basis):
    """Domain from a drawing in original coordinates.

    whites/blacks: {id: (x, y)} positions of one representative per vertex
    class.  edges: (white_id, black_id, black_instance_pos, energy) where the
    instance position differs from the black's representative by a period.
    basis: two integer-or-rational period vectors spanning the lattice.
    """
    b1, b2 = basis
    det = Fraction(b1[0]) * Fraction(b2[1]) - Fraction(b1[1]) * Fraction(b2[0])
    if det == 0:
        raise ValueError("degenerate period basis")

    def cell_coords(p):
        x, y = Fraction(p[0]), Fraction(p[1])
        # solve a*b1 + b*b2 = (x, y)
        a = (x * Fraction(b2[1]) - y * Fraction(b2[0])) / det
        b = (Fraction(b1[0]) * y - Fraction(b1[1]) * x) / det
        return a, b

    def split(p):
        a, b = cell_coords(p)
        ka, kb = math.floor(a), math.floor(b)
        return (ka, kb), (a - ka, b - kb)

    wcell, wfrac = {}, {}
    for w, p in whites.items():
        wcell[w], wfrac[w] = split(p)
    bcell, bfrac = {}, {}
    for b, p in blacks.items():
        bcell[b], bfrac[b] = split(p)

    out_edges = []
    for w, b, bpos, energy in edges:
        ca, cb = cell_coords(bpos)
        ra, rb = cell_coords(blacks[b])
        ta, tb = ca - ra, cb - rb
        if ta.denominator != 1 or tb.denominator != 1:
            raise ValueError(f"edge {w}-{b}: instance not a period translate")
        base = (bcell[b][0] + int(ta), bcell[b][1] + int(tb))
        off = (base[0] - wcell[w][0], base[1] - wcell[w][1])
        out_edges.append({"white": w, "black": b, "energy": float(energy),
                          "offset": [off[0], off[1]]})

    return {
        "name": name,
        "whites": [{"id": w, "pos": [float(wfrac[w][0]), float(wfrac[w][1])]}
                   for w in whites],
        "blacks": [{"id": b, "pos": [float(bfrac[b][0]), float(bfrac[b][1])]}
                   for b in blacks],
        "edges": out_edges,
    }


def honeycomb_dict(ea=0.0, eb=0.0, ec=0.0):
    """Hexagonal lattice, one white and one black per cell."""
    third = 1.0 / 3.0
    return {
        "name": "honeycomb",
        "whites": [{"id": "w0", "pos": [third, third]}],
        "blacks": [{"id": "b0", "pos": [0.0, 0.0]}],
        "edges": [
            {"white": "w0", "black": "b0", "energy": float(ea), "offset": [0, 0]},
            {"white": "w0", "black": "b0", "energy": float(eb), "offset": [1, 0]},
            {"white": "w0", "black": "b0", "energy": float(ec), "offset": [0, 1]},
        ],
    }


def square_dict():
    """Z^2 with the smallest (one white, one black) fundamental domain.

    The period basis is (1,1), (-1,1): the color-preserving sublattice of the
    square lattice."""
    whites = {"w0": (0, 0)}
    blacks = {"b0": (0, 1)}
    edges = [
        ("w0", "b0", (0, 1), 0.0),
        ("w0", "b0", (1, 0), 0.0),
        ("w0", "b0", (-1, 0), 0.0),
        ("w0", "b0", (0, -1), 0.0),
    ]
    return from_original("square", whites, blacks, edges, ((1, 1), (-1, 1)))


def square_k_dict(k, weighted=None, name=None):
    """Z^2 with a k x k fundamental domain (k even), unit weights except the
    entries of `weighted`: {(white_orig, black_orig): energy}."""
    assert k % 2 == 0
    weighted = dict(weighted or {})
    whites, blacks = {}, {}
    for i in range(k):
        for j in range(k):
            vid = f"{'w' if (i + j) % 2 == 0 else 'b'}{i}{j}"
            (whites if (i + j) % 2 == 0 else blacks)[vid] = (i, j)
    edges = []
    for wid, (i, j) in whites.items():
        for di, dj in ((1, 0), (0, 1), (-1, 0), (0, -1)):
            ni, nj = i + di, j + dj
            bid = f"b{ni % k}{nj % k}"
            energy = weighted.get(((i, j), (ni, nj)), 0.0)
            edges.append((wid, bid, (ni, nj), energy))
    return from_original(name or f"square_{k}x{k}", whites, blacks, edges,
                         ((k, 0), (0, k)))


def square_2x2_dict():
    return square_k_dict(2, name="square_2x2")


def square_4x4_weighted_dict():
    # one strong edge: weight 10 on white (0,0) - black (1,0)
    return square_k_dict(4, weighted={((0, 0), (1, 0)): -math.log(10.0)},
                         name="square_4x4_weighted")


def square_octagon_dict():
    """Truncated square tiling: 4-valent squares joined by bridges.

    The color-preserving period basis is (1,1), (1,-1), so one cell holds two
    small squares (8 vertices, 12 edges)."""
    d = Fraction(1, 4)
    # square A at (0,0): E/W white, N/S black; square B at (1,0): flipped
    whites = {"aE": (d, 0), "aW": (-d, 0), "bN": (1, d), "bS": (1, -d)}
    blacks = {"aN": (0, d), "aS": (0, -d), "bE": (1 + d, 0), "bW": (1 - d, 0)}
    edges = [
        # around square A
        ("aE", "aN", (0, d), 0.0),
        ("aW", "aN", (0, d), 0.0),
        ("aW", "aS", (0, -d), 0.0),
        ("aE", "aS", (0, -d), 0.0),
        # around square B
        ("bN", "bE", (1 + d, 0), 0.0),
        ("bN", "bW", (1 - d, 0), 0.0),
        ("bS", "bW", (1 - d, 0), 0.0),
        ("bS", "bE", (1 + d, 0), 0.0),
        # bridges, each translated so its white endpoint is the representative
        ("aE", "bW", (1 - d, 0), 0.0),     # east bridge of square A
        ("bS", "aN", (1, d - 1), 0.0),     # north bridge of A, shifted by (1,-1)
        ("aW", "bE", (d - 1, 0), 0.0),     # east bridge of B, shifted by (-2,0)
        ("bN", "aS", (1, 1 - d), 0.0),     # north bridge of B
    ]
    return from_original("square_octagon", whites, blacks, edges,
                         ((1, 1), (1, -1)))


def hexagonal_weighted_dict(n, ea=None, eb=None, ec=None, name=None):
    """Honeycomb with an n x n cell of independently weighted edge triples.

    ea/eb/ec: n x n energy arrays for the offset-(0,0), x-step and y-step
    edges of subcell (i,j); defaults are zeros."""
    import numpy as np
    zeros = np.zeros((n, n))
    ea = np.asarray(ea if ea is not None else zeros, dtype=float)
    eb = np.asarray(eb if eb is not None else zeros, dtype=float)
    ec = np.asarray(ec if ec is not None else zeros, dtype=float)
    third = 1.0 / 3.0
    whites = [{"id": f"w{i}_{j}", "pos": [(i + third) / n, (j + third) / n]}
              for i in range(n) for j in range(n)]
    blacks = [{"id": f"b{i}_{j}", "pos": [i / n, j / n]}
              for i in range(n) for j in range(n)]
    edges = []
    for i in range(n):
        for j in range(n):
            w = f"w{i}_{j}"
            edges.append({"white": w, "black": f"b{i}_{j}",
                          "energy": float(ea[i, j]), "offset": [0, 0]})
            edges.append({"white": w, "black": f"b{(i + 1) % n}_{j}",
                          "energy": float(eb[i, j]),
                          "offset": [1 if i == n - 1 else 0, 0]})
            edges.append({"white": w, "black": f"b{i}_{(j + 1) % n}",
                          "energy": float(ec[i, j]),
                          "offset": [0, 1 if j == n - 1 else 0]})
    return {"name": name or f"hexagonal_{n}x{n}",
            "whites": whites, "blacks": blacks, "edges": edges}


_BUILDERS = {
    "honeycomb": honeycomb_dict,
    "square": square_dict,
    "square_2x2": square_2x2_dict,
    "square_octagon": square_octagon_dict,
    "square_4x4_weighted": square_4x4_weighted_dict,
}


def build(name, **kw):
    """FundamentalDomain for a named built-in lattice."""
    if name == "hexagonal":
        return domain_from_dict(hexagonal_weighted_dict(**kw))
    return domain_from_dict(_BUILDERS[name](**kw))


def load_fixture(name):
    """Domain from a shipped fixture file (name with or without .json)."""
    name = name.removesuffix(".json")
    ref = importlib.resources.files("dimerlab") / "fixtures" / f"{name}.json"
    return domain_from_dict(json.loads(ref.read_text()), name=name)


def fixture_path(name):
    name = name.removesuffix(".json")
    ref = importlib.resources.files("dimerlab") / "fixtures" / f"{name}.json"
    return str(ref)


def resolve_domain(spec):
    """Domain from a file path or a built-in fixture name."""
    if os.path.exists(spec):
        from .lattice import load_domain
        return load_domain(spec)
    base = os.path.basename(spec).removesuffix(".json")
    if base in _BUILDERS:
        return load_fixture(base)
    raise FileNotFoundError(f"no such graph file or fixture: {spec}")


def write_fixtures(outdir):
    os.makedirs(outdir, exist_ok=True)
    for name, builder in _BUILDERS.items():
        with open(os.path.join(outdir, f"{name}.json"), "w") as fh:
            json.dump(builder(), fh, indent=2)
            fh.write("\n")
