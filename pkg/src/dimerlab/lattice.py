"""Periodic bipartite planar graphs, torus quotients, matchings, heights.

A fundamental domain lists vertices at positions in [0,1)^2 and edges
white -> black with an integer cell offset (dx,dy): the cell of the black
endpoint relative to the white endpoint's cell.  All torus and infinite-graph
structure is derived from these data.
"""

from collections import Counter, deque
from dataclasses import dataclass
from fractions import Fraction
import itertools
import json
import math

import numpy as np


class DomainError(ValueError):
    pass


class EnumerationTooLarge(RuntimeError):
    pass


def _detect_rational_weight(energy, den_cap=10 ** 4, rel_tol=1e-11):
    """Fraction equal to e^-energy when that is (numerically) rational, else None."""
    w = math.exp(-energy)
    f = Fraction(w).limit_denominator(den_cap)
    if f > 0 and abs(w - float(f)) <= rel_tol * max(1.0, w):
        return f
    return None


@dataclass(frozen=True)
class Edge:
    white: str
    black: str
    offset: tuple
    energy: float

    @property
    def weight(self):
        return math.exp(-self.energy)


@dataclass(frozen=True)
class FaceClass:
    """One face of the torus quotient G1.

    darts: cyclic tuple of (edge index, direction, cell) traversed with the
    face on the left; direction +1 means white->black; cell is the cell of the
    dart's tail vertex relative to the trace origin.
    """
    darts: tuple

    @property
    def degree(self):
        return len(self.darts)

    def edge_multiplicity(self):
        return Counter(e for e, _, _ in self.darts)


def _seg_intersect(p1, p2, q1, q2, eps=1e-12):
    """True if segments cross improperly: interiors meet, or collinear overlap.

    Sharing a single endpoint is allowed; an endpoint in the other segment's
    interior is not.
    """
    p1, p2, q1, q2 = map(np.asarray, (p1, p2, q1, q2))
    d1 = p2 - p1
    d2 = q2 - q1
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    r = q1 - p1
    if abs(denom) > eps:
        t = (r[0] * d2[1] - r[1] * d2[0]) / denom
        u = (r[0] * d1[1] - r[1] * d1[0]) / denom
        if -eps < t < 1 + eps and -eps < u < 1 + eps:
            # touching exactly at endpoints of both is fine
            end_t = t < eps or t > 1 - eps
            end_u = u < eps or u > 1 - eps
            return not (end_t and end_u)
        return False
    # parallel: only collinear segments can conflict
    if abs(r[0] * d1[1] - r[1] * d1[0]) > 1e-9:
        return False
    L2 = d1 @ d1
    t0 = (r @ d1) / L2
    t1 = t0 + (d2 @ d1) / L2
    lo, hi = min(t0, t1), max(t0, t1)
    return min(hi, 1.0) - max(lo, 0.0) > 1e-9  # positive-length overlap


class FundamentalDomain:
    """Validated weighted bipartite graph in one period cell."""

    def __init__(self, whites, blacks, edges, name="domain"):
        # whites/blacks: list of (id, (x, y)); edges: list of Edge
        self.name = name
        self.whites = [str(i) for i, _ in whites]
        self.blacks = [str(i) for i, _ in blacks]
        self.wpos = {str(i): (float(p[0]), float(p[1])) for i, p in whites}
        self.bpos = {str(i): (float(p[0]), float(p[1])) for i, p in blacks}
        self.edges = list(edges)
        self._validate_ids()
        if len(self.whites) != len(self.blacks):
            raise DomainError("no perfect matching of G1: unequal color counts")
        self._validate_planarity()
        self._validate_connected()
        self.faces = self._trace_faces()
        self.windex = {w: i for i, w in enumerate(self.whites)}
        self.bindex = {b: i for i, b in enumerate(self.blacks)}
        rw = [_detect_rational_weight(e.energy) for e in self.edges]
        self.rational_weights = rw if all(f is not None for f in rw) else None
        if self._first_matching() is None:
            raise DomainError("no perfect matching of G1")

    # -- validation -------------------------------------------------------

    def _validate_ids(self):
        if set(self.whites) & set(self.blacks):
            raise DomainError("schema violation: id used for both colors")
        if len(set(self.whites)) != len(self.whites) or \
                len(set(self.blacks)) != len(self.blacks):
            raise DomainError("schema violation: duplicate vertex id")
        if not self.edges:
            raise DomainError("schema violation: no edges")
        for e in self.edges:
            if e.white not in self.wpos or e.black not in self.bpos:
                if e.white in self.bpos or e.black in self.wpos:
                    raise DomainError(f"non-bipartite edge {e.white}-{e.black}")
                raise DomainError(f"schema violation: unknown vertex in edge "
                                  f"{e.white}-{e.black}")
        deg = Counter()
        for e in self.edges:
            deg[("w", e.white)] += 1
            deg[("b", e.black)] += 1
        for w in self.whites:
            if deg[("w", w)] == 0:
                raise DomainError(f"vertex {w} has degree 0")
        for b in self.blacks:
            if deg[("b", b)] == 0:
                raise DomainError(f"vertex {b} has degree 0")

    def _segment(self, eidx, cell=(0, 0)):
        e = self.edges[eidx]
        wx, wy = self.wpos[e.white]
        bx, by = self.bpos[e.black]
        return ((wx + cell[0], wy + cell[1]),
                (bx + e.offset[0] + cell[0], by + e.offset[1] + cell[1]))

    def _validate_planarity(self):
        spread = 1 + max(max(abs(e.offset[0]), abs(e.offset[1])) for e in self.edges)
        cells = [(cx, cy) for cx in range(-spread, spread + 1)
                 for cy in range(-spread, spread + 1)]
        nE = len(self.edges)
        for i in range(nE):
            s1 = self._segment(i)
            if np.hypot(s1[1][0] - s1[0][0], s1[1][1] - s1[0][1]) < 1e-9:
                raise DomainError("degenerate embedding: zero-length edge")
            for j in range(nE):
                for cell in cells:
                    if j == i and cell == (0, 0):
                        continue
                    if j < i and cell == (0, 0):
                        continue  # already seen as (j, i) at cell (0,0)
                    s2 = self._segment(j, cell)
                    if _seg_intersect(*s1, *s2):
                        raise DomainError(
                            f"planarity violation: edges {i} and {j} at cell "
                            f"{cell} cross in the embedding")

    def _validate_connected(self):
        parent = {("w", w): ("w", w) for w in self.whites}
        parent.update({("b", b): ("b", b) for b in self.blacks})

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.edges:
            a, b = find(("w", e.white)), find(("b", e.black))
            if a != b:
                parent[a] = b
        roots = {find(v) for v in parent}
        if len(roots) > 1:
            raise DomainError("quotient graph G1 is not connected")

    # -- rotation system and faces ---------------------------------------

    def _rotations(self):
        """Counterclockwise dart order at each vertex class.

        A dart is (edge index, direction); direction +1 leaves the white
        endpoint, -1 leaves the black endpoint.
        """
        rot = {}
        for w in self.whites:
            darts = []
            for i, e in enumerate(self.edges):
                if e.white != w:
                    continue
                bx, by = self.bpos[e.black]
                wx, wy = self.wpos[w]
                ang = math.atan2(by + e.offset[1] - wy, bx + e.offset[0] - wx)
                darts.append((ang, i, +1))
            self._check_angles(darts, ("white", w))
            rot[("w", w)] = [(i, s) for _, i, s in sorted(darts)]
        for b in self.blacks:
            darts = []
            for i, e in enumerate(self.edges):
                if e.black != b:
                    continue
                bx, by = self.bpos[b]
                wx, wy = self.wpos[e.white]
                ang = math.atan2(wy - e.offset[1] - by, wx - e.offset[0] - bx)
                darts.append((ang, i, -1))
            self._check_angles(darts, ("black", b))
            rot[("b", b)] = [(i, s) for _, i, s in sorted(darts)]
        return rot

    @staticmethod
    def _check_angles(darts, vertex):
        angs = sorted(a for a, _, _ in darts)
        for a, b in zip(angs, angs[1:] + [angs[0] + 2 * math.pi]):
            if b - a < 1e-9:
                raise DomainError(f"degenerate embedding: coincident edge "
                                  f"directions at {vertex[0]} {vertex[1]}")

    def _dart_head(self, eidx, s, cell):
        """(vertex key, cell) at the head of a dart whose tail sits in cell."""
        e = self.edges[eidx]
        if s == +1:
            return ("b", e.black), (cell[0] + e.offset[0], cell[1] + e.offset[1])
        return ("w", e.white), (cell[0] - e.offset[0], cell[1] - e.offset[1])

    def _trace_faces(self):
        rot = self._rotations()
        pos = {("w", w): self.wpos[w] for w in self.whites}
        pos.update({("b", b): self.bpos[b] for b in self.blacks})
        seen = set()
        faces = []
        for e0, s0 in [(i, s) for i in range(len(self.edges)) for s in (+1, -1)]:
            if (e0, s0) in seen:
                continue
            cycle = []
            e, s, cell = e0, s0, (0, 0)
            for _ in range(4 * len(self.edges) + 4):
                cycle.append((e, s, cell))
                head, hcell = self._dart_head(e, s, cell)
                order = rot[head]
                k = order.index((e, -s))
                e, s = order[(k - 1) % len(order)]
                cell = hcell
                if (e, s) == (e0, s0):
                    break
            else:
                raise DomainError("degenerate embedding: face trace does not close")
            if cell != (0, 0):
                raise DomainError("degenerate embedding: face wraps the torus")
            for de, ds, _ in cycle:
                seen.add((de, ds))
            # orientation check: faces must come out counterclockwise
            poly = []
            for de, ds, dc in cycle:
                v = ("w", self.edges[de].white) if ds == +1 else ("b", self.edges[de].black)
                poly.append((pos[v][0] + dc[0], pos[v][1] + dc[1]))
            area2 = sum(poly[i][0] * poly[(i + 1) % len(poly)][1]
                        - poly[(i + 1) % len(poly)][0] * poly[i][1]
                        for i in range(len(poly)))
            if area2 <= 0:
                raise DomainError("degenerate embedding: clockwise face trace")
            faces.append(FaceClass(tuple(cycle)))
        V = len(self.whites) + len(self.blacks)
        if len(faces) != len(self.edges) - V:
            raise DomainError("degenerate embedding: Euler count failed on torus")
        return faces

    # -- misc -------------------------------------------------------------

    def edge_weight_exact(self, eidx):
        if self.rational_weights is None:
            raise ValueError("weights are not rational")
        return self.rational_weights[eidx]

    def _first_matching(self):
        """Any perfect matching of G1, or None (small backtracking search)."""
        byw = {w: [] for w in self.whites}
        for i, e in enumerate(self.edges):
            byw[e.white].append(i)
        usedb = set()
        pick = []

        def rec(k):
            if k == len(self.whites):
                return True
            for i in byw[self.whites[k]]:
                b = self.edges[i].black
                if b in usedb:
                    continue
                usedb.add(b)
                pick.append(i)
                if rec(k + 1):
                    return True
                usedb.remove(b)
                pick.pop()
            return False

        return tuple(pick) if rec(0) else None

    def to_dict(self):
        return {
            "whites": [{"id": w, "pos": list(self.wpos[w])} for w in self.whites],
            "blacks": [{"id": b, "pos": list(self.bpos[b])} for b in self.blacks],
            "edges": [{"white": e.white, "black": e.black, "energy": e.energy,
                       "offset": list(e.offset)} for e in self.edges],
        }


def domain_from_dict(d, name="domain"):
    try:
        whites = [(v["id"], tuple(v["pos"])) for v in d["whites"]]
        blacks = [(v["id"], tuple(v["pos"])) for v in d["blacks"]]
        edges = [Edge(str(e["white"]), str(e["black"]),
                      (int(e["offset"][0]), int(e["offset"][1])),
                      float(e["energy"]))
                 for e in d["edges"]]
    except (KeyError, TypeError, IndexError) as exc:
        raise DomainError(f"schema violation: {exc}") from exc
    return FundamentalDomain(whites, blacks, edges, name=d.get("name", name))


def parse_domain(text):
    """FundamentalDomain from its JSON description (see domain_from_dict)."""
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"schema violation: invalid JSON ({exc})") from exc
    if not isinstance(d, dict):
        raise DomainError("schema violation: top level must be an object")
    return domain_from_dict(d)


def load_domain(path):
    with open(path) as fh:
        return parse_domain(fh.read())


# ---------------------------------------------------------------------------
# Torus quotients


class TorusGraph:
    """Quotient G_n: base domain vertices and edges copied over (Z/n)^2 cells."""

    def __init__(self, base, n):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.base = base
        self.n = int(n)
        n2 = self.n * self.n
        self.num_whites = len(base.whites) * n2
        self.num_blacks = len(base.blacks) * n2
        self.num_edges = len(base.edges) * n2

    # instance indexing: cells in row-major (cx, cy) order
    def cell_index(self, cx, cy):
        n = self.n
        return (cx % n) * n + (cy % n)

    def cell_of(self, ci):
        return divmod(ci, self.n)

    def white_index(self, w, cx, cy):
        return self.base.windex[w] * self.n * self.n + self.cell_index(cx, cy)

    def black_index(self, b, cx, cy):
        return self.base.bindex[b] * self.n * self.n + self.cell_index(cx, cy)

    def edge_index(self, eidx, cx, cy):
        """Instance of base edge eidx whose white endpoint is in cell (cx,cy)."""
        return eidx * self.n * self.n + self.cell_index(cx, cy)

    def edge_instance(self, k):
        eidx, ci = divmod(k, self.n * self.n)
        return eidx, self.cell_of(ci)

    def edge_endpoints(self, k):
        eidx, (cx, cy) = self.edge_instance(k)
        e = self.base.edges[eidx]
        return (self.white_index(e.white, cx, cy),
                self.black_index(e.black, cx + e.offset[0], cy + e.offset[1]))

    def edge_energy(self, k):
        eidx, _ = self.edge_instance(k)
        return self.base.edges[eidx].energy

    def incident_edges_of_white(self, wi):
        widx, ci = divmod(wi, self.n * self.n)
        cx, cy = self.cell_of(ci)
        w = self.base.whites[widx]
        return [self.edge_index(i, cx, cy)
                for i, e in enumerate(self.base.edges) if e.white == w]

    def incident_edges_of_black(self, bi):
        bidx, ci = divmod(bi, self.n * self.n)
        cx, cy = self.cell_of(ci)
        b = self.base.blacks[bidx]
        return [self.edge_index(i, cx - e.offset[0], cy - e.offset[1])
                for i, e in enumerate(self.base.edges) if e.black == b]

    def reference_lift(self):
        """The base reference matching copied into every cell."""
        lifted = getattr(self, "_ref_lift_cache", None)
        if lifted is not None:
            return lifted
        ref = reference_matching(self.base)
        chosen = [self.edge_index(eidx, cx, cy)
                  for eidx in ref.edges  # G1 instance index == base edge index
                  for cx in range(self.n) for cy in range(self.n)]
        lifted = Matching(self, chosen, check=False)
        self._ref_lift_cache = lifted
        return lifted


class Matching:
    """Perfect matching of a TorusGraph, stored as sorted edge instance indices."""

    def __init__(self, torus, edges, check=True):
        self.torus = torus
        self.edges = tuple(sorted(edges))
        if check:
            cover = Counter()
            for k in self.edges:
                wi, bi = torus.edge_endpoints(k)
                cover[("w", wi)] += 1
                cover[("b", bi)] += 1
            if len(cover) != torus.num_whites + torus.num_blacks or \
                    any(c != 1 for c in cover.values()):
                raise ValueError("not a perfect matching")

    def __eq__(self, other):
        return isinstance(other, Matching) and self.edges == other.edges \
            and self.torus is other.torus

    def __hash__(self):
        return hash(self.edges)

    def energy(self):
        return sum(self.torus.edge_energy(k) for k in self.edges)

    def weight_exact(self):
        base = self.torus.base
        out = Fraction(1)
        for k in self.edges:
            eidx, _ = self.torus.edge_instance(k)
            out *= base.edge_weight_exact(eidx)
        return out

    def offset_sum(self):
        base = self.torus.base
        sx = sy = 0
        for k in self.edges:
            eidx, _ = self.torus.edge_instance(k)
            dx, dy = base.edges[eidx].offset
            sx += dx
            sy += dy
        return sx, sy

    def height_change(self):
        """Homology class of the matching flow minus the reference flow.

        Measured in whole torus turns: the per-cell offset totals differ by a
        multiple of n, and that multiple is the class.
        """
        t = self.torus
        sx, sy = self.offset_sum()
        rx, ry = t.reference_lift().offset_sum()
        assert (sx - rx) % t.n == 0 and (sy - ry) % t.n == 0
        return ((sx - rx) // t.n, (sy - ry) // t.n)

    def indicator(self):
        m = np.zeros(self.torus.num_edges, dtype=np.int8)
        m[list(self.edges)] = 1
        return m


def _G1(base):
    g = getattr(base, "_g1_cache", None)
    if g is None:
        g = TorusGraph(base, 1)
        base._g1_cache = g
    return g


def expand_torus(domain, n):
    return TorusGraph(domain, n)


@dataclass(frozen=True)
class MatchingRecord:
    matching: Matching
    energy: float
    height_change: tuple


def _all_matchings(torus, cap):
    """Edge tuples of every perfect matching, deterministic DFS order."""
    whites = list(range(torus.num_whites))
    incid = [torus.incident_edges_of_white(wi) for wi in whites]
    used = np.zeros(torus.num_blacks, dtype=bool)
    chosen = []
    out = []

    def rec(k):
        if k == len(whites):
            out.append(tuple(chosen))
            if len(out) > cap:
                raise EnumerationTooLarge(
                    f"too large for enumeration: more than {cap} matchings")
            return
        for ei in incid[k]:
            _, bi = torus.edge_endpoints(ei)
            if used[bi]:
                continue
            used[bi] = True
            chosen.append(ei)
            rec(k + 1)
            chosen.pop()
            used[bi] = False

    rec(0)
    return out


def enumerate_matchings(torus, cap=10 ** 7):
    """All perfect matchings of the torus graph with energies and height
    changes.  Raises EnumerationTooLarge past `cap` results."""
    if isinstance(torus, FundamentalDomain):
        torus = _G1(torus)
    out = _all_matchings(torus, cap)
    ref_off = torus.reference_lift().offset_sum()
    records = []
    for edges in out:
        m = Matching(torus, edges, check=False)
        sx, sy = m.offset_sum()
        hc = ((sx - ref_off[0]) // torus.n, (sy - ref_off[1]) // torus.n)
        records.append(MatchingRecord(m, m.energy(), hc))
    return records


def reference_matching(domain):
    """Minimum-energy matching of G1, ties broken by lexicographically least
    edge index set.  Deterministic; this is the M0 all heights refer to."""
    ref = getattr(domain, "_ref_cache", None)
    if ref is not None:
        return ref
    g1 = _G1(domain)
    best = None
    for edges in _all_matchings(g1, cap=10 ** 7):
        m = Matching(g1, edges, check=False)
        key = (round(m.energy(), 12), m.edges)
        if best is None or key < best[0]:
            best = (key, m)
    if best is None:
        raise DomainError("no perfect matching of G1")
    domain._ref_cache = best[1]
    return best[1]


# ---------------------------------------------------------------------------
# Height functions on the dual graph


class HeightFunction:
    """Integer heights on the faces of a torus graph for one matching.

    Values come from integrating the matching flow minus the reference flow
    along a fixed dual spanning tree; the base face gets 0.  Sums around
    contractible dual loops vanish; noncontractible loops pick up the height
    change."""

    def __init__(self, torus, base_face, values, matching):
        self.torus = torus
        self.base_face = base_face
        self.values = values
        self.matching = matching

    def __getitem__(self, face):
        return self.values[face]


def face_instances(torus):
    return [(fi, (cx, cy))
            for fi in range(len(torus.base.faces))
            for cx in range(torus.n) for cy in range(torus.n)]


def _face_anchor_index(torus, fi, cx, cy):
    return fi * torus.n * torus.n + torus.cell_index(cx, cy)


def _dart_edge_instance(torus, dart, anchor):
    """Edge instance crossed by a face dart, given the face anchor cell."""
    e, s, (dx, dy) = dart
    cx, cy = anchor[0] + dx, anchor[1] + dy
    if s == +1:
        return torus.edge_index(e, cx, cy)
    off = torus.base.edges[e].offset
    return torus.edge_index(e, cx - off[0], cy - off[1])


def dual_structure(torus):
    """Spanning tree of the dual graph plus crossing data, cached per torus.

    Returns (order, parent, step) where order is a BFS ordering of face
    anchor indices, parent maps each face to its tree parent, and step maps
    each face to (edge instance, sign): crossing that edge from the parent
    face adds sign * (m - m0) on that edge instance to the height.
    """
    cached = getattr(torus, "_dual_cache", None)
    if cached is not None:
        return cached
    base = torus.base
    n = torus.n
    nf = len(base.faces) * n * n

    # opposite dart lookup: (e, -s) -> (face class, position in cycle)
    where = {}
    for fi, fc in enumerate(base.faces):
        for pos, (e, s, cell) in enumerate(fc.darts):
            where[(e, s)] = (fi, pos)

    order = [0]
    parent = np.full(nf, -1, dtype=np.int64)
    step_edge = np.zeros(nf, dtype=np.int64)
    step_sign = np.zeros(nf, dtype=np.int8)
    seen = np.zeros(nf, dtype=bool)
    seen[0] = True
    q = deque([0])
    while q:
        f = q.popleft()
        fi, ci = divmod(f, n * n)
        anchor = torus.cell_of(ci)
        for e, s, (dx, dy) in base.faces[fi].darts:
            ei = _dart_edge_instance(torus, (e, s, (dx, dy)), anchor)
            fj, pos = where[(e, -s)]
            # anchor of the neighbor: align tail cells of the two darts
            head_key, head_cell = base._dart_head(e, s,
                                                 (anchor[0] + dx, anchor[1] + dy))
            _, _, (ox, oy) = base.faces[fj].darts[pos]
            aj = (head_cell[0] - ox, head_cell[1] - oy)
            g = _face_anchor_index(torus, fj, aj[0], aj[1])
            if not seen[g]:
                seen[g] = True
                parent[g] = f
                step_edge[g] = ei
                # crossing dart (e,s) left to right lowers by s*(m-m0); the
                # neighbor lies to the right of our dart
                step_sign[g] = -s
                order.append(g)
                q.append(g)
    if not seen.all():
        raise DomainError("dual graph disconnected")
    cached = (np.array(order), parent, step_edge, step_sign)
    torus._dual_cache = cached
    return cached


def height_function(matching, base_face=None):
    """Heights of all face instances relative to base_face (default: face 0
    of cell (0,0)), integrating against the torus's reference matching."""
    torus = matching.torus
    order, parent, step_edge, step_sign = dual_structure(torus)
    flow = matching.indicator().astype(np.int64)
    flow -= torus.reference_lift().indicator()
    h = np.zeros(len(order), dtype=np.int64)
    for g in order[1:]:
        h[g] = h[parent[g]] + step_sign[g] * flow[step_edge[g]]
    if base_face is not None:
        fi, (cx, cy) = base_face
        h = h - h[_face_anchor_index(torus, fi, cx, cy)]
    values = {}
    n = torus.n
    for fi in range(len(torus.base.faces)):
        for cx in range(n):
            for cy in range(n):
                values[(fi, (cx, cy))] = int(h[_face_anchor_index(torus, fi, cx, cy)])
    return HeightFunction(torus, base_face or (0, (0, 0)), values, matching)


def height_field(matchings_indicator, torus):
    """Vectorized heights for a batch of matchings.

    matchings_indicator: (num_samples, num_edges) 0/1 array.  Returns
    (num_samples, num_faces) integer heights anchored at face 0, cell (0,0).
    """
    order, parent, step_edge, step_sign = dual_structure(torus)
    m0 = torus.reference_lift().indicator().astype(np.int64)
    flow = matchings_indicator.astype(np.int64) - m0[None, :]
    h = np.zeros((flow.shape[0], len(order)), dtype=np.int64)
    # process in BFS order; levels let us gather in chunks
    for g in order[1:]:
        h[:, g] = h[:, parent[g]] + step_sign[g] * flow[:, step_edge[g]]
    return h
