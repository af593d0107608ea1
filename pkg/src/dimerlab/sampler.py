"""Random matchings on torus quotients: exact sampling, Glauber dynamics on
face rotations, height-variance profiles, and double-dimer loop censuses.

Face rotations preserve the height-change class, so a chain samples the
Boltzmann measure conditioned on the class of its initial matching.  Initial
matchings in a prescribed class come from enumerating a small torus and tiling
the best match periodically; the unconditioned torus measure at small n is
reached by drawing the class from exact enumeration first.
"""

from dataclasses import dataclass, field as dc_field
import math

import numpy as np

from .lattice import (TorusGraph, Matching, enumerate_matchings,
                      EnumerationTooLarge, height_field, _dart_edge_instance)
from .charpoly import characteristic_polynomial
from . import amoeba


# ---------------------------------------------------------------------------
# Exact sampling by enumeration

def _enumerated(torus, cap=10 ** 7):
    # cache on the base domain so repeated TorusGraph(domain, n) calls share it
    done = getattr(torus.base, "_enum_results", None)
    if done is None:
        done = torus.base._enum_results = {}
        torus.base._enum_failed = {}
    if torus.n in done:
        return done[torus.n]
    failed_at = torus.base._enum_failed.get(torus.n)
    if failed_at is not None and cap <= failed_at:
        raise EnumerationTooLarge(
            f"too large for enumeration: more than {failed_at} matchings")
    try:
        records = enumerate_matchings(torus, cap=cap)
    except EnumerationTooLarge:
        torus.base._enum_failed[torus.n] = cap
        raise
    done[torus.n] = records
    return records


def sample_exact(torus, seed, count):
    """Independent draws from the torus Boltzmann measure, by enumeration.

    Only viable when the matching count fits the enumeration cap; energies are
    turned into probabilities with a max-shift for stability."""
    records = _enumerated(torus)
    en = np.array([r.energy for r in records])
    w = np.exp(-(en - en.min()))
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(records), size=int(count), p=w / w.sum())
    return [records[i].matching for i in idx]


# ---------------------------------------------------------------------------
# Face rotation structure

@dataclass
class _RotationGroup:
    """All faces of one class on one cell sublattice (a,b) + (qx,qy)*Z^2.

    These are pairwise edge-disjoint, so the whole group updates in one
    vectorized lazy-Metropolis step.  Boundary edges are addressed by strided
    slices of the state viewed as (chains, base edge, cx, cy): dart
    (e, sx, sy, kx, ky) means m[:, e, sx::qx, sy::qy], rolled back by the
    period shifts (kx, ky) to align with the translate lattice."""
    qx: int
    qy: int
    half: int               # boundary length / 2
    plus_darts: tuple       # ((e, sx, sy, kx, ky), ...): darts leaving a white
    minus_darts: tuple
    accept_pm: float        # lazy P(flip | plus state); includes the 1/2
    accept_mp: float


def _dart_cells(base, fi):
    """(edge, cell) of every boundary edge of face class fi at anchor (0,0)."""
    out = []
    for e, s, (dx, dy) in base.faces[fi].darts:
        cx, cy = dx, dy
        if s == -1:
            off = base.edges[e].offset
            cx, cy = cx - off[0], cy - off[1]
        out.append((e, s, cx, cy))
    return out


def _conflict_deltas(base):
    """Per face class: anchor differences at which two translates share an
    edge (0 excluded).  Independent of the torus size for large enough tori."""
    cached = getattr(base, "_conflict_deltas", None)
    if cached is not None:
        return cached
    span = 1
    for fi in range(len(base.faces)):
        for _, _, cx, cy in _dart_cells(base, fi):
            span = max(span, abs(cx), abs(cy))
    out = []
    for fi in range(len(base.faces)):
        cells = _dart_cells(base, fi)
        deltas = set()
        for e1, _, x1, y1 in cells:
            for e2, _, x2, y2 in cells:
                if e1 == e2 and (x1 != x2 or y1 != y2):
                    deltas.add((x1 - x2, y1 - y2))
        out.append(deltas)
    base._conflict_deltas = (2 * span, out)
    return base._conflict_deltas


def _sweep_plan(torus):
    """Sequential list of rotation groups covering every flippable face.

    Each face class gets the smallest sublattice period (qx, qy) dividing n
    that separates all conflicting translates; classes wrapping the torus
    (duplicate boundary instances) cannot alternate and are dropped."""
    cached = getattr(torus, "_sweep_plan_cache", None)
    if cached is not None:
        return cached
    base = torus.base
    n = torus.n
    span, deltas_by_class = _conflict_deltas(base)
    plan = []
    for fi, fc in enumerate(base.faces):
        inst = [_dart_edge_instance(torus, d, (0, 0)) for d in fc.darts]
        if len(set(inst)) != len(inst):
            continue    # face wraps this torus; rotation undefined
        deltas = {((dx % n + n) % n, (dy % n + n) % n)
                  for dx, dy in deltas_by_class[fi]}
        deltas.discard((0, 0))
        best = None
        for qx in (1, 2, 4, n):
            for qy in (1, 2, 4, n):
                if n % qx or n % qy:
                    continue
                if any(dx % qx == 0 and dy % qy == 0 for dx, dy in deltas):
                    continue
                if best is None or qx * qy < best[0] * best[1]:
                    best = (qx, qy)
        if best is None:
            continue    # cannot happen for n > span; defensive
        qx, qy = best
        darts = fc.darts
        de = sum(base.edges[e].energy for e, s, _ in darts if s == -1) \
            - sum(base.edges[e].energy for e, s, _ in darts if s == +1)
        cells = _dart_cells(base, fi)
        for a in range(qx):
            for b in range(qy):
                plus, minus = [], []
                for e, s, cx, cy in cells:
                    sx, sy = (a + cx) % qx, (b + cy) % qy
                    entry = (e, sx, sy, (a + cx - sx) // qx,
                             (b + cy - sy) // qy)
                    (plus if s == +1 else minus).append(entry)
                plan.append(_RotationGroup(
                    qx, qy, len(darts) // 2, tuple(plus), tuple(minus),
                    0.5 * min(1.0, math.exp(-de)),
                    0.5 * min(1.0, math.exp(de))))
    torus._sweep_plan_cache = plan
    return plan


class MCMCSampler:
    """Parallel Glauber chains on face rotations, one shared torus.

    Each sweep proposes every rotatable face once, color class by color class;
    rotations inside one class are edge-disjoint, so the whole class updates in
    a single vectorized Metropolis step.  The height-change class of the
    initial matching is conserved."""

    def __init__(self, torus, initial, chains=1, seed=0, validate=False):
        self.torus = torus
        self.chains = int(chains)
        self.rng = np.random.default_rng(seed)
        self.validate = validate
        self.plan = _sweep_plan(torus)
        self.m = np.tile(initial.indicator(), (self.chains, 1))
        self._m4 = self.m.reshape(self.chains, len(torus.base.edges),
                                  torus.n, torus.n)
        self._cells = [(torus.n // g.qx) * (torus.n // g.qy)
                       for g in self.plan]
        self.sweeps_done = 0
        self._w_of = np.array([torus.edge_endpoints(k)[0]
                               for k in range(torus.num_edges)])
        self._b_of = np.array([torus.edge_endpoints(k)[1]
                               for k in range(torus.num_edges)])

    def sweep(self, count=1):
        m4 = self._m4
        R = self.chains
        n = self.torus.n
        total = sum(self._cells)
        for _ in range(int(count)):
            coins = self.rng.random((R, total), dtype=np.float32)
            pos = 0
            for g, k in zip(self.plan, self._cells):
                dx, dy = n // g.qx, n // g.qy
                coin = coins[:, pos:pos + k].reshape(R, dx, dy)
                pos += k
                cp = cm = None
                for e, sx, sy, kx, ky in g.plus_darts:
                    s = m4[:, e, sx::g.qx, sy::g.qy]
                    if kx % dx or ky % dy:
                        s = np.roll(s, (-kx, -ky), axis=(1, 2))
                    cp = s.astype(np.int8) if cp is None else cp.__iadd__(s)
                for e, sx, sy, kx, ky in g.minus_darts:
                    s = m4[:, e, sx::g.qx, sy::g.qy]
                    if kx % dx or ky % dy:
                        s = np.roll(s, (-kx, -ky), axis=(1, 2))
                    cm = s.astype(np.int8) if cm is None else cm.__iadd__(s)
                isplus = (cp == g.half) & (cm == 0)
                isminus = (cm == g.half) & (cp == 0)
                flip = (isplus & (coin < g.accept_pm)) \
                    | (isminus & (coin < g.accept_mp))
                if not flip.any():
                    continue
                f8 = flip.view(np.int8)
                for e, sx, sy, kx, ky in g.plus_darts + g.minus_darts:
                    fr = f8
                    if kx % dx or ky % dy:
                        fr = np.roll(f8, (kx, ky), axis=(1, 2))
                    m4[:, e, sx::g.qx, sy::g.qy] ^= fr
            self.sweeps_done += 1
            if self.validate:
                self.check_valid()

    def check_valid(self):
        # every vertex covered exactly once, in every chain
        W = self.torus.num_whites
        for r in range(self.chains):
            edges = np.nonzero(self.m[r])[0]
            if len(edges) != W:
                raise AssertionError("matching size broken")
            if len(np.unique(self._w_of[edges])) != W or \
                    len(np.unique(self._b_of[edges])) != W:
                raise AssertionError("vertex covered twice")

    def states(self):
        return self.m.copy()

    def matching(self, chain=0, check=False):
        return Matching(self.torus, np.nonzero(self.m[chain])[0].tolist(),
                        check=check)


def sample_mcmc(torus, seed, sweeps, initial=None, field=(0, 0)):
    """One matching after `sweeps` full Glauber passes.

    The chain stays in the height-change class of `initial` (default: the
    dominant class for the given field)."""
    if initial is None:
        initial = initial_matching(torus.base, torus.n, field=field)
    s = MCMCSampler(torus, initial, chains=1, seed=seed)
    s.sweep(sweeps)
    return s.matching()


def sample_torus_ensemble(torus, seed, count, warmup=None, cap=10 ** 6):
    """Draws from the unconditioned torus measure at small n.

    The height-change class is drawn from exactly enumerated class weights,
    then a Glauber chain equilibrates inside the class."""
    records = _enumerated(torus, cap=cap)
    by_class = {}
    for r in records:
        by_class.setdefault(r.height_change, []).append(r)
    labels = sorted(by_class)
    logw = [np.logaddexp.reduce([-r.energy for r in by_class[c]])
            for c in labels]
    logw = np.array(logw)
    p = np.exp(logw - logw.max())
    p /= p.sum()
    rng = np.random.default_rng(seed)
    picks = rng.multinomial(int(count), p)
    if warmup is None:
        warmup = 10 * torus.n ** 2
    out = []
    for c, k in zip(labels, picks):
        if k == 0:
            continue
        init = by_class[c][0].matching
        s = MCMCSampler(torus, init, chains=int(k),
                        seed=rng.integers(2 ** 63))
        s.sweep(warmup)
        out.append(s.states())
    states = np.concatenate(out, axis=0)
    return states[rng.permutation(len(states))]


# ---------------------------------------------------------------------------
# Initial matchings with a prescribed slope

def initial_matching(domain, n, slope=None, field=(0, 0), periods=(1, 2, 3, 4),
                     cap=20000):
    """Periodic matching of G_n whose height change per cell approximates
    `slope` (default: the Ronkin gradient at `field`).

    Small tori G_p (p | n) are enumerated and the best class match is tiled.
    Frozen-corner slopes land on exact lifts (and stop the period search);
    liquid slopes get as close as the admissible classes of the largest
    feasible period allow."""
    if slope is None:
        P = characteristic_polynomial(domain)
        slope = amoeba.ronkin_gradient(P, field[0], field[1])
    torus = TorusGraph(domain, n)
    best = None
    for p in periods:
        if n % p != 0:
            continue
        if best is not None and best[0][0] == 0.0:
            break
        try:
            records = _enumerated(TorusGraph(domain, p), cap=cap)
        except EnumerationTooLarge:
            continue
        for r in records:
            d = math.hypot(r.height_change[0] / p - slope[0],
                           r.height_change[1] / p - slope[1])
            key = (round(d, 9), p, round(r.energy, 12), r.matching.edges)
            if best is None or key < best[0]:
                best = (key, p, r)
    if best is None:
        raise EnumerationTooLarge("no feasible period for initial matching")
    _, p, rec = best
    reps = n // p
    chosen = []
    for k in rec.matching.edges:
        eidx, (ax, ay) = rec.matching.torus.edge_instance(k)
        for i in range(reps):
            for j in range(reps):
                chosen.append(torus.edge_index(eidx, ax + p * i, ay + p * j))
    return Matching(torus, chosen, check=False)


# ---------------------------------------------------------------------------
# phi-map: the linear coordinate entering the variance law

def phi_map(P, Bx, By):
    """Complex pair (A, B) with phi(dx,dy) = dx*A + dy*B, or None.

    At a simple torus root the map is built from the root and the gradient;
    at a real node it comes from the tangent slopes lambda solving
    a + b*lambda + c*lambda^2 = 0 for the local quadratic of P."""
    roots = amoeba.torus_roots(P, Bx, By)
    if not roots:
        return None
    node = next((r for r in roots if r.node), None)
    simple = next((r for r in roots if not r.node), None)
    if simple is not None:
        return simple.alpha * simple.z0, -simple.beta * simple.w0
    r = node
    terms = P.to_float().terms
    a = b = c = 0.0 + 0j
    for (j, k), co in terms.items():
        val = co * math.exp(j * Bx + k * By) * r.z0 ** j * r.w0 ** k
        a += j * j * val
        b += 2 * j * k * val
        c += k * k * val
    if abs(c) < 1e-12 * (abs(a) + abs(b) + 1e-300):
        return 1.0 + 0j, 1j
    disc = np.sqrt(b * b - 4 * a * c + 0j)
    lam = (-b + disc) / (2 * c)
    if lam.imag < 0:
        lam = (-b - disc) / (2 * c)
    return 1.0 + 0j, lam


# ---------------------------------------------------------------------------
# Height variance profiles

@dataclass
class VarianceProfile:
    phase: str
    rs: np.ndarray
    phi_dist: np.ndarray
    variance: np.ndarray
    fit_slope: float
    fit_intercept: float
    deterministic: bool
    candidates: dict
    meta: dict = dc_field(default_factory=dict)

    def rows(self):
        return [(int(r), float(p), float(v))
                for r, p, v in zip(self.rs, self.phi_dist, self.variance)]


def variance_profile(domain, field, n, samples, seed=0, chains=32,
                     warmup=None, stride=None, rs=None, fit_range=None):
    """Monte-Carlo Var[h(f1)-h(f2)] against distance along the x direction.

    Probes are all translates of a face pair at cell displacement (r, 0);
    variances are averaged over translates (never pooled: pairs crossing the
    torus seam carry different class constants).  The least-squares fit of
    Var against log phi-distance runs over r in [4, n/4] by default."""
    Bx, By = field
    P = characteristic_polynomial(domain)
    phase, info = amoeba.phase_of(P, Bx, By)
    slope = amoeba.ronkin_gradient(P, Bx, By)
    init = initial_matching(domain, n, slope=slope)
    torus = init.torus

    if warmup is None:
        warmup = 10 * n * n
    if stride is None:
        stride = n * n
    sampler = MCMCSampler(torus, init, chains=chains, seed=seed)
    sampler.sweep(warmup)
    rounds = max(1, -(-int(samples) // chains))
    collected = []
    for k in range(rounds):
        if k:
            sampler.sweep(stride)
        collected.append(sampler.states())
    states = np.concatenate(collected, axis=0)

    h = height_field(states, torus)
    if rs is None:
        rs = np.arange(1, n // 2 + 1)
    rs = np.asarray(rs)
    nn = n * n
    cells = np.arange(nn)
    cx, cy = np.divmod(cells, n)
    var = np.empty(len(rs))
    for i, r in enumerate(rs):
        shifted = ((cx + r) % n) * n + cy
        diff = h[:, shifted] - h[:, cells]
        var[i] = diff.var(axis=0, ddof=1).mean()

    pm = phi_map(P, Bx, By)
    if pm is None:
        phi = rs.astype(float)
    else:
        phi = np.abs(rs * pm[0])
    deterministic = bool(np.all(var == 0.0))

    if fit_range is None:
        fit_range = (4, max(5, n // 4))
    mask = (rs >= fit_range[0]) & (rs <= fit_range[1])
    if deterministic or mask.sum() < 2:
        fs, fi_ = 0.0, float(var.mean()) if len(var) else 0.0
    else:
        fs, fi_ = np.polyfit(np.log(phi[mask]), var[mask], 1)
    return VarianceProfile(
        phase=phase, rs=rs, phi_dist=phi, variance=var,
        fit_slope=float(fs), fit_intercept=float(fi_),
        deterministic=deterministic,
        candidates={"1/pi^2": 1 / math.pi ** 2, "1/pi": 1 / math.pi},
        meta={"seed": seed, "chains": chains, "warmup": warmup,
              "stride": stride, "samples": int(states.shape[0]), "n": n,
              "field": (float(Bx), float(By)), "phase_info": info,
              "init_class": init.height_change(), "fit_range": fit_range})


# ---------------------------------------------------------------------------
# Double-dimer loop census

def _cycles_of_pair(torus, m1, m2, w_of, b_of):
    """Cycles of the symmetric difference, as unwrapped polygons.

    Returns a list of (points array, homology (hx, hy)); doubled edges drop
    out, every remaining vertex has one edge from each matching."""
    n = torus.n
    base = torus.base
    nn = n * n
    W = torus.num_whites
    e1 = np.nonzero(m1)[0]
    e2 = np.nonzero(m2)[0]
    we1 = np.empty(W, dtype=np.int64)
    we1[w_of[e1]] = e1
    we2 = np.empty(W, dtype=np.int64)
    we2[w_of[e2]] = e2
    be2 = np.empty(W, dtype=np.int64)
    be2[b_of[e2]] = e2
    active = we1 != we2
    offsets = [e.offset for e in base.edges]
    wpos = [base.wpos[w] for w in base.whites]
    bpos = [base.bpos[b] for b in base.blacks]
    seen = np.zeros(W, dtype=bool)
    cycles = []
    for w0 in np.nonzero(active)[0]:
        if seen[w0]:
            continue
        pts = []
        w = int(w0)
        widx, ci = divmod(w, nn)
        cell = list(divmod(ci, n))
        start_cell = tuple(cell)
        while True:
            seen[w] = True
            widx = w // nn
            pts.append((wpos[widx][0] + cell[0], wpos[widx][1] + cell[1]))
            ka = int(we1[w])
            ea, _ = torus.edge_instance(ka)
            dx, dy = offsets[ea]
            bcell = (cell[0] + dx, cell[1] + dy)
            b = int(b_of[ka])
            bidx = b // nn
            pts.append((bpos[bidx][0] + bcell[0], bpos[bidx][1] + bcell[1]))
            kb = int(be2[b])
            eb, _ = torus.edge_instance(kb)
            dx, dy = offsets[eb]
            cell = [bcell[0] - dx, bcell[1] - dy]
            w = int(w_of[kb])
            if w == int(w0):
                break
        hom = (cell[0] - start_cell[0], cell[1] - start_cell[1])
        cycles.append((np.array(pts), hom))
    return cycles


def _encloses_each(points, centers, n):
    """Even-odd test for each center against all its Z*n translates.

    points: (L, 2) closed polygon (implicitly closed).  centers: (C, 2).
    Returns a boolean per center: some translate of it lies inside."""
    x = points[:, 0]
    y = points[:, 1]
    x2 = np.roll(x, -1)
    y2 = np.roll(y, -1)
    dy = y2 - y
    slope = np.where(dy == 0, 0.0, (x2 - x) / np.where(dy == 0, 1.0, dy))
    xlo, xhi = x.min(), x.max()
    ylo, yhi = y.min(), y.max()
    out = np.zeros(len(centers), dtype=bool)
    qx_all, qy_all, owner = [], [], []
    for c, (px, py) in enumerate(centers):
        for ix in range(math.ceil((xlo - px) / n), math.floor((xhi - px) / n) + 1):
            for iy in range(math.ceil((ylo - py) / n), math.floor((yhi - py) / n) + 1):
                qx_all.append(px + n * ix)
                qy_all.append(py + n * iy)
                owner.append(c)
    if not qx_all:
        return out
    qx = np.array(qx_all)
    qy = np.array(qy_all)
    straddle = (y[:, None] > qy) != (y2[:, None] > qy)
    xint = x[:, None] + (qy - y[:, None]) * slope[:, None]
    inside = (straddle & (qx < xint)).sum(axis=0) % 2 == 1
    np.logical_or.at(out, owner, inside)
    return out


def _encloses(points, px, py, n):
    """True if the polygon winds around any Z*n translate of (px, py)."""
    return bool(_encloses_each(points, [(px, py)], n)[0])


@dataclass
class LoopCensus:
    counts: np.ndarray          # per run, around the fixed center face
    mean: float                 # translate-averaged estimate of E[count]
    stderr: float
    counts_avg: np.ndarray = None
    meta: dict = dc_field(default_factory=dict)


def loops_around_center(torus, m1, m2, center=None):
    """Number of contractible cycles of m1 (+) m2 enclosing the center face."""
    if hasattr(m1, "indicator"):
        m1 = m1.indicator()
    if hasattr(m2, "indicator"):
        m2 = m2.indicator()
    w_of = np.array([torus.edge_endpoints(k)[0] for k in range(torus.num_edges)])
    b_of = np.array([torus.edge_endpoints(k)[1] for k in range(torus.num_edges)])
    px, py = _center_point(torus, center)
    count = 0
    for pts, hom in _cycles_of_pair(torus, m1, m2, w_of, b_of):
        if hom == (0, 0) and _encloses(pts, px, py, torus.n):
            count += 1
    return count


def _center_point(torus, center=None):
    base = torus.base
    if center is None:
        center = (0, (torus.n // 2, torus.n // 2))
    fi, (cx, cy) = center
    pos = []
    for e, s, (dx, dy) in base.faces[fi].darts:
        ed = base.edges[e]
        if s == +1:
            px, py = base.wpos[ed.white]
        else:
            px, py = base.bpos[ed.black]
        pos.append((px + cx + dx, py + cy + dy))
    pos = np.array(pos)
    return float(pos[:, 0].mean()), float(pos[:, 1].mean())


def double_dimer_loops(torus, seed, samples, field=(0, 0), chains=64,
                       warmup=None, stride=None, center=None):
    """Census of loops around the center face in unions of sample pairs.

    Each run superimposes two independent matchings from the dominant class
    chain; counted loops are contractible cycles enclosing the face.  The
    summary mean additionally averages the count over a grid of translated
    centers: by translation invariance every center has the same expected
    count, so this is the same quantity with a smaller error bar."""
    n = torus.n
    init = initial_matching(torus.base, n, field=field)
    if warmup is None:
        warmup = 10 * n * n
    if stride is None:
        stride = n * n
    chains = min(int(chains), int(samples))
    sampler = MCMCSampler(torus, init, chains=chains, seed=seed)
    sampler.sweep(warmup)
    rounds = 2 * max(1, -(-int(samples) // chains))
    w_of = sampler._w_of
    b_of = sampler._b_of
    px, py = _center_point(torus, center)
    grid = 4 if n % 4 == 0 else (2 if n % 2 == 0 else 1)
    step = n // grid
    centers = [(px + a * step, py + b * step)
               for a in range(grid) for b in range(grid)]
    counts = []
    counts_avg = []
    prev = None
    for k in range(rounds):
        if k:
            sampler.sweep(stride)
        cur = sampler.states()
        if prev is not None:
            for r in range(chains):
                if len(counts) >= samples:
                    break
                per_center = np.zeros(len(centers))
                for pts, hom in _cycles_of_pair(torus, prev[r], cur[r],
                                                w_of, b_of):
                    if hom == (0, 0):
                        per_center += _encloses_each(pts, centers, n)
                counts.append(int(per_center[0]))
                counts_avg.append(per_center.mean())
            prev = None
        else:
            prev = cur
    counts = np.array(counts[:int(samples)])
    counts_avg = np.array(counts_avg[:int(samples)])
    return LoopCensus(
        counts=counts, mean=float(counts_avg.mean()),
        stderr=float(counts_avg.std(ddof=1) / math.sqrt(len(counts_avg))),
        counts_avg=counts_avg,
        meta={"seed": seed, "chains": chains, "warmup": warmup,
              "stride": stride, "runs": len(counts), "n": n,
              "field": tuple(map(float, field)),
              "init_class": init.height_change(),
              "center": (px, py), "center_grid": grid})
