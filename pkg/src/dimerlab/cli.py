"""Command-line front end.

Each subcommand maps onto one library module and writes its artifacts into
an output directory: JSON for scalar reports, CSV for tables, and an SVG
figure next to every table that has a natural picture.  Figures are always
derived from an emitted table, never the only record.

Exit codes: 0 success, 2 validation error (bad arguments, missing or
malformed spec, refusing to overwrite), 3 numerical non-convergence or
budget exhaustion.
"""

import argparse
import json
import os
import sys


class CliError(Exception):
    def __init__(self, code, msg):
        super().__init__(msg)
        self.code = code


def _parser():
    ap = argparse.ArgumentParser(
        prog="dimerlab",
        description="Dimer models on periodic bipartite graphs: "
                    "characteristic polynomials, amoebas, phases, sampling.")
    sub = ap.add_subparsers(dest="command")

    def add(name, help_, spec=True):
        p = sub.add_parser(name, help=help_)
        if spec:
            p.add_argument("--spec", required=True,
                           help="fixture name or path to a graph spec JSON")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--force", action="store_true",
                       help="overwrite existing outputs")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=0,
                       help="cap BLAS/OpenMP worker threads")
        return p

    add("poly", "characteristic polynomial P(z,w)")

    p = add("newton", "Newton polygon of P with its lattice points")
    p.add_argument("--svg", default=None)

    p = add("ronkin", "Ronkin function on a grid")
    p.add_argument("--window", type=float, nargs=4, default=None,
                   metavar=("X0", "X1", "Y0", "Y1"))
    p.add_argument("--resolution", type=int, default=80)
    p.add_argument("--svg", default=None)

    p = add("amoeba", "amoeba raster and complement census")
    p.add_argument("--window", type=float, nargs=4, default=None)
    p.add_argument("--resolution", type=int, default=400)
    p.add_argument("--svg", default=None)

    p = add("tension", "surface tension on the Newton polygon")
    p.add_argument("--resolution", type=int, default=120)
    p.add_argument("--ronkin-resolution", type=int, default=160)
    p.add_argument("--svg", default=None)

    p = add("phase", "phase of the Gibbs measure at a magnetic field")
    p.add_argument("--bx", type=float, default=0.0)
    p.add_argument("--by", type=float, default=0.0)

    p = add("zn", "torus partition function Z(G_n)")
    p.add_argument("--n", type=int, default=1)

    p = add("probs", "edge probabilities (infinite volume or torus)")
    p.add_argument("--bx", type=float, default=0.0)
    p.add_argument("--by", type=float, default=0.0)
    p.add_argument("--n", type=int, default=0,
                   help="torus size; 0 = infinite-volume kernel")

    p = add("cov", "edge-edge covariance decay along a direction")
    p.add_argument("--bx", type=float, default=0.0)
    p.add_argument("--by", type=float, default=0.0)
    p.add_argument("--e1", type=int, default=0)
    p.add_argument("--e2", type=int, default=0)
    p.add_argument("--dir", type=int, nargs=2, default=(1, 0))
    p.add_argument("--rmax", type=int, default=24)
    p.add_argument("--svg", default=None)

    p = add("sample", "draw matchings on a torus")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--method", choices=("exact", "mcmc"), default="exact")
    p.add_argument("--sweeps", type=int, default=None,
                   help="mcmc sweeps between samples (default n^2)")
    p.add_argument("--bx", type=float, default=0.0)
    p.add_argument("--by", type=float, default=0.0)

    p = add("variance", "height variance profile on a torus")
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--samples", type=int, default=400)
    p.add_argument("--bx", type=float, default=0.0)
    p.add_argument("--by", type=float, default=0.0)
    p.add_argument("--svg", default=None)

    p = add("loops", "double-dimer loop census over a ladder of sizes")
    p.add_argument("--sizes", type=int, nargs="+", default=(8, 16, 32))
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--bx", type=float, default=0.0)
    p.add_argument("--by", type=float, default=0.0)
    p.add_argument("--svg", default=None)

    p = add("harnack", "maximality report: 2-to-1 map and amoeba area")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--area-samples", type=int, default=2_000_000)

    return ap


def _load_domain(specarg):
    from . import lattices
    name = os.path.basename(specarg).removesuffix(".json")
    if "/" not in specarg and name in lattices.FIXTURE_NAMES:
        return lattices.load_fixture(name)
    if not os.path.exists(specarg):
        raise CliError(2, f"spec not found: {specarg}")
    try:
        with open(specarg) as fh:
            data = json.load(fh)
        return lattices.domain_from_dict(data, name=name)
    except CliError:
        raise
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise CliError(2, f"invalid spec {specarg}: {exc}")


def _outpath(args, filename):
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, filename)
    if os.path.exists(path) and not args.force:
        raise CliError(2, f"refusing to overwrite {path} (use --force)")
    return path


def _figpath(args, default_name):
    custom = getattr(args, "svg", None)
    if custom:
        d = os.path.dirname(custom)
        if d:
            os.makedirs(d, exist_ok=True)
        if os.path.exists(custom) and not args.force:
            raise CliError(2, f"refusing to overwrite {custom} (use --force)")
        return custom
    return _outpath(args, default_name)


def cmd_poly(args):
    from . import report
    from .charpoly import characteristic_polynomial
    dom = _load_domain(args.spec)
    P = characteristic_polynomial(dom)
    print(P.pretty())
    report.write_json(_outpath(args, "poly.json"),
                      {"name": dom.name, "polynomial": P.to_json_dict()})
    return 0


def cmd_newton(args):
    from . import report
    from .charpoly import characteristic_polynomial, newton_polygon
    dom = _load_domain(args.spec)
    P = characteristic_polynomial(dom)
    poly = newton_polygon(P)
    pts = report.lattice_points(poly)
    report.write_csv(_outpath(args, "newton.csv"), ("j", "k", "class"), pts)
    report.fig_newton(poly, _figpath(args, "newton.svg"), label=dom.name)
    report.write_json(_outpath(args, "newton.json"), {
        "name": dom.name,
        "vertices": [list(v) for v in poly.vertices],
        "area": float(poly.area),
        "interior_points": len(poly.interior),
        "boundary_points": len(poly.boundary)})
    print(f"area {float(poly.area):g}, {len(poly.interior)} interior / "
          f"{len(poly.boundary)} boundary lattice points")
    return 0


def cmd_ronkin(args):
    from . import amoeba, report
    from .charpoly import characteristic_polynomial
    dom = _load_domain(args.spec)
    P = characteristic_polynomial(dom)
    window = tuple(args.window) if args.window else amoeba.suggest_window(P)
    if args.resolution < 4:
        raise CliError(2, "resolution must be at least 4")
    rg = amoeba.ronkin_grid(P, window, args.resolution)
    rows = [(x, y, rg.F[i, j]) for i, x in enumerate(rg.xs)
            for j, y in enumerate(rg.ys)]
    report.write_csv(_outpath(args, "ronkin.csv"), ("x", "y", "F"), rows)
    report.fig_contour(rg.xs, rg.ys, rg.F, _figpath(args, "ronkin.svg"),
                       label=f"Ronkin function, {dom.name}")
    print(f"grid {args.resolution}^2 on window {window}, "
          f"tol {rg.tol:.1e}")
    return 0


def cmd_amoeba(args):
    from . import amoeba, report
    from .charpoly import characteristic_polynomial
    dom = _load_domain(args.spec)
    P = characteristic_polynomial(dom)
    window = tuple(args.window) if args.window else None
    diag = amoeba.amoeba_grid(P, window=window, resolution=args.resolution)
    phase = report.phase_raster(diag)
    rows = [(x, y, int(diag.labels[i, j]), phase[i, j])
            for i, x in enumerate(diag.xs) for j, y in enumerate(diag.ys)]
    report.write_csv(_outpath(args, "amoeba.csv"),
                     ("x", "y", "label", "phase"), rows)
    report.fig_phase_diagram(diag, _figpath(args, "amoeba.svg"),
                             label=f"amoeba, {dom.name}")
    kinds = [c.kind for c in diag.components]
    census = {"bounded": kinds.count("bounded"),
              "semi-bounded": kinds.count("semi-bounded"),
              "unbounded": kinds.count("unbounded")}
    report.write_json(_outpath(args, "amoeba.json"), {
        "name": dom.name, "census": census,
        "components": [{"label": c.label, "kind": c.kind,
                        "slope": list(c.slope), "cells": c.cells}
                       for c in diag.components]})
    print(f"{census['bounded']} holes, {census['semi-bounded']} strips, "
          f"{census['unbounded']} tentacle regions")
    return 0


def cmd_tension(args):
    from . import amoeba, report, tension
    from .charpoly import characteristic_polynomial
    import numpy as np
    dom = _load_domain(args.spec)
    P = characteristic_polynomial(dom)
    rg = amoeba.ronkin_grid(P, amoeba.suggest_window(P),
                            args.ronkin_resolution)
    st = tension.surface_tension_grid(rg, resolution=args.resolution)
    rows = [(s, t, st.sigma[i, j]) for i, s in enumerate(st.ss)
            for j, t in enumerate(st.ts) if np.isfinite(st.sigma[i, j])]
    report.write_csv(_outpath(args, "tension.csv"), ("s", "t", "sigma"), rows)
    masked = np.where(np.isfinite(st.sigma), st.sigma, np.nan)
    report.fig_contour(st.ss, st.ts, masked, _figpath(args, "tension.svg"),
                       label=f"surface tension, {dom.name}")
    print(f"sigma on {args.resolution}^2 slope grid, "
          f"discretization tol {st.tol:.1e}")
    return 0


def cmd_phase(args):
    from . import amoeba, report
    from .charpoly import characteristic_polynomial
    dom = _load_domain(args.spec)
    P = characteristic_polynomial(dom)
    phase, info = amoeba.phase_of(P, args.bx, args.by)
    if phase == "liquid":
        print("liquid")
    else:
        print(f"{phase}, component slope {tuple(info['slope'])}")
    payload = {"name": dom.name, "field": [args.bx, args.by],
               "phase": phase}
    payload.update({k: v for k, v in info.items() if k != "boundary"})
    report.write_json(_outpath(args, "phase.json"), payload)
    return 0


def cmd_zn(args):
    from fractions import Fraction
    from . import report
    from .charpoly import partition_function_torus
    dom = _load_domain(args.spec)
    if args.n < 1:
        raise CliError(2, "n must be >= 1")
    Z = partition_function_torus(dom, args.n)
    if isinstance(Z, Fraction):
        zs = str(Z) if Z.denominator != 1 else str(Z.numerator)
    else:
        zs = f"{Z:.12g}"
    print(f"Z(G_{args.n}) = {zs}")
    report.write_json(_outpath(args, "zn.json"),
                      {"name": dom.name, "n": args.n, "Z": zs})
    return 0


def cmd_probs(args):
    from . import report
    from . import gibbs
    dom = _load_domain(args.spec)
    field = (args.bx, args.by)
    edges = []
    if args.n:
        for k in range(len(dom.edges)):
            p = gibbs.torus_edge_probability(dom, args.n, [k], field=field)
            edges.append(p)
        kind = f"torus n={args.n}"
    else:
        ker = gibbs.InverseKernel(dom, field)
        for k in range(len(dom.edges)):
            edges.append(gibbs.edge_probability(dom, [k], field, kernel=ker))
        kind = "infinite volume"
    rows = []
    sums = {}
    for k, p in enumerate(edges):
        e = dom.edges[k]
        rows.append({"edge": k, "white": e.white, "black": e.black,
                     "offset": list(e.offset), "probability": float(p)})
        sums[e.white] = sums.get(e.white, 0.0) + float(p)
    report.write_json(_outpath(args, "probs.json"), {
        "name": dom.name, "kind": kind, "field": [args.bx, args.by],
        "edges": rows, "white_sums": sums})
    for r in rows:
        print(f"edge {r['edge']:2d} {r['white']}->{r['black']} "
              f"{r['probability']:.6f}")
    return 0


def cmd_cov(args):
    from . import report
    from . import gibbs
    dom = _load_domain(args.spec)
    ne = len(dom.edges)
    if not (0 <= args.e1 < ne and 0 <= args.e2 < ne):
        raise CliError(2, f"edge index out of range (0..{ne - 1})")
    if args.rmax < 2:
        raise CliError(2, "rmax must be >= 2")
    field = (args.bx, args.by)
    rs = list(range(1, args.rmax + 1))
    vals = gibbs.covariance_profile(dom, args.e1, args.e2, tuple(args.dir),
                                    rs, field=field)
    rows = [(r * args.dir[0], r * args.dir[1], v, 0.0)
            for r, v in zip(rs, vals)]
    report.write_csv(_outpath(args, "cov.csv"),
                     ("offset_x", "offset_y", "value", "error"), rows)
    from .amoeba import phase_of
    from .charpoly import characteristic_polynomial
    phase, _ = phase_of(characteristic_polynomial(dom), *field)
    fitrows = [(r, v) for r, v in zip(rs, vals)]
    if phase == "gaseous":
        fit = gibbs.fit_exponential_decay(rs, vals)
    else:
        fit = gibbs.fit_power_decay(rs, vals)
    report.fig_decay(fitrows, _figpath(args, "cov.svg"),
                     label=f"covariance decay, {dom.name} ({phase})",
                     semilog=(phase == "gaseous"))
    print(f"{phase}: fit {fit}")
    return 0


def cmd_sample(args):
    from . import report, sampler
    from .lattice import TorusGraph
    dom = _load_domain(args.spec)
    if args.n < 1 or args.count < 1:
        raise CliError(2, "n and count must be positive")
    torus = TorusGraph(dom, args.n)
    if args.method == "exact":
        ms = sampler.sample_exact(torus, args.seed, args.count)
        meta = {"method": "exact"}
    else:
        stride = args.sweeps if args.sweeps else args.n * args.n
        mc = sampler.MCMCSampler(
            torus, sampler.initial_matching(dom, args.n,
                                            field=(args.bx, args.by)),
            chains=1, seed=args.seed)
        mc.sweep(10 * args.n * args.n)
        ms = []
        for _ in range(args.count):
            mc.sweep(stride)
            ms.append(mc.matching(0))
        meta = {"method": "mcmc", "warmup": 10 * args.n * args.n,
                "stride": stride}
    meta.update({"seed": args.seed, "n": args.n, "count": args.count})
    report.write_json(_outpath(args, "samples.json"), {
        "name": dom.name, "meta": meta,
        "samples": [list(map(int, m.edges)) for m in ms]})
    print(f"{len(ms)} matchings of G_{args.n} "
          f"({torus.num_whites} dimers each)")
    return 0


def cmd_variance(args):
    from . import report, sampler
    dom = _load_domain(args.spec)
    vp = sampler.variance_profile(dom, (args.bx, args.by), args.n,
                                  args.samples, seed=args.seed)
    report.write_csv(_outpath(args, "variance.csv"),
                     ("r", "phi_dist", "variance"), vp.rows())
    report.fig_variance(vp, _figpath(args, "variance.svg"),
                        label=f"height variance, {dom.name} ({vp.phase})")
    report.write_json(_outpath(args, "variance.json"), {
        "name": dom.name, "phase": vp.phase,
        "fit_slope": vp.fit_slope, "fit_intercept": vp.fit_intercept,
        "deterministic": vp.deterministic,
        "candidates": vp.candidates, "meta": vp.meta})
    if vp.deterministic:
        print(f"{vp.phase}: deterministic height differences")
    else:
        print(f"{vp.phase}: fitted log-slope {vp.fit_slope:.4f}")
    return 0


def cmd_loops(args):
    from . import report, sampler
    from .lattice import TorusGraph
    dom = _load_domain(args.spec)
    census = {}
    rows = []
    for n in args.sizes:
        c = sampler.double_dimer_loops(TorusGraph(dom, n), args.seed,
                                       args.samples,
                                       field=(args.bx, args.by))
        census[n] = c
        for i, (k, ka) in enumerate(zip(c.counts, c.counts_avg)):
            rows.append((n, i, int(k), float(ka)))
    report.write_csv(_outpath(args, "loops.csv"),
                     ("n", "run", "count", "count_translate_avg"), rows)
    report.fig_loops(census, _figpath(args, "loops.svg"),
                     label=f"double-dimer loops, {dom.name}")
    report.write_json(_outpath(args, "loops.json"), {
        "name": dom.name, "field": [args.bx, args.by],
        "sizes": list(args.sizes),
        "means": {str(n): census[n].mean for n in args.sizes},
        "stderr": {str(n): census[n].stderr for n in args.sizes}})
    for n in args.sizes:
        print(f"n={n:3d}: mean {census[n].mean:.4f} "
              f"+- {census[n].stderr:.4f}")
    return 0


def cmd_harnack(args):
    from . import harnack, report
    from .charpoly import characteristic_polynomial
    dom = _load_domain(args.spec)
    P = characteristic_polynomial(dom)
    rep = harnack.maximality_report(P, seed=args.seed,
                                    two_to_one_samples=args.samples,
                                    area_samples=args.area_samples)
    report.write_json(_outpath(args, "harnack.json"), rep)
    ok = not rep["violations"]
    area = rep["checks"]["area"]
    print(f"two_to_one: {rep['checks']['two_to_one']['ok']}, "
          f"area {area['value']:.3f} vs bound {area['bound']:.3f}: "
          f"{'ok' if ok else 'VIOLATIONS'}")
    return 0 if ok else 3


_COMMANDS = {
    "poly": cmd_poly, "newton": cmd_newton, "ronkin": cmd_ronkin,
    "amoeba": cmd_amoeba, "tension": cmd_tension, "phase": cmd_phase,
    "zn": cmd_zn, "probs": cmd_probs, "cov": cmd_cov, "sample": cmd_sample,
    "variance": cmd_variance, "loops": cmd_loops, "harnack": cmd_harnack,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    # thread caps must land before numpy loads its BLAS
    if "--threads" in argv:
        try:
            t = int(argv[argv.index("--threads") + 1])
        except (IndexError, ValueError):
            t = 0
        if t > 0:
            for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                        "MKL_NUM_THREADS"):
                os.environ[var] = str(t)
    ap = _parser()
    args = ap.parse_args(argv)
    if not args.command:
        ap.print_help()
        return 2
    try:
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except Exception as exc:  # numerical failures map to exit 3
        from .lattice import EnumerationTooLarge
        import numpy as np
        if isinstance(exc, (EnumerationTooLarge, np.linalg.LinAlgError,
                            FloatingPointError, RuntimeError)):
            print(f"numerical failure: {exc}", file=sys.stderr)
            return 3
        raise


if __name__ == "__main__":
    sys.exit(main())
