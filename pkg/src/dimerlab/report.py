"""Artifact emission: CSV/JSON tables and SVG figures.

Every figure is rendered next to the table it derives from; tables are the
primary record.  Output is deterministic for a fixed seed and config: float
cells use 6 significant digits, JSON is key-sorted with a schema version,
and matplotlib SVGs are salted and stripped of timestamps.
"""

import csv
from fractions import Fraction
import json
import math

import numpy as np

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt     # noqa: E402

plt.rcParams["svg.hashsalt"] = "dimerlab"
plt.rcParams["svg.fonttype"] = "path"
plt.rcParams["figure.max_open_warning"] = 0

SCHEMA = 1


def g6(v):
    """6-significant-digit cell formatting; integers stay integral."""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if math.isnan(v):
            return "nan"
        return f"{float(v):.6g}"
    if isinstance(v, complex):
        return f"{v.real:.6g}{v.imag:+.6g}j"
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for row in rows:
            wr.writerow([g6(v) for v in row])
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, Fraction):
        return {"num": obj.numerator, "den": obj.denominator}
    return obj


def write_json(path, payload):
    doc = {"schema": SCHEMA}
    doc.update(_jsonable(payload))
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def save_figure(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


# ---------------------------------------------------------------------------
# Figures

def fig_contour(xs, ys, Z, path, label="", filled=True):
    """Contour rendering of a grid function (Ronkin, surface tension)."""
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    if filled:
        m = ax.contourf(X, Y, Z, levels=24)
        fig.colorbar(m, ax=ax)
    ax.contour(X, Y, Z, levels=24, colors="k", linewidths=0.4)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if label:
        ax.set_title(label)
    ax.set_aspect("equal")
    return save_figure(fig, path)


_PHASE_COLOR = {"liquid": "#355e8d", "gaseous": "#b04a4a",
                "frozen": "#d9c27a"}


def phase_raster(diagram):
    """Phase name per raster cell from the component census."""
    names = np.full(diagram.labels.shape, "liquid", dtype=object)
    for comp in diagram.components:
        mask = diagram.labels == comp.label
        names[mask] = "gaseous" if comp.kind == "bounded" else "frozen"
    return names


def fig_phase_diagram(diagram, path, label=""):
    """Raster of the phase classification with component outlines."""
    xs, ys = diagram.xs, diagram.ys
    phase = phase_raster(diagram)
    code = np.zeros(diagram.labels.shape)
    names = ["liquid", "gaseous", "frozen"]
    for i, nm in enumerate(names):
        code[phase == nm] = i
    fig, ax = plt.subplots(figsize=(5.2, 4.8))
    from matplotlib.colors import ListedColormap
    cmap = ListedColormap([_PHASE_COLOR[nm] for nm in names])
    ax.imshow(code.T, origin="lower", cmap=cmap, vmin=-0.5, vmax=2.5,
              extent=(xs[0], xs[-1], ys[0], ys[-1]), interpolation="nearest")
    ax.contour(xs, ys, diagram.inside.T.astype(float), levels=[0.5],
               colors="k", linewidths=0.7)
    ax.set_xlabel("Bx")
    ax.set_ylabel("By")
    if label:
        ax.set_title(label)
    ax.set_aspect("equal")
    return save_figure(fig, path)


def lattice_points(polygon):
    """(j, k, class) rows for every lattice point of the polygon."""
    return [(j, k, polygon.classify(j, k))
            for (j, k) in polygon.interior + polygon.boundary]


def fig_newton(polygon, path, label=""):
    verts = [(float(a), float(b)) for a, b in polygon.vertices]
    fig, ax = plt.subplots(figsize=(4.2, 4.2))
    px = [v[0] for v in verts] + [verts[0][0]]
    py = [v[1] for v in verts] + [verts[0][1]]
    ax.plot(px, py, "k-", lw=1.2)
    lp = lattice_points(polygon)
    ax.plot([p[0] for p in lp], [p[1] for p in lp], "o", ms=4,
            color="#355e8d")
    ax.set_xlabel("j")
    ax.set_ylabel("k")
    if label:
        ax.set_title(label)
    ax.set_aspect("equal")
    ax.grid(True, lw=0.3)
    return save_figure(fig, path)


def fig_decay(rows, path, label="", semilog=False):
    """Covariance decay: log-log by default, semi-log for gaseous fields."""
    rs = [r[0] for r in rows]
    vals = [abs(r[1]) for r in rows]
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    if semilog:
        ax.semilogy(rs, vals, "o-", ms=3)
    else:
        ax.loglog(rs, vals, "o-", ms=3)
    ax.set_xlabel("r")
    ax.set_ylabel("|cov|")
    if label:
        ax.set_title(label)
    ax.grid(True, which="both", lw=0.3)
    return save_figure(fig, path)


def fig_variance(profile, path, label=""):
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    phi = profile.phi_dist
    ax.semilogx(phi, profile.variance, "o", ms=4)
    if profile.fit_slope is not None:
        xs = np.array([max(min(phi), 1e-9), max(phi)])
        ax.semilogx(xs, profile.fit_slope * np.log(xs)
                    + profile.fit_intercept, "k--", lw=1)
    ax.set_xlabel("|phi(f1) - phi(f2)|")
    ax.set_ylabel("Var(h(f1) - h(f2))")
    if label:
        ax.set_title(label)
    ax.grid(True, which="both", lw=0.3)
    return save_figure(fig, path)


def fig_loops(census_by_n, path, label=""):
    ns = sorted(census_by_n)
    means = [census_by_n[n].mean for n in ns]
    errs = [census_by_n[n].stderr for n in ns]
    fig, ax = plt.subplots(figsize=(4.6, 4.0))
    ax.errorbar(ns, means, yerr=errs, fmt="o-", capsize=3)
    ax.set_xlabel("n")
    ax.set_ylabel("mean loops around center")
    ax.set_xscale("log", base=2)
    if label:
        ax.set_title(label)
    ax.grid(True, lw=0.3)
    return save_figure(fig, path)
