"""Artifact layer: cell formatting, JSON/CSV writers, figure determinism."""

import json
from fractions import Fraction

import numpy as np

from dimerlab import report
from dimerlab.charpoly import newton_polygon

from helpers import charpoly


def test_g6_formatting():
    assert report.g6(7) == "7"
    assert report.g6(np.int64(7)) == "7"
    assert report.g6(1 / 3) == "0.333333"
    assert report.g6(1234567.0) == "1.23457e+06"
    assert report.g6(float("nan")) == "nan"
    assert report.g6(np.float64(2.0)) == "2"
    assert report.g6(1 + 2j) == "1+2j"
    assert report.g6(0.5 - 0.25j) == "0.5-0.25j"
    assert report.g6("label") == "label"


def test_write_csv(tmp_path):
    path = tmp_path / "t.csv"
    report.write_csv(path, ("a", "b"), [(1, 1 / 3), (2, 0.5)])
    lines = path.read_text().splitlines()
    assert lines == ["a,b", "1,0.333333", "2,0.5"]


def test_write_json_types_and_layout(tmp_path):
    path = tmp_path / "t.json"
    payload = {
        "zint": np.int32(4),
        "zflt": np.float64(0.5),
        "flag": np.bool_(True),
        "arr": np.arange(3),
        "frac": Fraction(3, 7),
        "cplx": 1 - 2j,
        "nested": {"t": (1, 2)},
    }
    report.write_json(path, payload)
    text = path.read_text()
    doc = json.loads(text)
    assert doc["schema"] == 1
    assert doc["zint"] == 4 and doc["zflt"] == 0.5 and doc["flag"] is True
    assert doc["arr"] == [0, 1, 2]
    assert doc["frac"] == {"num": 3, "den": 7}
    assert doc["cplx"] == {"re": 1.0, "im": -2.0}
    assert doc["nested"]["t"] == [1, 2]
    # key-sorted and newline-terminated
    assert list(doc) == sorted(doc)
    assert text.endswith("\n")


def test_figures_are_deterministic(tmp_path):
    poly = newton_polygon(charpoly("square_octagon"))
    a = tmp_path / "a.svg"
    b = tmp_path / "b.svg"
    report.fig_newton(poly, a, label="sq-oct")
    report.fig_newton(poly, b, label="sq-oct")
    data = a.read_bytes()
    assert data == b.read_bytes()
    assert b"<svg" in data
    assert b"dc:date" not in data


def test_contour_and_decay_figures(tmp_path):
    xs = np.linspace(0, 1, 12)
    ys = np.linspace(0, 1, 12)
    Z = np.add.outer(xs ** 2, ys ** 2)
    p1 = tmp_path / "c.svg"
    report.fig_contour(xs, ys, Z, p1, label="grid")
    assert p1.stat().st_size > 1000
    rows = [(r, 2.0 / r ** 2) for r in range(1, 20)]
    p2 = tmp_path / "d.svg"
    report.fig_decay(rows, p2, label="decay", semilog=False)
    assert p2.stat().st_size > 1000


def test_lattice_points_classes():
    pts = report.lattice_points(newton_polygon(charpoly("square_octagon")))
    assert {c for _, _, c in pts} == {"interior", "vertex"}
    assert len(pts) == 5
    pts = report.lattice_points(newton_polygon(charpoly("square_4x4_weighted")))
    assert {c for _, _, c in pts} == {"interior", "vertex", "boundary"}
    assert len(pts) == 13
