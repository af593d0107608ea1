"""Exact solution machinery for doubly periodic bipartite dimer models."""

__version__ = "0.1.0"

from .laurent import LaurentPoly2, NewtonPolygon
from .lattice import FundamentalDomain, TorusGraph, parse_domain
from . import lattices

__all__ = [
    "LaurentPoly2",
    "NewtonPolygon",
    "FundamentalDomain",
    "TorusGraph",
    "parse_domain",
    "lattices",
]
