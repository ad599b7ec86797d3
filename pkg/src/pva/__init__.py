"""Exact symbolic computation for multidimensional Poisson vertex algebras.

The package provides a differential polynomial algebra over exact rationals
(:mod:`pva.diffalg`), lambda-brackets with the master formula and the PVA
axiom checks (:mod:`pva.bracket`), a catalog of concrete hydrodynamic
brackets (:mod:`pva.models`), a dispersive-deformation pipeline with exact
linear-differential solving (:mod:`pva.deform`, :mod:`pva.linsolve`), a small
bracket-definition language (:mod:`pva.parser`) and a command line front end
(:mod:`pva.cli`).
"""

from pva.diffalg import Alg, Coefficient, DiffPoly, Sym
from pva.bracket import BracketTable, LambdaPoly

__all__ = [
    "Alg",
    "Coefficient",
    "DiffPoly",
    "Sym",
    "BracketTable",
    "LambdaPoly",
]

__version__ = "0.1.0"
