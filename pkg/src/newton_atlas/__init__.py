"""Dynamical-combinatorial analysis of rational Newton maps.

The package computes channel diagrams, Newton graphs, truncated puzzle
partitions and polynomial-like restrictions for Newton maps of complex
polynomials, and assembles a verified injection report pairing every
non-repelling periodic orbit with a critical orbit.
"""

from newton_atlas.tolerances import Tolerances
from newton_atlas.poly import ComplexPolynomial
from newton_atlas.rational import RationalMap
from newton_atlas.newton import NewtonMapDescriptor, newton_map

__all__ = [
    "Tolerances",
    "ComplexPolynomial",
    "RationalMap",
    "NewtonMapDescriptor",
    "newton_map",
]

__version__ = "0.1.0"
