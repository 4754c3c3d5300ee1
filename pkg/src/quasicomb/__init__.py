"""quasicomb: signed atomic measures with discrete closed support and spectrum.

Builds, at finite truncation, a real signed measure supported on a
staircase cut-and-project set whose Fourier transform is again atomic on
a discrete closed set, and verifies every finitely checkable property of
the construction (weighted Poisson summation, vanishing conditions,
translation-boundedness, arithmetic-progression behaviour).
"""

__version__ = "0.1.0"

from .field import AlgebraicReal, SQRT2, SQRT3, SQRT6
from .lattice import Lattice2D, LatticePoint, make_lattice, dual_lattice, enumerate_box, default_lattice

__all__ = [
    "__version__",
    "AlgebraicReal",
    "SQRT2",
    "SQRT3",
    "SQRT6",
    "Lattice2D",
    "LatticePoint",
    "make_lattice",
    "dual_lattice",
    "enumerate_box",
    "default_lattice",
]
