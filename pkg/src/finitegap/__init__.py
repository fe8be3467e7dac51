"""Finite-gap apparatus of Heun's equation in elliptic form.

Exact operator algebra over the Weierstrass half-power ring, the spectral
polynomial and its companions, numerical monodromy and Bethe roots, the
quasi-solvable sector of the BC_N Inozemtsev model, and a commutator check for
three-particle elliptic operators.
"""

from .elliptic import ExactRoots, Lattice, eval_elliptic, lattice_from_periods, lattice_from_roots
from .errors import FiniteGapError
from .spectral import CouplingVector, SpectralData, band_edges, build_A, spectral_data, spectral_polynomial

__all__ = [
    "CouplingVector",
    "ExactRoots",
    "FiniteGapError",
    "Lattice",
    "SpectralData",
    "band_edges",
    "build_A",
    "eval_elliptic",
    "lattice_from_periods",
    "lattice_from_roots",
    "spectral_data",
    "spectral_polynomial",
]

__version__ = "0.1.0"
