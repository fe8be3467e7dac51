"""Spectral curve and band structure of the two-gap Lame potential 6 wp(x).

Run: python demos/lame_bands.py
"""

from fractions import Fraction

import numpy as np

from finitegap import ExactRoots, band_edges, lattice_from_roots, spectral_data
from finitegap.monodromy import monodromy_ode
from finitegap.spectral import poly_to_strings

roots = ExactRoots(Fraction(3), Fraction(-1), Fraction(-2))
L = lattice_from_roots(roots, 30)

for l in [(1, 0, 0, 0), (2, 0, 0, 0), (1, 1, 0, 0)]:
    S = spectral_data(l, roots)
    print(f"l={l}  genus={S.g}")
    print("   Xi =", S.Xi.to_text())
    print("   Q  =", poly_to_strings(S.Q))

l = (2, 0, 0, 0)
edges = [float(e) for e in band_edges(l, L)]
print("\nband edges:", np.round(edges, 6))

# |B| along the real axis: 1 in the bands, otherwise growing/decaying solutions
print(f"\n{'E':>8} {'|B|':>12}  where")
for E in np.linspace(-12, 12, 25):
    B = monodromy_ode(E, 1, l, L).multiplier
    inside = abs(abs(B) - 1) < 1e-6
    print(f"{E:8.2f} {abs(B):12.6f}  {'band' if inside else 'gap'}")
