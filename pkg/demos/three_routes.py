"""Floquet multipliers three ways: hyperelliptic integral, Bethe roots, direct ODE.

Run: python demos/three_routes.py
"""

import math

from finitegap import ExactRoots, lattice_from_roots, spectral_data
from finitegap.monodromy import (
    bethe_multiplier,
    bethe_solve_at,
    hk_example_params,
    monodromy_integral,
    monodromy_ode,
    pair_distance,
)

roots = ExactRoots(3, -1, -2)
L = lattice_from_roots(roots, 30)
l = (2, 0, 0, 0)
S = spectral_data(l, roots)
E0 = math.sqrt(3 * roots.g2)  # q1 = q3 = 0 here

print(f"{'E':>16} k {'ode':>34} {'|int-ode|':>10} {'|bethe-ode|':>11} {'|hk-ode|':>9}")
for E in [complex(1, 0.3), complex(-2.5, 0.1), complex(6, 1), complex(0.5, -2)]:
    B = bethe_solve_at(l, L, E)
    hk = hk_example_params(E, S, L)
    for k in (1, 3):
        o = monodromy_ode(E, k, l, L).multiplier
        i = monodromy_integral(E, k, S, L, E0).multiplier
        b = complex(bethe_multiplier(B, k, L))
        h = complex(hk.multipliers[k])
        print(f"{E!s:>16} {k} {o:34.12f} {pair_distance(i, o):10.1e} {pair_distance(b, o):11.1e} "
              f"{pair_distance(h, o):9.1e}")

# alpha from the closed form against the Bethe roots: alpha = -(t1 + t2) mod periods
E = complex(1, 0.3)
B = bethe_solve_at(l, L, E)
print("\nBethe roots:", [complex(t) for t in B.t])
for s in (1, -1):
    hk = hk_example_params(E, S, L, branch=s)
    print(f"branch {s:+d}: alpha={complex(hk.alpha):.10f}  dist(alpha + t1 + t2, lattice) =",
          f"{L.distance_to_lattice(hk.alpha + sum(B.t)):.2e}")
