"""Quasi-solvable BC_N sectors and the three-particle commutator checks.

Run: python demos/bcn_and_a3.py
"""

from finitegap import ExactRoots, lattice_from_roots
from finitegap.a3 import build_a3_operators, commutator, commutator_residual
from finitegap.bcn import admissible_gauges, bcn_matrix, bcn_spectra, crosscheck_n1

roots = ExactRoots(3, -1, -2)

# one particle: the four sectors together give Q(E)
rep = crosscheck_n1((2, 0, 0, 0), roots)
print("Q =", rep["Q"])
for s in rep["sectors"]:
    print("   gauge", s["gauge"], "dim", s["dim"], "charpoly", s["charpoly"])

# two particles, pair coupling 1
for g in admissible_gauges(2, 1, (1, 0, 0, 0)):
    sp = bcn_spectra(bcn_matrix(2, 1, (1, 0, 0, 0), g, roots))
    eig = [complex(v) for v in sp.eigenvalues]
    print(f"N=2 gauge {g.to_json()} d={g.degree(2)}: real={sp.reality}",
          ", ".join(f"{v.real:.6f}{v.imag:+.6f}i" for v in eig))

ops = build_a3_operators(roots)
print("\n[H, P1] symbolically zero:", commutator(ops["H"], ops["P1"]).is_zero())
for prec in (20, 30, 40, 50):
    L = lattice_from_roots(roots, prec)
    r = {n: commutator_residual(ops["H"], ops[n], L, samples=20) for n in ("P3", "I12", "I23")}
    print(f"precision {prec}: " + "  ".join(f"[H,{n}]={v:.1e}" for n, v in r.items()))
