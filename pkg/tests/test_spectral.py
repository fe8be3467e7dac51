from fractions import Fraction

import flint
import mpmath
import pytest
import sympy as sp

from finitegap.elliptic import ExactRoots, lattice_from_periods, lattice_from_roots
from finitegap.errors import NonRectangular, NotQuasiSolvable
from finitegap.hpalg import DiffOp, HalfPowerElement
from finitegap.spectral import (
    CouplingVector,
    band_edges,
    build_A,
    darboux_step,
    genus,
    invariant_charpoly,
    potential,
    prod_de,
    quasi_space_basis,
    spectral_data,
    verify_A_relations,
)

R = ExactRoots(3, -1, -2)
HP = HalfPowerElement


def fpoly(coeffs):
    return flint.fmpq_poly([flint.fmpq(Fraction(c).numerator, Fraction(c).denominator) for c in coeffs])


def lame_oracle():
    """Q for Xi = E + wp over symbolic roots; returns (expression, is z-free)."""
    z, E, a, b = sp.symbols("z E a b")
    c = -a - b
    g2 = -4 * (a * b + b * c + c * a)
    g3 = 4 * a * b * c
    xi = E + z
    expr = sp.expand(xi ** 2 * (E - 2 * z) + xi * (6 * z ** 2 - g2 / 2) / 2 - (4 * z ** 3 - g2 * z - g3) / 4)
    return expr, sp.Poly(expr, z).degree() == 0, (E, a, b, c)


def test_lame_symbolic_oracle():
    expr, z_free, (E, a, b, c) = lame_oracle()
    assert z_free
    assert sp.expand(expr - (E + a) * (E + b) * (E + c)) == 0


@pytest.mark.parametrize("e", [(3, -1, -2), (Fraction(5, 2), Fraction(1, 2), -3), (1, 0, -1), (7, -3, -4)])
def test_lame_solver_matches_oracle(e):
    r = ExactRoots(*e)
    expr, _, (E, a, b, _c) = lame_oracle()
    want = sp.Poly(expr.subs({a: sp.Rational(str(r.e1)), b: sp.Rational(str(r.e2))}), E)
    coeffs = [Fraction(str(v)) for v in reversed(want.all_coeffs())]
    S = spectral_data((1, 0, 0, 0), r)
    assert S.Q == fpoly(coeffs)
    assert S.Xi == HP.evar(r) + HP.zvar(r)


def test_free_case():
    S = spectral_data((0, 0, 0, 0), R)
    assert S.Q == fpoly([0, 1]) and S.g == 0
    assert S.Xi == HP.const(R, 1)
    assert build_A((0, 0, 0, 0), R) == DiffOp.d(R)
    full, _ = invariant_charpoly((0, 0, 0, 0), R)
    assert full == fpoly([0, 1])


def test_l0_two_displays():
    S = spectral_data((2, 0, 0, 0), R)
    g2 = R.g2
    Q = fpoly([-3 * g2, 0, 1])
    for e in R.e:
        Q *= fpoly([-3 * e, 1])
    assert S.Q == Q
    assert S.Q == fpoly([-84, 0, 1]) * fpoly([-9, 1]) * fpoly([3, 1]) * fpoly([6, 1])
    full, parts = invariant_charpoly((2, 0, 0, 0), R)
    assert full == Q
    assert fpoly([-3 * g2, 0, 1]) in parts


def test_translated_couplings_share_Q():
    q1 = spectral_data((1, 0, 0, 0), R).Q
    for l in ((0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)):
        assert spectral_data(l, R).Q == q1
    assert spectral_data((0, 2, 0, 0), R).Q == spectral_data((2, 0, 0, 0), R).Q


def test_xi_solves_product_equation():
    for l in ((1, 0, 0, 0), (2, 0, 0, 0), (1, 1, 0, 0), (2, 1, 0, 1)):
        S = spectral_data(l, R)
        assert prod_de(S.Xi, potential(l, R)).is_zero()
        rep = verify_A_relations(l, R, S=S)
        assert rep["commutes"] and rep["A2_plus_QH_zero"] and rep["reduction_matches_Xi"]


@pytest.mark.parametrize("l,g", [((2, 0, 0, 0), 2), ((0, 0, 0, 0), 0), ((1, 1, 1, 1), 1), ((3, 1, 1, 0), 3)])
def test_genus(l, g):
    assert genus(l) == g


@pytest.mark.parametrize("l", [(1, 1, 1, 1), (3, 1, 1, 0), (1, 2, 0, 0), (0, 1, 1, 1)])
def test_degree_of_Q(l):
    S = spectral_data(l, R)
    assert S.Q.degree() == 2 * genus(l) + 1


def test_quasi_space_examples():
    V = quasi_space_basis((-2, 0, 0, 0), R)
    assert V.basis == [HP.const(R, 1), HP.zvar(R)]
    assert V.matrix == [[0, R.g2 / 2], [6, 0]]
    V0 = quasi_space_basis((0, 0, 0, 0), R)
    assert V0.matrix == [[0]]
    with pytest.raises(NotQuasiSolvable):
        quasi_space_basis((1, 1, 1, 1), R)


def test_darboux_factors():
    L = darboux_step((-2, 0, 0, 0), (2, 0, 0, 0), R)
    assert L.order == 2 and L.is_monic()
    # third factor of the l = (2,0,0,0) chain, acting on the intermediate coupling (0,1,1,1)
    L3 = darboux_step((0, 2, -1, -1), (0, 1, 1, 1), R)
    wpp = HP.wp_prime(R)
    inv = [HP.half_power(R, tuple(-2 if k == i else 0 for k in range(3))) for i in range(3)]
    want = DiffOp.d(R) + DiffOp.mult(wpp * (-inv[0] + inv[1] * Fraction(1, 2) + inv[2] * Fraction(1, 2)))
    assert L3 == want
    assert darboux_step((0, 0, 0, 0), (0, 0, 0, 0), R) == DiffOp.d(R)


def test_band_edges(lat):
    assert band_edges((1, 0, 0, 0), lat) == [-3, 1, 2]
    assert band_edges((0, 0, 0, 0), lat) == [0]
    edges = band_edges((2, 0, 0, 0), lat)
    assert len(edges) == 5 and edges[1:4] == [-6, -3, 9]
    with mpmath.workdps(30):
        r84 = mpmath.sqrt(84)
        assert abs(edges[0] + r84) < 1e-25 and abs(edges[4] - r84) < 1e-25


def test_band_edges_need_rectangular():
    L = lattice_from_periods(mpmath.mpf("0.5"), mpmath.mpc("0.3", "0.4"), 20)
    with pytest.raises(ValueError):
        band_edges((1, 0, 0, 0), L)
    Lr = lattice_from_roots(R, 20)
    skew = lattice_from_periods(Lr.omega1, Lr.omega3 + Lr.omega1, 20, roots=R)
    with pytest.raises(NonRectangular):
        band_edges((1, 0, 0, 0), skew)


def test_bad_couplings():
    with pytest.raises(ValueError, match="non-negative integers"):
        CouplingVector.of((2, 0, -1, 0))


def test_json_shape():
    d = spectral_data((2, 0, 0, 0), R).to_json()
    assert d["g"] == 2 and d["Q"][-1] == "1/1"
