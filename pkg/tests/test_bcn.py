import itertools
import math
import random
from fractions import Fraction

import flint
import mpmath
import pytest
from mpmath import mp

from finitegap import bcn
from finitegap.bcn import (
    GaugeChoice,
    admissible_gauges,
    bcn_matrix,
    bcn_spectra,
    crosscheck_n1,
    square_integrable_gauge,
    validate_pair_identity,
    wdsym_basis,
)
from finitegap.elliptic import ExactRoots, eval_elliptic, lattice_from_roots
from finitegap.errors import IdentityValidationFailed, NotQuasiSolvable
from finitegap.spectral import polynomial_roots, spectral_data

R = ExactRoots(3, -1, -2)


def as_mp(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return v


def numeric_oracle(M, L, h="1e-12"):
    """Apply -Laplacian + V to Phi * basis directly in x and compare with Phi * (matrix column)."""
    N, l, li, g = M.N, M.l, M.li, M.gauge
    e = L.e

    def phi(z):
        v = mpmath.mpf(1)
        for j in range(N):
            for k in range(j + 1, N):
                v *= (z[j] - z[k]) ** as_mp(g.a)
            for i in range(3):
                v *= (z[j] - e[i]) ** as_mp(g.b[i + 1])
        return v

    def sym(m, z):
        return sum(mpmath.fprod(zj ** mj for zj, mj in zip(z, p)) for p in itertools.permutations(m))

    def V(x):
        v = 0
        for j in range(N):
            for i in range(4):
                if li[i]:
                    v += li[i] * (li[i] + 1) * eval_elliptic("wp", x[j] + L.half_period(i), L)
            for k in range(j + 1, N):
                v += 2 * l * (l + 1) * (eval_elliptic("wp", x[j] - x[k], L) + eval_elliptic("wp", x[j] + x[k], L))
        return v

    x = [mpmath.mpc(0.31 + 0.23 * j, 0.17 + 0.11 * j * j) * L.omega1 / abs(L.omega1) + 0.2 * L.omega3 for j in range(N)]
    z = [eval_elliptic("wp", v, L) for v in x]
    worst = 0
    for col, m in enumerate(M.basis):
        def f(xs):
            zs = [eval_elliptic("wp", v, L) for v in xs]
            return phi(zs) * sym(m, zs)

        lap = 0
        for j in range(N):
            def fj(t, j=j):
                xs = list(x)
                xs[j] = t
                return f(xs)

            lap += mpmath.diff(fj, x[j], 2, h=mpmath.mpf(h))
        lhs = -lap + V(x) * f(x)
        rhs = phi(z) * sum(as_mp(M.M[i][col]) * sym(mm, z) for i, mm in enumerate(M.basis))
        worst = max(worst, abs(lhs - rhs) / max(1, abs(lhs)))
    return float(worst)


def test_basis_examples():
    g = GaugeChoice.of(-1, 0, 0, 0, 0)
    assert g.d(2) == 1
    assert wdsym_basis(2, g) == [(0, 0), (1, 0), (1, 1)]
    assert wdsym_basis(1, GaugeChoice.of(0, -1, 0, 0, 0)) == [(0,), (1,)]


@pytest.mark.parametrize("N,d", [(1, 3), (2, 2), (3, 2), (3, 3), (4, 1)])
def test_basis_dimension(N, d):
    g = GaugeChoice.of(0, -d, 0, 0, 0)
    assert len(wdsym_basis(N, g)) == math.comb(d + N, N)


def test_one_particle_matrix():
    M = bcn_matrix(1, 0, (2, 0, 0, 0), GaugeChoice.of(0, -1, 0, 0, 0), R)
    assert M.M == [[0, R.g2 / 2], [6, 0]]
    sp = bcn_spectra(M)
    with mp.workdps(30):
        r = mpmath.sqrt(3 * R.g2)
        assert sorted(float(mpmath.re(v)) for v in sp.eigenvalues) == pytest.approx([-float(r), float(r)], abs=1e-12)
    Z = bcn_matrix(1, 0, (0, 0, 0, 0), GaugeChoice.of(0, 0, 0, 0, 0), R)
    assert Z.M == [[0]]


def test_one_particle_union_is_Q():
    S = spectral_data((2, 0, 0, 0), R)
    want = sorted(float(mpmath.re(as_mp(v))) for v in polynomial_roots(S.Q, 30))
    got = []
    gauges = admissible_gauges(1, 0, (2, 0, 0, 0))
    assert len(gauges) == 4
    for g in gauges:
        got += [float(mpmath.re(as_mp(v))) for v in bcn_spectra(bcn_matrix(1, 0, (2, 0, 0, 0), g, R)).eigenvalues]
    assert sorted(got) == pytest.approx(want, abs=1e-8)


@pytest.mark.parametrize("li", [(2, 0, 0, 0), (0, 0, 0, 0), (1, 1, 0, 0), (2, 1, 3, 0)])
def test_crosscheck(li):
    rep = crosscheck_n1(li, R)
    assert rep["agree"]
    if li == (0, 0, 0, 0):
        assert rep["Q"] == ["0/1", "1/1"]


def test_d_zero_gauge_scalar():
    g0 = [g for g in admissible_gauges(2, 1, (1, 0, 0, 0)) if g.d(2) == 0][0]
    M = bcn_matrix(2, 1, (1, 0, 0, 0), g0, R)
    assert M.dim == 1
    assert bcn_spectra(M).eigenvalues == [M.M[0][0]]


def test_two_particle_stability():
    M = bcn_matrix(2, 1, (0, 0, 0, 0), GaugeChoice.of(-1, 0, 0, 0, 0), R)
    assert M.dim == 3
    lo = bcn_spectra(M, precision=30).eigenvalues
    hi = bcn_spectra(M, precision=60).eigenvalues
    with mp.workdps(60):
        assert all(abs(as_mp(a) - as_mp(b)) < 1e-8 for a, b in zip(lo, hi))


@pytest.mark.parametrize("N,l,li", [(1, 0, (2, 1, 0, 0)), (2, 1, (1, 0, 0, 0)), (2, -2, (-2, -1, 0, 0)), (3, 1, (0, 0, 0, 0))])
def test_numeric_assembly_oracle(N, l, li):
    L = lattice_from_roots(R, 50)
    with mp.workdps(50):
        for g in admissible_gauges(N, l, li)[:3]:
            assert numeric_oracle(bcn_matrix(N, l, li, g, R), L) < 1e-8


def test_permutation_similarity():
    g = max(admissible_gauges(2, 1, (1, 0, 0, 0)), key=lambda g: g.d(2))
    M = bcn_matrix(2, 1, (1, 0, 0, 0), g, R)
    A = M.fmpq_mat()
    n = M.dim
    perm = list(range(n))
    random.Random(3).shuffle(perm)
    P = flint.fmpq_mat(n, n, [1 if perm[i] == j else 0 for i in range(n) for j in range(n)])
    assert (P * A * P.inv()).charpoly() == A.charpoly()


def test_square_integrable_gauge_not_admissible():
    # with non-negative couplings the degree bound is negative
    g = square_integrable_gauge(1, (1, 0, 0, 0))
    assert g.is_square_integrable(1, (1, 0, 0, 0))
    with pytest.raises(NotQuasiSolvable):
        g.degree(2)
    with pytest.raises(NotQuasiSolvable):
        bcn_matrix(2, 1, (1, 0, 0, 0), g, R)


def test_reality_is_reported():
    # same potential through the representatives l -> -1 - l; reality depends on b2, b3
    flags = {}
    for b2, b3 in itertools.product((Fraction(0), Fraction(1, 2)), repeat=2):
        g = square_integrable_gauge(-2, (-2, -1, 0, 0), b2=b2, b3=b3)
        if not g.is_admissible(2):
            continue
        sp = bcn_spectra(bcn_matrix(2, -2, (-2, -1, 0, 0), g, R))
        assert sp.square_integrable
        assert isinstance(sp.to_json()["reality"], bool)
        flags[(b2, b3)] = sp.reality
    assert flags == {(0, Fraction(1, 2)): False, (Fraction(1, 2), 0): True}


def test_pair_gate(monkeypatch):
    assert validate_pair_identity(R) < 1e-10
    other = ExactRoots(5, -2, -3)
    monkeypatch.setattr(bcn, "pair_term_rational", lambda zu, zv, g2, g3: zu + zv)
    with pytest.raises(IdentityValidationFailed):
        validate_pair_identity(other)
    assert other not in bcn._VALIDATED


def test_bad_gauge():
    with pytest.raises(ValueError):
        bcn_matrix(1, 0, (2, 0, 0, 0), GaugeChoice.of(0, Fraction(1, 4), 0, 0, 0), R)
