import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from mpmath import mp

from finitegap.elliptic import (
    ExactRoots,
    eval_elliptic,
    lattice_from_periods,
    lattice_from_roots,
    numpy_lattice,
    wp_np,
)
from finitegap.errors import DegenerateLattice, PoleProximity


def _rand_points(L, n, seed=1):
    rng = random.Random(seed)
    pts = []
    while len(pts) < n:
        x = (2 * rng.random() - 1) * L.omega1 + (2 * rng.random() - 1) * L.omega3
        if L.distance_to_lattice(x) > 0.1:
            pts.append(x)
    return pts


def wp_row_sum(x, w1, w3, rows=12):
    """wp from row sums of csc^2; independent of the theta evaluation."""
    c = mp.pi / (2 * w1)
    tau = w3 / w1
    s = sum(mpmath.csc(c * (x + 2 * n * w3)) ** 2 for n in range(-rows, rows + 1))
    g = mpmath.mpf(1) / 3 + 2 * sum(mpmath.csc(mp.pi * n * tau) ** 2 for n in range(1, rows + 1))
    return c ** 2 * (s - g)


def theta_constants(tau, terms=30):
    q = mpmath.exp(1j * mp.pi * tau)
    t2 = 2 * sum(q ** ((n + mpmath.mpf(1) / 2) ** 2) for n in range(terms))
    t3 = 1 + 2 * sum(q ** (n * n) for n in range(1, terms))
    t4 = 1 + 2 * sum((-1) ** n * q ** (n * n) for n in range(1, terms))
    return t2, t3, t4


def test_roots_invariants():
    r = ExactRoots(3, -1, -2)
    assert r.g2 == 28 and r.g3 == 24
    with pytest.raises(DegenerateLattice):
        ExactRoots(1, 1, -2)
    with pytest.raises(DegenerateLattice):
        ExactRoots(1, 2, 3)


def test_half_periods_give_roots(lat):
    with mp.workdps(30):
        for i in (1, 2, 3):
            assert abs(eval_elliptic("wp", lat.half_period(i), lat) - lat.e[i - 1]) < 1e-25
        assert abs(sum(lat.e)) < 1e-25
        assert abs(lat.g2 - 28) < 1e-25 and abs(lat.g3 - 24) < 1e-25


def test_legendre_relation(lat):
    with mp.workdps(30):
        L2 = lattice_from_periods(mpmath.mpf("0.5"), mpmath.mpc("0.3", "0.4"), 30)
        for L in (lat, L2):
            assert abs(L.eta1 * L.omega3 - L.eta3 * L.omega1 - 1j * mp.pi / 2) < 1e-25


def test_square_lattice_symmetry():
    L = lattice_from_periods(mpmath.mpf("0.5"), mpmath.mpc(0, "0.5"), 30)
    assert abs(L.e2) < 1e-25
    assert abs(L.g3) < 1e-25
    Lr = lattice_from_roots(ExactRoots(1, 0, -1), 30)
    assert Lr.g3 == 0 or abs(Lr.g3) < 1e-25
    assert abs(mpmath.re(Lr.tau)) < 1e-25


def test_q_series_oracle_for_roots():
    with mp.workdps(30):
        w1, w3 = mpmath.mpf("0.5"), mpmath.mpc("0.3", "0.4")
        L = lattice_from_periods(w1, w3, 30)
        t2, t3, t4 = theta_constants(w3 / w1)
        k = mp.pi ** 2 / (12 * w1 ** 2)
        e1 = k * (t3 ** 4 + t4 ** 4)
        e2 = k * (t2 ** 4 - t4 ** 4)
        e3 = -k * (t2 ** 4 + t3 ** 4)
        for got, want in zip(L.e, (e1, e2, e3)):
            assert abs(got - want) < 1e-10


def test_lattice_sum_oracle_square():
    with mp.workdps(30):
        L = lattice_from_periods(mpmath.mpf("0.5"), mpmath.mpc(0, "0.5"), 30)
        got = eval_elliptic("wp", mpmath.mpf("0.3"), L)
        assert abs(got - wp_row_sum(mpmath.mpf("0.3"), L.omega1, L.omega3)) < 1e-9


def test_lattice_sum_oracle_random(lat):
    with mp.workdps(30):
        for x in _rand_points(lat, 10):
            assert abs(eval_elliptic("wp", x, lat) - wp_row_sum(x, lat.omega1, lat.omega3)) < 1e-9


def test_periodicity_and_ode(lat):
    with mp.workdps(30):
        for x in _rand_points(lat, 100, seed=3):
            w = eval_elliptic("wp", x, lat)
            assert abs(eval_elliptic("wp", x + 2 * lat.omega1, lat) - w) < 1e-20 * max(1, abs(w))
            assert abs(eval_elliptic("wp", x + 2 * lat.omega3, lat) - w) < 1e-20 * max(1, abs(w))
        for x in _rand_points(lat, 20, seed=4):
            w = eval_elliptic("wp", x, lat)
            dw = eval_elliptic("wp_prime", x, lat)
            assert abs(dw ** 2 - (4 * w ** 3 - lat.g2 * w - lat.g3)) < 1e-20 * max(1, abs(w)) ** 3


def test_zeta_derivative(lat):
    h = mpmath.mpf("1e-4")
    with mp.workdps(30):
        for x in _rand_points(lat, 10, seed=5):
            fd = (eval_elliptic("zeta", x + h, lat) - eval_elliptic("zeta", x - h, lat)) / (2 * h)
            w = eval_elliptic("wp", x, lat)
            assert abs(fd + w) / abs(w) < 1e-6


def test_sigma_quasi_periodicity(lat):
    with mp.workdps(30):
        for x in _rand_points(lat, 5, seed=6):
            s = eval_elliptic("sigma", x, lat)
            for k in (1, 3):
                wk, ek = lat.half_period(k), lat.eta(k)
                lhs = eval_elliptic("sigma", x + 2 * wk, lat)
                assert abs(lhs + mpmath.exp(2 * ek * (x + wk)) * s) < 1e-20 * max(1, abs(lhs))


def test_cosigma(lat):
    with mp.workdps(30):
        assert abs(eval_elliptic("sigma1", 0, lat) - 1) < 1e-25
        assert abs(eval_elliptic("theta1", 0, lat)) < 1e-25
        for x in _rand_points(lat, 5, seed=8):
            ratio = (eval_elliptic("sigma2", x, lat) / eval_elliptic("sigma", x, lat)) ** 2
            assert abs(ratio - (eval_elliptic("wp", x, lat) - lat.e2)) < 1e-20


def test_poles_rejected(lat):
    with pytest.raises(PoleProximity):
        eval_elliptic("wp", 0, lat)
    with pytest.raises(PoleProximity):
        eval_elliptic("zeta", 2 * lat.omega1 + 2 * lat.omega3, lat)
    with pytest.raises(ValueError):
        eval_elliptic("cn", 0.3, lat)


def test_degenerate_periods():
    with pytest.raises(DegenerateLattice):
        lattice_from_periods(mpmath.mpf(1), mpmath.mpf(2), 20)
    with pytest.raises(DegenerateLattice):
        lattice_from_periods(mpmath.mpf(1), mpmath.mpc(0, "0.0001"), 20)


def test_numpy_path_matches(lat):
    NL = numpy_lattice(lat)
    pts = _rand_points(lat, 20, seed=9)
    got = wp_np(np.array([complex(x) for x in pts]), NL)
    dgot = wp_np(np.array([complex(x) for x in pts]), NL, derivative=True)
    for x, g, dg in zip(pts, got, dgot):
        w = complex(eval_elliptic("wp", x, lat))
        dw = complex(eval_elliptic("wp_prime", x, lat))
        assert abs(g - w) < 1e-10 * max(1, abs(w))
        assert abs(dg - dw) < 1e-9 * max(1, abs(dw))
