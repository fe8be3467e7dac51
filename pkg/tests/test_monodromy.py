import cmath
import json
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from mpmath import mp

from finitegap.elliptic import ExactRoots, eval_elliptic, lattice_from_roots
from finitegap.errors import BadBasepoint, BranchAmbiguity, Collision, EdgeEnergy, SingularP2
from finitegap.monodromy import (
    XiEvaluator,
    bethe_eigen_residual,
    bethe_multiplier,
    bethe_solve,
    bethe_solve_at,
    hk_example_params,
    lambda_eval,
    lambda_residual,
    monodromy_integral,
    monodromy_ode,
    pair_distance,
    q_from_ode,
    transfer_matrix,
    wp_inverse,
)
from finitegap.report import emit_report
from finitegap.spectral import band_edges, spectral_data

R = ExactRoots(3, -1, -2)


@pytest.fixture(scope="module")
def S1():
    return spectral_data((1, 0, 0, 0), R)


@pytest.fixture(scope="module")
def S2():
    return spectral_data((2, 0, 0, 0), R)


def test_free_plane_wave(lat):
    S0 = spectral_data((0, 0, 0, 0), R)
    with mp.workdps(30):
        x0 = lat.omega1
        val = lambda_eval(x0 + mpmath.mpf("0.5"), -4, S0, lat)
        assert abs(val - mpmath.e) < 1e-20


def test_free_multipliers(lat):
    E = math.pi ** 2
    for k in (1, 3):
        wk = complex(lat.half_period(k))
        want = cmath.exp(2 * cmath.sqrt(-E) * wk)
        r = monodromy_ode(E, k, (0, 0, 0, 0), lat)
        assert pair_distance(r.multiplier, want) < 1e-8
        B = bethe_solve_at((0, 0, 0, 0), lat, E)
        assert abs(B.E - E) < 1e-20
        assert pair_distance(complex(bethe_multiplier(B, k, lat)), want) < 1e-10


@pytest.mark.parametrize("E", [complex(1, 0.3), complex(-5, 2), complex(7, -0.1)])
def test_wronskian(lat, E):
    for k in (1, 3):
        M, meta = transfer_matrix(E, k, (2, 1, 0, 0), lat)
        assert abs(np.linalg.det(M) - 1) < 1e-8
        assert meta["min_pole_distance"] > 0


def test_bands_and_gaps(lat):
    edges = band_edges((1, 0, 0, 0), lat)
    assert edges == [-3, 1, 2]
    band = [-2.0, -0.5, 0.5, 3.0, 6.0]
    gap = [-6.0, -4.0, 1.5]
    for E in band:
        assert abs(abs(monodromy_ode(E, 1, (1, 0, 0, 0), lat).multiplier) - 1) < 1e-6
    for E in gap:
        assert abs(abs(monodromy_ode(E, 1, (1, 0, 0, 0), lat).multiplier) - 1) > 1e-3


def test_integral_route_on_bands(lat, S1):
    for E in (-2.0, 1.5, 4.0):
        i = monodromy_integral(E + 1e-9j, 1, S1, lat, -3).multiplier
        o = monodromy_ode(E, 1, (1, 0, 0, 0), lat).multiplier
        assert pair_distance(i, o) < 1e-6


def test_empty_integral(lat, S2):
    E0 = math.sqrt(84)
    for k in (1, 3):
        r = monodromy_integral(E0, k, S2, lat, E0)
        assert r.q_k == 0 and r.multiplier == 1
    assert q_from_ode(-3, 1, (1, 0, 0, 0), lat) in (0, 1)


def test_bad_basepoint(lat, S1):
    with pytest.raises(BadBasepoint):
        monodromy_integral(1 + 1j, 1, S1, lat, 0.5)


def test_branch_flip_inverts(lat, S1):
    E = complex(-3, 0.5)
    a = monodromy_integral(E, 1, S1, lat, -3).multiplier
    b = monodromy_integral(E, 1, S1, lat, -3, branch=-1).multiplier
    assert abs(a * b - 1) < 1e-10


def test_loop_around_root_inverts(lat, S1):
    E = complex(-3, 0.5)
    straight = monodromy_integral(E, 1, S1, lat, -3).multiplier
    circle = [E] + [-3 + 0.5 * cmath.exp(1j * (math.pi / 2 + 2 * math.pi * j / 24)) for j in range(1, 24)]
    looped = monodromy_integral(E, 1, S1, lat, -3, waypoints=circle).multiplier
    assert abs(straight * looped - 1) < 1e-9
    assert abs(straight - looped) > 1e-3


def test_bent_path_same_value(lat, S1):
    E = complex(4, 1)
    a = monodromy_integral(E, 3, S1, lat, -3).multiplier
    b = monodromy_integral(E, 3, S1, lat, -3, waypoints=[complex(0, 3)]).multiplier
    assert abs(a - b) < 1e-9


def test_waypoint_near_branch_point(lat, S1):
    with pytest.raises(BranchAmbiguity):
        monodromy_integral(complex(4, 1), 1, S1, lat, -3, waypoints=[1 + 1e-4j])


def test_lambda_edge_energy(lat, S1):
    with pytest.raises(EdgeEnergy):
        lambda_eval(lat.omega1 + 0.3 * lat.omega3, -3, S1, lat)


@pytest.mark.parametrize("l", [(1, 0, 0, 0), (2, 0, 0, 0), (1, 1, 0, 0), (2, 1, 1, 0)])
def test_lambda_residual(lat, l):
    S = spectral_data(l, R)
    for x in (0.3 * lat.omega1 + 0.4 * lat.omega3, 0.8 * lat.omega1 - 0.45 * lat.omega3):
        assert lambda_residual(x, complex(1, 0.3), S, lat) < 1e-8


def test_lambda_at_bethe_energy(lat, S1):
    with mp.workdps(30):
        t = mpmath.mpc("0.4", "0.3")
        E = -eval_elliptic("wp", t, lat)
        assert lambda_residual(0.6 * lat.omega1 + 0.2 * lat.omega3, E, S1, lat) < 1e-8


def test_lambda_second_derivative_and_periods(lat, S2):
    E = complex(1, 0.3)
    x = mpmath.mpf("1.2") * lat.omega1 + mpmath.mpf("0.3") * lat.omega3
    h = mpmath.mpf("1e-6")
    with mp.workdps(30):
        def f(y):
            return lambda_eval(y, E, S2, lat)

        fx = f(x)
        d2 = (f(x + h) - 2 * fx + f(x - h)) / h ** 2
        u = XiEvaluator(S2, lat).potential(x)
        assert abs(-d2 + (u - E) * fx) / abs(fx) < 1e-6
        ratio = f(x + 2 * lat.omega1) / fx
    assert pair_distance(complex(ratio), monodromy_ode(E, 1, (2, 0, 0, 0), lat).multiplier) < 1e-8


def test_bethe_lame(lat):
    with mp.workdps(30):
        for t in (mpmath.mpc("0.4", "0.3"), mpmath.mpc("0.9", "-0.2")):
            B = bethe_solve((1, 0, 0, 0), lat, [t], c_seed=0.3)
            assert B.max_residual < 1e-10
            assert abs(B.c + eval_elliptic("zeta", B.t[0], lat)) < 1e-10
            assert abs(B.E + eval_elliptic("wp", B.t[0], lat)) < 1e-8
            assert bethe_eigen_residual(B, mpmath.mpc("0.3", "0.2"), lat) < 1e-6


def test_band_edge_multiplier(lat):
    with mp.workdps(30):
        B = bethe_solve((1, 0, 0, 0), lat, [lat.omega2], c_seed=-lat.eta2)
        assert abs(B.E + lat.e2) < 1e-20
    for k in (1, 2, 3):
        m = complex(bethe_multiplier(B, k, lat))
        assert min(abs(m - 1), abs(m + 1)) < 1e-8


def test_bethe_collision(lat):
    t = mpmath.mpc("0.4", "0.3")
    with pytest.raises(Collision):
        bethe_solve((2, 0, 0, 0), lat, [t, t])
    with pytest.raises(Collision):
        bethe_solve((1, 0, 0, 0), lat, [2 * lat.omega1])
    with pytest.raises(ValueError):
        bethe_solve((2, 0, 0, 0), lat, [t])
    with pytest.raises(ValueError):
        bethe_multiplier(bethe_solve_at((0, 0, 0, 0), lat, 1), 0, lat)


def test_bethe_matches_ode(lat):
    for l, E in (((2, 0, 0, 0), complex(2, -1)), ((1, 1, 0, 0), complex(-2, 0.5))):
        B = bethe_solve_at(l, lat, E, seed=3)
        assert abs(complex(B.E) - E) < 1e-10
        for k in (1, 3):
            o = monodromy_ode(E, k, l, lat).multiplier
            assert pair_distance(complex(bethe_multiplier(B, k, lat)), o) < 1e-6


def test_wp_inverse(lat):
    with mp.workdps(30):
        for w in (mpmath.mpc(1, 2), mpmath.mpc(-4, 0.1)):
            a = wp_inverse(w, lat)
            assert abs(eval_elliptic("wp", a, lat) - w) < 1e-20


def test_hk_kappa_vanishes_at_roots(lat, S2):
    for e in R.e:
        h = hk_example_params(3 * e, S2, lat)
        assert h.kappa == 0 and isinstance(h.kappa, Fraction)
        with mp.workdps(30):
            assert abs(eval_elliptic("wp", h.alpha, lat) - mpmath.mpf(Fraction(h.wp_alpha).numerator) / Fraction(h.wp_alpha).denominator) < 1e-18


def test_hk_singular(lat, S2):
    with pytest.raises(SingularP2):
        hk_example_params(math.sqrt(84), S2, lat)
    with pytest.raises(ValueError):
        hk_example_params(1, spectral_data((1, 0, 0, 0), R), lat)


@pytest.mark.parametrize("E", [complex(1, 0.3), complex(-2.5, 0.1), complex(6, 1), complex(0.5, -2), complex(-7, 0.5)])
def test_hk_multiplier_matches_ode(lat, S2, E):
    h = hk_example_params(E, S2, lat)
    assert h.ansatz_residual < 1e-8
    for k in (1, 3):
        o = monodromy_ode(E, k, (2, 0, 0, 0), lat).multiplier
        assert pair_distance(complex(h.multipliers[k]), o) < 1e-6


def test_result_serialises(lat, S1):
    r = monodromy_ode(complex(1, 0.3), 1, (1, 0, 0, 0), lat)
    out = json.loads(emit_report(r))
    assert out["route"] == "ode" and set(out["multiplier"]) == {"re", "im"}
    assert emit_report(r) == emit_report(r)
