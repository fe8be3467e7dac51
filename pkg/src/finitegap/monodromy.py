"""Solutions and monodromy of ``(H - E) f = 0`` by three independent routes.

* ``monodromy_ode``: direct Floquet computation, integrating the ODE over one
  period and diagonalising the transfer matrix.
* ``monodromy_integral``: the hyperelliptic integral of ``a(E)``, ``c(E)``
  against ``sqrt(-Q(E))`` from a root ``E0`` of ``Q``.
* ``bethe_multiplier``: the closed form attached to a solution of the Bethe
  Ansatz equations.

Each route returns one Floquet multiplier of the pair ``{B, 1/B}``; which one
depends on a square-root branch, so comparisons are made between pairs.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from mpmath import mp
from scipy.integrate import solve_ivp

from .elliptic import Lattice, eval_elliptic, numpy_lattice, wp_np
from .errors import (
    BadBasepoint,
    BranchAmbiguity,
    Collision,
    Divergence,
    EdgeEnergy,
    NonConvergence,
    PathPole,
    SingularP2,
)
from .hpalg import MU0, MU1, hp_ddx
from .spectral import CouplingVector, SpectralData, poly_value

EDGE_TOL = 1e-10
BRANCH_GUARD = 1e-3


def _mpc(v):
    if isinstance(v, Fraction):
        return mpmath.mpc(mpmath.mpf(v.numerator) / v.denominator)
    return mpmath.mpc(v)


def _cjson(v, digits=20):
    return {"re": mpmath.nstr(mpmath.re(v), digits), "im": mpmath.nstr(mpmath.im(v), digits)}


@dataclass
class MonodromyResult:
    k: int
    multiplier: complex
    route: str
    E: complex
    q_k: int | None = None
    pair: tuple = ()
    residuals: dict = field(default_factory=dict)
    path: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "E": _cjson(self.E),
            "k": self.k,
            "route": self.route,
            "multiplier": _cjson(self.multiplier),
            "q_k": self.q_k,
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "path": self.path,
        }


def same_pair(b1, b2, tol=1e-6) -> bool:
    """True if ``b1`` matches ``b2`` or ``1/b2`` to relative tolerance ``tol``."""
    return pair_distance(b1, b2) < tol


def pair_distance(b1, b2) -> float:
    b1, b2 = complex(b1), complex(b2)
    d1 = abs(b1 - b2) / max(1.0, abs(b2))
    d2 = abs(b1 - 1 / b2) / max(1.0, abs(1 / b2))
    return min(d1, d2)


# ---------------------------------------------------------------------------
# Xi and Lambda


class XiEvaluator:
    """Numeric ``Xi``, ``Xi'``, ``Xi''`` and the potential at a point."""

    def __init__(self, S: SpectralData, L: Lattice):
        if L.roots is None or L.roots != S.roots:
            raise ValueError("lattice and spectral data use different roots")
        self.S, self.L = S, L
        x1 = hp_ddx(S.Xi)
        x2 = hp_ddx(x1)
        self.r0 = S.Xi.coefficient(MU0)
        self.r1 = x1.coefficient(MU1)
        self.r2 = x2.coefficient(MU0)
        self.l = S.l

    def potential(self, x):
        L = self.L
        u = 0
        for i, li in enumerate(self.l):
            if li:
                u += li * (li + 1) * eval_elliptic("wp", x + L.half_period(i), L)
        return u

    def values(self, x, E):
        L = self.L
        z = eval_elliptic("wp", x, L)
        wpp = eval_elliptic("wp_prime", x, L)
        return (self.r0.evaluate(z, E), self.r1.evaluate(z, E) * wpp / 2, self.r2.evaluate(z, E))


def default_base_point(l, L: Lattice):
    """``omega1`` unless the potential is singular there."""
    l = CouplingVector.of(l)
    if l.l1 == 0:
        return L.omega1
    with mp.workdps(L.precision):
        return (L.omega1 + L.omega3) / 2


def _sqrt_minus_Q(S, E, branch=1):
    return branch * mpmath.sqrt(-S.Q_value(E))


def lambda_eval(x, E, S: SpectralData, L: Lattice, x0=None, branch: int = 1):
    """``sqrt(Xi) exp(int_{x0}^x sqrt(-Q)/Xi)``, normalised by ``sqrt(Xi(x0))``."""
    with mp.workdps(L.precision):
        E = _mpc(E)
        Q = S.Q_value(E)
        if abs(Q) < EDGE_TOL:
            raise EdgeEnergy("Q(E) vanishes: Lambda(x) and Lambda(-x) coincide")
        s = branch * mpmath.sqrt(-Q)
        ev = XiEvaluator(S, L)
        x0 = default_base_point(S.l, L) if x0 is None else _mpc(x0)
        x = _mpc(x)
        dx = x - x0
        guard = 0.05 * abs(L.omega1)
        xi0 = ev.values(x0, E)[0]
        scale = max(1, abs(xi0))

        def integrand(t):
            p = x0 + t * dx
            if L.distance_to_lattice(p) < guard:
                raise PathPole("quadrature path passes near a lattice point")
            xi, xi1, _ = ev.values(p, E)
            if abs(xi) < 1e-8 * scale:
                raise PathPole("quadrature path passes near a zero of Xi")
            return (xi1 / (2 * xi) + s / xi) * dx

        for t in np.linspace(0, 1, 9):
            integrand(mpmath.mpf(t))
        integral = mpmath.quad(integrand, [0, 0.25, 0.5, 0.75, 1])
        return mpmath.sqrt(xi0) * mpmath.exp(integral)


def lambda_residual(x, E, S: SpectralData, L: Lattice, branch: int = 1):
    """``|(H - E) Lambda| / |Lambda|`` from the logarithmic derivative of Lambda."""
    with mp.workdps(L.precision):
        E = _mpc(E)
        s = branch * mpmath.sqrt(-S.Q_value(E))
        ev = XiEvaluator(S, L)
        xi, xi1, xi2 = ev.values(_mpc(x), E)
        y = xi1 / (2 * xi) + s / xi
        dy = xi2 / (2 * xi) - xi1 ** 2 / (2 * xi ** 2) - s * xi1 / xi ** 2
        return abs(-(dy + y * y) + ev.potential(_mpc(x)) - E)


# ---------------------------------------------------------------------------
# ODE route


def _ode_base_point(k: int, L: Lattice):
    w1, w3 = complex(L.omega1), complex(L.omega3)
    period = 2 * (w1 if k == 1 else w3)
    minper = min(abs(2 * w1), abs(2 * w3))
    # straight line x0 + t*period stays half a cell away from every half-period
    for shift in (0.5, 0.4, 0.6, 0.3, 0.7):
        x0 = (w1 + w3) / 2 if shift == 0.5 else (shift * w1 + (1 - shift) * w3) if k == 1 else ((1 - shift) * w1 + shift * w3)
        ts = np.linspace(0, 1, 401)
        pts = x0 + ts * period
        dist = _distance_to_half_lattice(pts, w1, w3)
        if dist.min() >= 0.1 * minper:
            return x0, period, float(dist.min())
    raise PathPole("no pole-free straight path found")


def _distance_to_half_lattice(pts, w1, w3):
    det = (np.conj(w1) * w3).imag
    a = (np.conj(pts) * w3).imag / det
    b = -(np.conj(pts) * w1).imag / det
    best = np.full(pts.shape, np.inf)
    for da in (-1, 0, 1):
        for db in (-1, 0, 1):
            near = (np.floor(a) + da) * w1 + (np.floor(b) + db) * w3
            best = np.minimum(best, np.abs(pts - near))
    return best


def transfer_matrix(E, k: int, l, L: Lattice, rtol: float = 1e-12):
    """Transfer matrix over ``x0 -> x0 + 2 omega_k`` and path metadata."""
    l = CouplingVector.of(l)
    NL = numpy_lattice(L)
    shifts = [0, complex(L.omega1), complex(L.omega2), complex(L.omega3)]
    weights = [li * (li + 1) for li in l]
    x0, period, dist = _ode_base_point(k, L)
    E = complex(E)

    def u(x):
        tot = 0j
        for wgt, s in zip(weights, shifts):
            if wgt:
                tot += wgt * complex(wp_np(x + s, NL))
        return tot

    def rhs(t, y):
        x = x0 + t * period
        f, fp = y[0], y[1]
        return [period * fp, period * (u(x) - E) * f]

    cols = []
    for init in ([1 + 0j, 0j], [0j, 1 + 0j]):
        sol = solve_ivp(rhs, (0.0, 1.0), np.array(init, dtype=complex), method="DOP853",
                        rtol=rtol, atol=rtol * 1e-2)
        if not sol.success:
            raise NonConvergence(sol.message)
        cols.append(sol.y[:, -1])
    M = np.array(cols).T
    return M, {"x0": [x0.real, x0.imag], "period": [period.real, period.imag], "min_pole_distance": dist}


def monodromy_ode(E, k: int, l, L: Lattice) -> MonodromyResult:
    if k not in (1, 3):
        raise ValueError("k must be 1 or 3")
    M, meta = transfer_matrix(E, k, l, L)
    det = np.linalg.det(M)
    tr = np.trace(M)
    disc = cmath.sqrt(tr * tr - 4 * det)
    b1, b2 = (tr + disc) / 2, (tr - disc) / 2
    if abs(b2) > abs(b1):
        b1, b2 = b2, b1
    return MonodromyResult(k, b1, "ode", complex(E), pair=(b1, b2),
                           residuals={"det_minus_one": abs(det - 1)}, path=meta | {"trace": [tr.real, tr.imag]})


def q_from_ode(E0, k: int, l, L: Lattice) -> int:
    """``q_k`` at a root of Q from the trace (+-2) of the transfer matrix."""
    M, _ = transfer_matrix(complex(E0), k, l, L)
    tr = np.trace(M)
    if abs(tr - 2) < 1e-5:
        return 0
    if abs(tr + 2) < 1e-5:
        return 1
    raise BadBasepoint(f"trace {tr} is not +-2; E0 is not a band edge")


# ---------------------------------------------------------------------------
# integral route


def _np_poly(p):
    return np.array([float(Fraction(int(c.p), int(c.q))) for c in reversed(p.coeffs())] or [0.0])


def _deflate(coeffs_desc, root):
    """Synthetic division of a descending-coefficient polynomial by ``(x - root)``."""
    out = [coeffs_desc[0]]
    for c in coeffs_desc[1:-1]:
        out.append(c + out[-1] * root)
    return np.array(out, dtype=complex)


def monodromy_integral(E, k: int, S: SpectralData, L: Lattice, E0, q_k: int | None = None,
                       waypoints=(), branch: int = 1, tol: float = 1e-12) -> MonodromyResult:
    """``(-1)^q exp(-1/2 int_{E0}^{E} (-2 eta_k a + 2 omega_k c) / sqrt(-Q))``.

    The path is the polyline ``E0 -> waypoints... -> E``.  ``sqrt(-Q)`` is
    continued along it starting from the branch fixed on the first segment
    (``branch`` flips that choice, which inverts the multiplier).
    """
    if k not in (1, 3):
        raise ValueError("k must be 1 or 3")
    E0c = complex(E0)
    Qc = _np_poly(S.Q)
    if abs(np.polyval(Qc, E0c)) > 1e-8 * max(1.0, np.abs(Qc).max()):
        raise BadBasepoint(f"Q(E0) != 0 at E0={E0}")
    if q_k is None:
        q_k = q_from_ode(E0c, k, S.l, L)
    eta = complex(L.eta1 if k == 1 else L.eta3)
    om = complex(L.omega1 if k == 1 else L.omega3)
    ac, cc = _np_poly(S.a), _np_poly(S.c)
    other = [r for r in np.roots(Qc) if abs(r - E0c) > 1e-6]
    pts = _choose_path(E0c, complex(E), waypoints, other)
    if abs(pts[-1] - E0c) == 0:
        val = (-1) ** q_k
        return MonodromyResult(k, complex(val), "integral", complex(E), q_k=q_k, pair=(val, val),
                               path={"waypoints": [[p.real, p.imag] for p in pts]})
    Qdef = _deflate(Qc.astype(complex), E0c)

    def numer(e):
        return -2 * eta * np.polyval(ac, e) + 2 * om * np.polyval(cc, e)

    total = 0j
    ref = None
    nodes, wts = np.polynomial.legendre.leggauss(20)
    for seg, (a, b) in enumerate(zip(pts[:-1], pts[1:])):
        nsub = 16
        prev_total = None
        while True:
            acc, last, ok = _segment_integral(seg, a, b, nsub, nodes, wts, Qc, Qdef, numer, ref, branch)
            if ok and prev_total is not None and abs(acc - prev_total) <= tol * max(1.0, abs(acc)):
                break
            if nsub > 4096:
                raise BranchAmbiguity("branch tracking failed to settle")
            prev_total = acc if ok else None
            nsub *= 2
        total += acc
        ref = last
    val = (-1) ** q_k * cmath.exp(-0.5 * total)
    return MonodromyResult(k, val, "integral", complex(E), q_k=q_k, pair=(val, 1 / val),
                           path={"waypoints": [[p.real, p.imag] for p in pts], "E0": [E0c.real, E0c.imag]})


def _path_clear(pts, other, guard=BRANCH_GUARD):
    return all(_seg_dist(a, b, r) >= guard for a, b in zip(pts[:-1], pts[1:]) for r in other)


def _choose_path(E0, E, waypoints, other):
    """Polyline from ``E0`` to ``E``.

    Explicit waypoints are used as given.  Otherwise the straight segment is
    tried first, then paths bent through a point off the midpoint.
    """
    if waypoints:
        pts = [E0] + [complex(w) for w in waypoints] + [E]
        if not _path_clear(pts, other):
            raise BranchAmbiguity(f"path passes within {BRANCH_GUARD} of a branch point")
        return pts
    pts = [E0, E]
    if _path_clear(pts, other):
        return pts
    mid, span = (E0 + E) / 2, max(abs(E - E0), 1e-2)
    normal = 1j * (E - E0) / span if E != E0 else 1j
    for scale in (0.25, -0.25, 0.5, -0.5, 1.0, -1.0):
        pts = [E0, mid + scale * span * normal, E]
        if _path_clear(pts, other):
            return pts
    raise BranchAmbiguity(f"no path from {E0} to {E} keeps {BRANCH_GUARD} away from the branch points")


def _seg_dist(a, b, r):
    d = b - a
    if d == 0:
        return abs(r - a)
    t = max(0.0, min(1.0, ((r - a) * d.conjugate()).real / abs(d) ** 2))
    return abs(a + t * d - r)


def _segment_integral(seg, a, b, nsub, nodes, wts, Qc, Qdef, numer, ref, branch):
    """Integrate one segment with the square root continued node by node.

    On the first segment ``E = a + (b - a) s^2`` removes the endpoint square
    root singularity: ``sqrt(-Q) = s * R(s)`` with ``R`` smooth and nonzero.
    Returns ``(integral, sqrt(-Q) at b, ok)``; ``ok`` is False when the
    argument jumps by more than pi/2 between neighbouring nodes.
    """
    edges = np.linspace(0.0, 1.0, nsub + 1)
    total = 0j
    prev = ref
    ok = True
    first = seg == 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        s = lo + (hi - lo) * (nodes + 1) / 2
        w = wts * (hi - lo) / 2
        for si, wi in zip(s, w):
            if first:
                e = a + (b - a) * si * si
                rr = cmath.sqrt(-(b - a) * np.polyval(Qdef, e))
                if prev is None:
                    r0 = cmath.sqrt(-(b - a) * np.polyval(Qdef, a))
                    prev = branch * r0
                if abs(rr - prev) > abs(rr + prev):
                    rr = -rr
                if prev != 0 and abs(cmath.phase(rr / prev)) > math.pi / 2:
                    ok = False
                prev = rr
                total += wi * numer(e) * 2 * (b - a) / rr
            else:
                e = a + (b - a) * si
                rr = cmath.sqrt(-np.polyval(Qc, e))
                if abs(rr - prev) > abs(rr + prev):
                    rr = -rr
                if abs(cmath.phase(rr / prev)) > math.pi / 2:
                    ok = False
                prev = rr
                total += wi * numer(e) * (b - a) / rr
    # value of sqrt(-Q) at the segment end, continued from the last node
    if first:
        rr = cmath.sqrt(-(b - a) * np.polyval(Qdef, b))
        if abs(rr - prev) > abs(rr + prev):
            rr = -rr
        end = rr  # s = 1
    else:
        rr = cmath.sqrt(-np.polyval(Qc, b))
        if abs(rr - prev) > abs(rr + prev):
            rr = -rr
        end = rr
    return total, end, ok


# ---------------------------------------------------------------------------
# Bethe Ansatz


@dataclass
class BetheConfig:
    l: CouplingVector
    t: list
    c: complex
    E: complex
    residuals: list

    @property
    def max_residual(self) -> float:
        return max((float(r) for r in self.residuals), default=0.0)

    def to_json(self) -> dict:
        return {
            "l": list(self.l),
            "t": [_cjson(v) for v in self.t],
            "c": _cjson(self.c),
            "E": _cjson(self.E),
            "residuals": [float(r) for r in self.residuals],
        }


def _zeta(x, L):
    return eval_elliptic("zeta", x, L)


def _wp(x, L):
    return eval_elliptic("wp", x, L)


def bethe_equations(t, c, l: CouplingVector, L: Lattice):
    """Residuals of the Bethe Ansatz system and its Jacobian in ``(t, c)``."""
    n = len(t)
    F, J = [], []
    zt = [_zeta(tj, L) for tj in t]
    wt = [_wp(tj, L) for tj in t]
    for j in range(n):
        val = c
        row = [mpmath.mpc(0)] * (n + 1)
        row[n] = 1
        for k in range(n):
            if k == j:
                continue
            val += _zeta(t[k] - t[j], L)
            pk = _wp(t[k] - t[j], L)
            row[k] += -pk
            row[j] += pk
        if l.l0:
            val += l.l0 * zt[j]  # -l0 * zeta(-t_j)
            row[j] += -l.l0 * wt[j]
        for i in (1, 2, 3):
            li = l[i]
            if li:
                wi = L.half_period(i)
                val -= li * (_zeta(wi - t[j], L) - L.eta(i))
                row[j] += -li * _wp(wi - t[j], L)
        F.append(val)
        J.append(row)
    if l.l0:
        val = c + sum(zt)
        row = [-w for w in wt] + [1]
        F.append(val)
        J.append(row)
    for i in (1, 2, 3):
        if l[i]:
            wi = L.half_period(i)
            val = c + n * L.eta(i) + sum(_zeta(tj - wi, L) for tj in t)
            row = [-_wp(tj - wi, L) for tj in t] + [1]
            F.append(val)
            J.append(row)
    return F, J


def bethe_energy(t, c, l: CouplingVector, L: Lattice, with_grad: bool = False):
    """Eigenvalue attached to a Bethe configuration (and its gradient)."""
    l0, l1, l2, l3 = l
    n = len(t)
    e1, e2, e3 = L.e
    E = -c * c + (l0 * l1 + l2 * l3) * e1 + (l0 * l2 + l1 * l3) * e2 + (l0 * l3 + l1 * l2) * e3
    grad = [mpmath.mpc(0)] * (n + 1)
    grad[n] = -2 * c
    for i in (1, 2, 3):
        eta = L.eta(i)
        E -= l[i] * eta * (2 * c + n * eta)
        grad[n] -= 2 * l[i] * eta
    for j in range(n):
        for i in range(4):
            if not l[i]:
                continue
            y = t[j] - L.half_period(i)
            p, z = _wp(y, L), _zeta(y, L)
            E -= l[i] * (p - z * z)
            if with_grad:
                pp = eval_elliptic("wp_prime", y, L)
                grad[j] -= l[i] * (pp + 2 * z * p)
    for j in range(n):
        for k in range(j + 1, n):
            y = t[j] - t[k]
            p, z = _wp(y, L), _zeta(y, L)
            E += p - z * z
            if with_grad:
                pp = eval_elliptic("wp_prime", y, L)
                g = pp + 2 * z * p
                grad[j] += g
                grad[k] -= g
    return (E, grad) if with_grad else E


def _check_config(t, L: Lattice, tol: float = 1e-8):
    for j, tj in enumerate(t):
        if L.distance_to_lattice(tj) < tol:
            raise Collision(f"t_{j + 1} lies on the period lattice")
        for k in range(j):
            if L.distance_to_lattice(tj - t[k]) < tol:
                raise Collision(f"t_{k + 1} and t_{j + 1} coincide")


def bethe_solve(l, L: Lattice, t_seed, c_seed=0, E_target=None, max_iter: int = 60,
                tol: float = 1e-10) -> BetheConfig:
    """Damped Gauss-Newton for the Bethe Ansatz system (optionally at fixed E)."""
    l = CouplingVector.of(l)
    n = l.total
    with mp.workdps(L.precision):
        t = [_mpc(v) for v in t_seed]
        if len(t) != n:
            raise ValueError(f"need {n} Bethe roots, got {len(t)}")
        c = _mpc(c_seed)
        _check_config(t, L)

        def system(t, c):
            F, J = bethe_equations(t, c, l, L)
            if E_target is not None:
                En, grad = bethe_energy(t, c, l, L, with_grad=True)
                F = F + [En - _mpc(E_target)]
                J = J + [grad]
            return F, J

        def norm(F):
            return max((abs(f) for f in F), default=mpmath.mpf(0))

        F, J = system(t, c)
        res = norm(F)
        for _ in range(max_iter):
            if res < tol:
                break
            Jn = np.array([[complex(v) for v in row] for row in J])
            Fn = np.array([complex(v) for v in F])
            step, *_ = np.linalg.lstsq(Jn, -Fn, rcond=None)
            lam = 1.0
            for _halving in range(21):
                t_new = [tj + lam * complex(s) for tj, s in zip(t, step[:n])]
                c_new = c + lam * complex(step[n])
                try:
                    _check_config(t_new, L)
                    F_new, J_new = system(t_new, c_new)
                    res_new = norm(F_new)
                except (Collision, ZeroDivisionError):
                    res_new = mpmath.inf
                if res_new < res:
                    break
                lam /= 2
            else:
                raise Divergence("damped Newton stalled", best_residual=float(res))
            t, c, F, J, res = t_new, c_new, F_new, J_new, res_new
        if res >= tol:
            raise Divergence(f"no convergence after {max_iter} iterations", best_residual=float(res))
        _check_config(t, L)
        F, _ = bethe_equations(t, c, l, L)
        E = bethe_energy(t, c, l, L)
        return BetheConfig(l, t, c, E, [abs(f) for f in F])


def bethe_solve_at(l, L: Lattice, E, tries: int = 40, seed: int = 0) -> BetheConfig:
    """Bethe solution with eigenvalue ``E`` from pseudo-random seeds in one cell."""
    l = CouplingVector.of(l)
    n = l.total
    if n == 0:
        with mp.workdps(L.precision):
            c = mpmath.sqrt(-_mpc(E))
        return BetheConfig(l, [], c, _mpc(E), [])
    rng = np.random.default_rng(seed)
    w1, w3 = complex(L.omega1), complex(L.omega3)
    best = None
    for _ in range(tries):
        ab = rng.uniform(0.1, 1.9, size=(n, 2))
        t0 = [a * w1 + b * w3 for a, b in ab]
        c0 = complex(rng.normal(), rng.normal())
        try:
            return bethe_solve(l, L, t0, c0, E_target=E)
        except Divergence as exc:
            if best is None or (exc.best_residual or math.inf) < best:
                best = exc.best_residual
        except Collision:
            continue
    raise Divergence(f"no Bethe solution found at E={E}", best_residual=best)


def bethe_multiplier(B: BetheConfig, k: int, L: Lattice):
    """Floquet multiplier of the Bethe eigenfunction over ``2 omega_k``.

    From the quasi-periodicity of ``sigma`` and the co-sigma functions:
    ``(-1)^(sum of l_i, i not in {0, k}) exp(2 eta_k sum t + 2 omega_k c)``.
    """
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2 or 3")
    sign = (-1) ** sum(B.l[i] for i in (1, 2, 3) if i != k)
    with mp.workdps(L.precision):
        st = sum(B.t, mpmath.mpc(0))
        return sign * mpmath.exp(2 * L.eta(k) * st + 2 * L.half_period(k) * B.c)


def bethe_eigen_residual(B: BetheConfig, x, L: Lattice):
    """``|(H - E) f| / |f|`` for the Bethe eigenfunction at ``x``."""
    l = B.l
    with mp.workdps(L.precision):
        x = _mpc(x)
        y = B.c + sum(_zeta(x + tj, L) for tj in B.t) - l.l0 * _zeta(x, L)
        dy = -sum(_wp(x + tj, L) for tj in B.t) + l.l0 * _wp(x, L)
        u = l.l0 * (l.l0 + 1) * _wp(x, L)
        for i in (1, 2, 3):
            if l[i]:
                wi = L.half_period(i)
                y -= l[i] * (_zeta(x + wi, L) - L.eta(i))
                dy += l[i] * _wp(x + wi, L)
                u += l[i] * (l[i] + 1) * _wp(x + wi, L)
        return abs(-(dy + y * y) + u - B.E)


# ---------------------------------------------------------------------------
# Hermite-Krichever closed forms for l = (2, 0, 0, 0)


def wp_inverse(w, L: Lattice, grid: int = 6):
    """Some ``a`` with ``wp(a) = w`` (the other solution is ``-a``)."""
    with mp.workdps(L.precision):
        w = _mpc(w)
        tol = mpmath.mpf(10) ** (-L.precision + 8) * max(1, abs(w))
        for i in range(grid):
            for j in range(grid):
                a = (2 * (i + 0.5) / grid) * L.omega1 + (2 * (j + 0.5) / grid) * L.omega3
                for _ in range(80):
                    if L.distance_to_lattice(a) < 1e-6:
                        break
                    f = _wp(a, L) - w
                    if abs(f) < tol:
                        return a
                    a = a - f / eval_elliptic("wp_prime", a, L)
                else:
                    continue
    raise NonConvergence(f"could not invert wp at {w}")


@dataclass
class HKParams:
    alpha: complex
    kappa: complex
    wp_alpha: complex
    multipliers: dict
    ansatz_residual: float


def hk_example_params(E, S: SpectralData, L: Lattice, branch: int = 1) -> HKParams:
    """``alpha`` and ``kappa`` from the closed forms for ``l = (2, 0, 0, 0)``.

    ``branch`` selects the sign of ``sqrt(-Q(E))``.  The sign of ``alpha`` is
    the one for which ``exp(kappa x) (b0 Phi + b1 Phi')`` solves the equation.
    """
    if tuple(S.l) != (2, 0, 0, 0):
        raise ValueError("closed forms are available for l = (2, 0, 0, 0) only")
    g2 = S.roots.g2
    e1 = S.roots.e1
    if isinstance(E, (int, Fraction)):
        E = Fraction(E)
        p2 = E * E - 3 * g2
        if p2 == 0:
            raise SingularP2("E^2 = 3 g2")
        Qe = poly_value(S.Q, E)
        wpa = e1 - (E - 3 * e1) * (E + 6 * e1) ** 2 / (9 * p2)
        if Qe == 0:
            kappa = Fraction(0)
            with mp.workdps(L.precision):
                alpha = wp_inverse(_mpc(wpa), L)
            return HKParams(alpha, kappa, wpa, _hk_multipliers(alpha, 0, L), 0.0)
    with mp.workdps(L.precision):
        En = _mpc(E)
        p2 = En * En - 3 * _mpc(g2)
        if abs(p2) < 1e-10:
            raise SingularP2("E^2 = 3 g2")
        e1m = _mpc(e1)
        wpa = e1m - (En - 3 * e1m) * (En + 6 * e1m) ** 2 / (9 * p2)
        kappa = 2 * _sqrt_minus_Q(S, En, branch) / (3 * p2)
        a = wp_inverse(wpa, L)
        res = {sgn: _hk_ansatz_residual(sgn * a, kappa, En, L) for sgn in (1, -1)}
        sgn = min(res, key=lambda s: res[s])
        alpha = sgn * a
        return HKParams(alpha, kappa, wpa, _hk_multipliers(alpha, kappa, L), float(res[sgn]))


def _hk_multipliers(alpha, kappa, L):
    with mp.workdps(L.precision):
        za = _zeta(alpha, L)
        return {k: mpmath.exp(-2 * L.eta(k) * alpha + 2 * L.half_period(k) * za + 2 * kappa * L.half_period(k))
                for k in (1, 3)}


def _hk_ansatz_residual(alpha, kappa, E, L: Lattice):
    """Smallest relative singular value of the 2-column ansatz system at sample points."""
    rows = []
    g2 = L.g2
    for x in (mpmath.mpc("0.31", "0.17") * L.omega1 + mpmath.mpc("0.23") * L.omega3,
              mpmath.mpc("0.71") * L.omega1 + mpmath.mpc("0.42") * L.omega3,
              mpmath.mpc("1.13") * L.omega1 + mpmath.mpc("0.61") * L.omega3,
              mpmath.mpc("0.52") * L.omega1 + mpmath.mpc("1.37") * L.omega3):
        y = x - alpha
        w = _zeta(y, L) - _zeta(x, L) + _zeta(alpha, L)
        p_y, p_x = _wp(y, L), _wp(x, L)
        w1 = -p_y + p_x
        w2 = -eval_elliptic("wp_prime", y, L) + eval_elliptic("wp_prime", x, L)
        k = kappa + w
        g2nd = k * k + w1  # G''/G
        g1st = k  # G'/G
        u = 6 * p_x
        col0 = -g2nd + u - E
        col1 = -(g2nd * w + 2 * g1st * w1 + w2) + (u - E) * w
        rows.append([complex(col0), complex(col1)])
    sv = np.linalg.svd(np.array(rows), compute_uv=False)
    return sv[-1] / sv[0]


def lattice_distance(x, L: Lattice) -> float:
    """Distance from ``x`` to the period lattice ``2 omega1 Z + 2 omega3 Z``."""
    return L.distance_to_lattice(x)
