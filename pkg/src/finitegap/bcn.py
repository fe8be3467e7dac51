"""Quasi-solvable sector of the BC_N Inozemtsev Hamiltonian.

In the coordinates ``z_j = wp(x_j)`` the gauged operator ``Phi^-1 H Phi`` has
rational coefficients:

    d^2/dx_j^2 = R(z_j) d^2/dz_j^2 + R'(z_j)/2 d/dz_j,   R(z) = 4z^3 - g2 z - g3,

the one-body terms ``wp(x + omega_i)`` are rational in ``z`` and the pair term
uses

    wp(u - v) + wp(u + v) = (2 (z_u + z_v)(z_u z_v - g2/4) - g3) / (z_u - z_v)^2,

which is checked numerically against the theta-function evaluator before any
``N >= 2`` assembly.  The matrix on ``W_d^sym`` is then computed exactly.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key

import flint
import mpmath
from mpmath import mp

from .elliptic import ExactRoots, eval_elliptic, lattice_from_roots
from .errors import ClosureFailure, IdentityValidationFailed, MismatchFailure, NotQuasiSolvable
from .spectral import poly_to_strings, polynomial_roots, spectral_data

_HALF = Fraction(1, 2)


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True)
class GaugeChoice:
    """Exponents of ``Phi(z) = prod (z_j - z_k)^a prod (z_j - e_i)^{b_i}``.

    ``b0`` does not appear in ``Phi``; it fixes the behaviour at ``x = 0``
    through the degree bound ``d``.
    """

    a: Fraction
    b0: Fraction
    b1: Fraction
    b2: Fraction
    b3: Fraction

    @classmethod
    def of(cls, a, b0, b1, b2, b3) -> "GaugeChoice":
        return cls(*(_frac(v) for v in (a, b0, b1, b2, b3)))

    @property
    def b(self) -> tuple:
        return (self.b0, self.b1, self.b2, self.b3)

    def d(self, N: int) -> Fraction:
        return -((N - 1) * self.a + sum(self.b))

    def degree(self, N: int) -> int:
        d = self.d(N)
        if d.denominator != 1 or d < 0:
            raise NotQuasiSolvable(f"d = {d} is not a non-negative integer")
        return int(d)

    def is_admissible(self, N: int) -> bool:
        d = self.d(N)
        return d.denominator == 1 and d >= 0

    def check_couplings(self, l: int, li) -> None:
        if self.a not in (-l, l + 1):
            raise ValueError(f"a must be {-l} or {l + 1}")
        for i, (bi, lv) in enumerate(zip(self.b, li)):
            if bi not in (Fraction(-lv, 2), Fraction(lv + 1, 2)):
                raise ValueError(f"b{i} must be {Fraction(-lv, 2)} or {Fraction(lv + 1, 2)}")

    def is_square_integrable(self, l: int, li) -> bool:
        return self.a == l + 1 and self.b0 == Fraction(li[0] + 1, 2) and self.b1 == Fraction(li[1] + 1, 2)

    def to_json(self) -> dict:
        return {k: str(getattr(self, k)) for k in ("a", "b0", "b1", "b2", "b3")}


def square_integrable_gauge(l: int, li, b2=None, b3=None) -> GaugeChoice:
    """``a = l+1``, ``b0 = (l0+1)/2``, ``b1 = (l1+1)/2``; ``b2``, ``b3`` default to ``-l_i/2``."""
    b2 = Fraction(-li[2], 2) if b2 is None else b2
    b3 = Fraction(-li[3], 2) if b3 is None else b3
    return GaugeChoice.of(l + 1, Fraction(li[0] + 1, 2), Fraction(li[1] + 1, 2), b2, b3)


def all_gauges(l: int, li) -> list:
    out = []
    for a in sorted({Fraction(-l), Fraction(l + 1)}):
        opts = [sorted({Fraction(-v, 2), Fraction(v + 1, 2)}) for v in li]
        for bs in itertools.product(*opts):
            out.append(GaugeChoice(a, *bs))
    return out


def admissible_gauges(N: int, l: int, li) -> list:
    gauges = all_gauges(l, li)
    if N == 1:
        # a plays no role for one particle
        gauges = [g for g in gauges if g.a == gauges[0].a]
    return [g for g in gauges if g.is_admissible(N)]


def _grevlex(m1, m2) -> int:
    s1, s2 = sum(m1), sum(m2)
    if s1 != s2:
        return -1 if s1 < s2 else 1
    for x, y in zip(reversed(m1), reversed(m2)):
        if x != y:
            return -1 if x > y else 1
    return 0


def wdsym_basis(N: int, gauge: GaugeChoice) -> list:
    """Weakly decreasing multi-indices with entries in ``0..d``, graded reverse-lex order."""
    if N < 1:
        raise ValueError("N must be at least 1")
    d = gauge.degree(N)
    ms = [tuple(sorted(c, reverse=True)) for c in itertools.combinations_with_replacement(range(d + 1), N)]
    return sorted(ms, key=cmp_to_key(_grevlex))


# ---------------------------------------------------------------------------
# pair identity gate

_VALIDATED: dict = {}


def pair_term_rational(zu, zv, g2, g3):
    return (2 * (zu + zv) * (zu * zv - g2 / 4) - g3) / (zu - zv) ** 2


def validate_pair_identity(roots: ExactRoots, samples: int = 100, tol: float = 1e-10, seed: int = 7) -> float:
    """Check the two-point identity for ``wp(u-v) + wp(u+v)`` at random pairs."""
    if roots in _VALIDATED:
        return _VALIDATED[roots]
    L = lattice_from_roots(roots, 30)
    rng = random.Random(seed)
    worst = 0.0
    with mp.workdps(30):
        g2, g3 = L.g2, L.g3
        done = 0
        while done < samples:
            u = (2 * rng.random() - 1) * L.omega1 + (2 * rng.random() - 1) * L.omega3
            v = (2 * rng.random() - 1) * L.omega1 + (2 * rng.random() - 1) * L.omega3
            if min(L.distance_to_lattice(w) for w in (u, v, u - v, u + v)) < 0.05:
                continue
            lhs = eval_elliptic("wp", u - v, L) + eval_elliptic("wp", u + v, L)
            rhs = pair_term_rational(eval_elliptic("wp", u, L), eval_elliptic("wp", v, L), g2, g3)
            worst = max(worst, float(abs(lhs - rhs) / max(1, abs(lhs))))
            done += 1
    if worst > tol:
        raise IdentityValidationFailed(f"pair identity off by {worst:.3e}")
    _VALIDATED[roots] = worst
    return worst


# ---------------------------------------------------------------------------
# exact assembly


class _Rat:
    """Reduced quotient of two multivariate polynomials over Q."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        if den is None:
            den = num.context().from_dict({}) + 1
        g = num.gcd(den)
        if not g.is_one() and not g.is_zero():
            num, den = num / g, den / g
        lc = den.leading_coefficient()
        self.num, self.den = num / lc, den / lc

    def __add__(self, o):
        o = o if isinstance(o, _Rat) else _Rat(self.num * 0 + o)
        g = self.den.gcd(o.den)
        return _Rat(self.num * (o.den / g) + o.num * (self.den / g), self.den * (o.den / g))

    __radd__ = __add__

    def __neg__(self):
        return _Rat(-self.num, self.den)

    def __sub__(self, o):
        return self + (-o if isinstance(o, _Rat) else -o)

    def __mul__(self, o):
        if not isinstance(o, _Rat):
            return _Rat(self.num * o, self.den)
        return _Rat(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__


def _q(v):
    v = _frac(v)
    return flint.fmpq(v.numerator, v.denominator)


@dataclass
class BCNMatrix:
    N: int
    l: int
    li: tuple
    gauge: GaugeChoice
    roots: ExactRoots
    basis: list
    M: list  # M[i][j]: coefficient of basis[i] in H(basis[j])

    @property
    def dim(self) -> int:
        return len(self.basis)

    def fmpq_mat(self):
        return flint.fmpq_mat(self.dim, self.dim, [_q(v) for row in self.M for v in row])

    def charpoly(self) -> flint.fmpq_poly:
        return self.fmpq_mat().charpoly()

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "couplings": {"l": self.l, "li": list(self.li)},
            "gauge": self.gauge.to_json(),
            "dim": self.dim,
            "basis": [list(m) for m in self.basis],
            "matrix": [[f"{v.numerator}/{v.denominator}" for v in row] for row in self.M],
        }


def _coefficients(N, l, li, gauge: GaugeChoice, roots: ExactRoots):
    """Coefficients of the gauged operator: (ctx, z, C2, C1, C0, common denominator)."""
    names = tuple(f"z{j + 1}" for j in range(N))
    ctx = flint.fmpq_mpoly_ctx.get(names, "lex")
    z = ctx.gens()
    one = ctx.from_dict({}) + 1
    e = roots.e
    g2, g3 = _q(roots.g2), _q(roots.g3)
    a = _q(gauge.a)
    b = [_q(v) for v in gauge.b]

    def R(x):
        return 4 * x ** 3 - g2 * x - g3

    def Rp2(x):
        return 6 * x ** 2 - g2 / 2

    def inv(p, power=1):
        return _Rat(one, p ** power)

    C2, C1 = [], []
    C0 = _Rat(one * 0)
    for j in range(N):
        G = _Rat(one * 0)
        dG = _Rat(one * 0)
        for k in range(N):
            if k != j:
                G = G + inv(z[j] - z[k]) * a
                dG = dG - inv(z[j] - z[k], 2) * a
        for i in range(1, 4):
            if b[i] != 0:
                G = G + inv(z[j] - _q(e[i - 1])) * b[i]
                dG = dG - inv(z[j] - _q(e[i - 1]), 2) * b[i]
        Rj, Rpj = R(z[j]), Rp2(z[j])
        C2.append(-Rj)
        C1.append(-(G * (2 * Rj) + _Rat(Rpj)))
        C0 = C0 - ((dG + G * G) * Rj + G * Rpj)
        # one-body potential
        if li[0]:
            C0 = C0 + _Rat(z[j] * (li[0] * (li[0] + 1)))
        for i in range(1, 4):
            lv = li[i]
            if lv:
                ei = e[i - 1]
                ej, ek = (e[m] for m in range(3) if m != i - 1)
                shift = _Rat(one * _q(ei) * (z[j] - _q(ei)) + _q((ei - ej) * (ei - ek)), z[j] - _q(ei))
                C0 = C0 + shift * (lv * (lv + 1))
    if l * (l + 1):
        for j in range(N):
            for k in range(j + 1, N):
                pair = _Rat(2 * (z[j] + z[k]) * (z[j] * z[k] - g2 / 4) - g3, (z[j] - z[k]) ** 2)
                C0 = C0 + pair * (2 * l * (l + 1))
    den = C0.den
    for c in C1:
        den = den * (c.den / den.gcd(c.den))
    return ctx, z, C2, C1, C0, den


def _basis_poly(m, z, one):
    p = one * 0
    for perm in itertools.permutations(m):
        term = one
        for zj, mj in zip(z, perm):
            term = term * zj ** mj
        p = p + term
    return p


def _stabilizer(m) -> int:
    out = 1
    for _, grp in itertools.groupby(sorted(m)):
        out *= math.factorial(len(list(grp)))
    return out


def bcn_matrix(N: int, l: int, li, gauge: GaugeChoice, roots: ExactRoots, check: bool = True) -> BCNMatrix:
    """Exact matrix of ``Phi^-1 H Phi`` on ``W_d^sym``."""
    li = tuple(int(v) for v in li)
    if len(li) != 4:
        raise ValueError("li needs four entries")
    gauge.check_couplings(l, li)
    basis = wdsym_basis(N, gauge)
    if N >= 2 and l * (l + 1):
        validate_pair_identity(roots)
    ctx, z, C2, C1, C0, den = _coefficients(N, l, li, gauge, roots)
    one = ctx.from_dict({}) + 1
    index = {m: i for i, m in enumerate(basis)}
    polys = [_basis_poly(m, z, one) for m in basis]
    c1n = [c.num * (den / c.den) for c in C1]
    c0n = C0.num * (den / C0.den)
    M = [[Fraction(0)] * len(basis) for _ in basis]
    for col, P in enumerate(polys):
        tot = c0n * P
        for j in range(N):
            dP = P.derivative(j)
            tot = tot + c1n[j] * dP + C2[j] * den * dP.derivative(j)
        img, rem = divmod(tot, den)
        if not rem.is_zero():
            raise ClosureFailure("gauged H leaves the polynomial ring")
        recon = one * 0
        for exps, c in img.to_dict().items():
            m = tuple(sorted(exps, reverse=True))
            if m not in index:
                raise ClosureFailure(f"image has monomial {exps} outside W_d^sym")
            if tuple(exps) == m:
                val = Fraction(int(c.p), int(c.q)) / _stabilizer(m)
                M[index[m]][col] = val
                recon = recon + polys[index[m]] * _q(val)
        if check and not (recon - img).is_zero():
            raise ClosureFailure("image is not symmetric")
    return BCNMatrix(N, l, li, gauge, roots, basis, M)


@dataclass
class BCNSpectrum:
    matrix: BCNMatrix
    charpoly: flint.fmpq_poly
    eigenvalues: list
    reality: bool
    square_integrable: bool
    precision: int

    def to_json(self) -> dict:
        out = self.matrix.to_json()
        with mp.workdps(self.precision):
            out["eigenvalues"] = [
                {"re": mpmath.nstr(mpmath.re(_mp(v)), self.precision), "im": mpmath.nstr(mpmath.im(_mp(v)), self.precision)}
                for v in self.eigenvalues
            ]
        out["charpoly"] = poly_to_strings(self.charpoly)
        out["reality"] = self.reality
        out["square_integrable"] = self.square_integrable
        return out


def _mp(v):
    if isinstance(v, Fraction):
        return mpmath.mpc(mpmath.mpf(v.numerator) / v.denominator)
    return mpmath.mpc(v)


def bcn_spectra(M: BCNMatrix, precision: int = 30, tol: float = 1e-8) -> BCNSpectrum:
    """Eigenvalues from the exact characteristic polynomial, with multiplicities."""
    cp = M.charpoly()
    with mp.workdps(precision):
        eig = polynomial_roots(cp, precision)
        eig = sorted(eig, key=lambda v: (float(mpmath.re(_mp(v))), float(mpmath.im(_mp(v)))))
        real = all(isinstance(v, Fraction) or abs(mpmath.im(v)) <= tol * max(1, abs(v)) for v in eig)
    return BCNSpectrum(M, cp, eig, real, M.gauge.is_square_integrable(M.l, M.li), precision)


def crosscheck_n1(li, roots: ExactRoots) -> dict:
    """One-particle sectors against the spectral polynomial: product of charpolys equals Q."""
    S = spectral_data(li, roots)
    prod = flint.fmpq_poly([1])
    sectors = []
    for g in admissible_gauges(1, 0, tuple(li)):
        M = bcn_matrix(1, 0, li, g, roots)
        cp = M.charpoly()
        prod *= cp
        sectors.append({"gauge": g.to_json(), "dim": M.dim, "charpoly": poly_to_strings(cp)})
        if S.Q % cp != 0:
            raise MismatchFailure(f"sector charpoly {cp} does not divide Q")
    if prod != S.Q:
        raise MismatchFailure(f"product of sector charpolys {prod} differs from Q {S.Q}")
    return {"couplings": list(li), "Q": poly_to_strings(S.Q), "sectors": sectors, "agree": True}
