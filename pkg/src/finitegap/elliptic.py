"""Weierstrass and theta functions on a period lattice.

All evaluation goes through the Jacobi theta function ``theta_1`` in the
nome ``q = exp(i*pi*tau)`` (``p = q**2`` is the nome stored on the lattice).
Half-periods follow ``omega_0 = 0``, ``omega_2 = -omega_1 - omega_3`` and
``e_i = wp(omega_i)``.

Two evaluation paths exist: the mpmath one (``eval_elliptic`` and friends)
at the lattice's working precision, and a vectorised complex128 one
(``wp_np``) used by the ODE integrator where speed matters more than digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from mpmath import mp

from .errors import DegenerateLattice, PoleProximity

DEFAULT_PRECISION = 50
POLE_RADIUS = 1e-12

KINDS = ("wp", "wp_prime", "zeta", "sigma", "sigma1", "sigma2", "sigma3", "theta1")


@dataclass(frozen=True)
class ExactRoots:
    """Three distinct rational roots ``e1, e2, e3`` with ``e1 + e2 + e3 == 0``."""

    e1: Fraction
    e2: Fraction
    e3: Fraction

    def __post_init__(self):
        for name in ("e1", "e2", "e3"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.e1 + self.e2 + self.e3 != 0:
            raise DegenerateLattice("roots must sum to zero")
        if len({self.e1, self.e2, self.e3}) < 3:
            raise DegenerateLattice("roots must be pairwise distinct")

    @classmethod
    def parse(cls, text: str) -> "ExactRoots":
        parts = [Fraction(p.strip()) for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError("expected three comma-separated roots")
        return cls(*parts)

    @property
    def e(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.e1, self.e2, self.e3)

    @property
    def g2(self) -> Fraction:
        e1, e2, e3 = self.e
        return -4 * (e1 * e2 + e2 * e3 + e3 * e1)

    @property
    def g3(self) -> Fraction:
        e1, e2, e3 = self.e
        return 4 * e1 * e2 * e3


@dataclass(frozen=True)
class Lattice:
    omega1: mpmath.mpc
    omega3: mpmath.mpc
    tau: mpmath.mpc
    p: mpmath.mpc
    e1: mpmath.mpc
    e2: mpmath.mpc
    e3: mpmath.mpc
    g2: mpmath.mpc
    g3: mpmath.mpc
    eta1: mpmath.mpc
    eta3: mpmath.mpc
    precision: int = DEFAULT_PRECISION
    roots: ExactRoots | None = None
    # theta constants cached at construction
    _th1d1: mpmath.mpc = field(default=None, repr=False, compare=False)

    @property
    def omega2(self):
        with mp.workdps(self.precision + 5):
            return -self.omega1 - self.omega3

    @property
    def eta2(self):
        with mp.workdps(self.precision + 5):
            return -self.eta1 - self.eta3

    @property
    def q(self):
        """Jacobi nome ``exp(i*pi*tau)`` as used by mpmath.jtheta."""
        with mp.workdps(self.precision):
            return mpmath.exp(1j * mp.pi * self.tau)

    @property
    def e(self):
        return (self.e1, self.e2, self.e3)

    def half_period(self, i: int):
        return (0, self.omega1, self.omega2, self.omega3)[i]

    def eta(self, i: int):
        return (0, self.eta1, self.eta2, self.eta3)[i]

    @property
    def tol(self) -> float:
        return 10.0 ** (-self.precision + 4)

    def is_rectangular(self, tol: float = 1e-20) -> bool:
        return abs(mpmath.im(self.omega1)) < tol and abs(mpmath.re(self.omega3)) < tol

    def reduce(self, x):
        """Split ``x = y + 2 m omega1 + 2 n omega3`` with ``y`` in the centred cell."""
        with mp.workdps(self.precision):
            x = mpmath.mpc(x)
            w1, w3 = 2 * self.omega1, 2 * self.omega3
            det = mpmath.im(mpmath.conj(w1) * w3)
            a = mpmath.im(mpmath.conj(x) * w3) / det
            b = -mpmath.im(mpmath.conj(x) * w1) / det
            m, n = int(mpmath.nint(a)), int(mpmath.nint(b))
            return x - m * w1 - n * w3, m, n

    def distance_to_lattice(self, x) -> float:
        y, _, _ = self.reduce(x)
        return float(abs(y))

    def to_json(self) -> dict:
        def c(v):
            return {"re": mpmath.nstr(mpmath.re(v), 20), "im": mpmath.nstr(mpmath.im(v), 20)}

        return {
            "omega1": c(self.omega1),
            "omega3": c(self.omega3),
            "e": [c(v) for v in self.e],
            "g2": c(self.g2),
            "g3": c(self.g3),
            "eta": [c(self.eta1), c(self.eta3)],
            "precision": self.precision,
        }


def _theta_derivs(v, q):
    return [mpmath.jtheta(1, v, q, k) for k in range(4)]


def lattice_from_periods(omega1, omega3, precision: int = DEFAULT_PRECISION,
                         roots: ExactRoots | None = None) -> Lattice:
    """Build the lattice with half-periods ``omega1`` and ``omega3``."""
    with mp.workdps(precision + 10):
        w1, w3 = mpmath.mpc(omega1), mpmath.mpc(omega3)
        if w1 == 0 or w3 == 0:
            raise DegenerateLattice("half-periods must be nonzero")
        tau = w3 / w1
        if mpmath.im(tau) <= 0:
            raise DegenerateLattice("Im(omega3/omega1) must be positive")
        p = mpmath.exp(2j * mp.pi * tau)
        if abs(p) >= 1 - 1e-3:
            raise DegenerateLattice(f"nome too close to the unit circle: |p|={float(abs(p)):.6g}")
        q = mpmath.exp(1j * mp.pi * tau)
        th1d1 = mpmath.jtheta(1, 0, q, 1)
        th1d3 = mpmath.jtheta(1, 0, q, 3)
        eta1 = -(mp.pi ** 2) * th1d3 / (12 * w1 * th1d1)
        eta3 = (eta1 * w3 - 1j * mp.pi / 2) / w1
        partial = Lattice(w1, w3, tau, p, 0, 0, 0, 0, 0, eta1, eta3,
                          precision=precision + 10, roots=roots, _th1d1=th1d1)
        e1 = _wp_raw(w1, partial)
        e3 = _wp_raw(w3, partial)
        e2 = -e1 - e3
        g2 = -4 * (e1 * e2 + e2 * e3 + e3 * e1)
        g3 = 4 * e1 * e2 * e3
        if roots is not None:
            e1, e2, e3 = (mpmath.mpc(mpmath.mpf(r.numerator) / r.denominator) for r in roots.e)
            g2 = mpmath.mpc(mpmath.mpf(roots.g2.numerator) / roots.g2.denominator)
            g3 = mpmath.mpc(mpmath.mpf(roots.g3.numerator) / roots.g3.denominator)
        return Lattice(w1, w3, tau, p, e1, e2, e3, g2, g3, eta1, eta3,
                       precision=precision, roots=roots, _th1d1=th1d1)


def lattice_from_roots(r: ExactRoots, precision: int = DEFAULT_PRECISION) -> Lattice:
    """Periods for the cubic ``4 z^3 - g2 z - g3`` with the given rational roots.

    Root ``e1`` is attached to ``omega1`` and ``e3`` to ``omega3``; the
    remaining half-period ``-omega1 - omega3`` carries ``e2``.  Rational
    roots are real, so the lattice is rectangular up to the choice of basis.
    """
    if not isinstance(r, ExactRoots):
        r = ExactRoots(*r)
    with mp.workdps(precision + 10):
        a, b, c = sorted((mpmath.mpf(x.numerator) / x.denominator for x in r.e), reverse=True)
        w_real = mp.pi / (2 * mpmath.agm(mpmath.sqrt(a - c), mpmath.sqrt(a - b)))
        w_imag = 1j * mp.pi / (2 * mpmath.agm(mpmath.sqrt(a - c), mpmath.sqrt(b - c)))
        by_value = {a: w_real, c: w_imag, b: w_real + w_imag}
        val = [mpmath.mpf(x.numerator) / x.denominator for x in r.e]
        w1 = by_value[val[0]]
        w3 = by_value[val[2]]
        if mpmath.im(w3 / w1) < 0:
            w3 = -w3
    L = lattice_from_periods(w1, w3, precision, roots=r)
    with mp.workdps(precision):
        for i, ei in enumerate(L.e, start=1):
            got = _wp_raw(L.half_period(i), L)
            if abs(got - ei) > L.tol * max(1, abs(ei)):
                raise DegenerateLattice(f"period inversion failed for e{i}")
    return L


def _check_pole(x, L: Lattice, kind: str):
    if L.distance_to_lattice(x) < POLE_RADIUS:
        raise PoleProximity(f"{kind} evaluated within {POLE_RADIUS} of a lattice point")


def _log_theta_derivs(x, L: Lattice):
    c = mp.pi / (2 * L.omega1)
    th = _theta_derivs(c * x, L.q)
    l1 = th[1] / th[0]
    l2 = th[2] / th[0]
    l3 = th[3] / th[0]
    return c, l1, l2 - l1 ** 2, l3 - 3 * l1 * l2 + 2 * l1 ** 3


def _wp_raw(x, L: Lattice):
    c, _, d2, _ = _log_theta_derivs(x, L)
    return -L.eta1 / L.omega1 - c ** 2 * d2


def _sigma_raw(x, L: Lattice):
    c = mp.pi / (2 * L.omega1)
    th1d1 = L._th1d1 if L._th1d1 is not None else mpmath.jtheta(1, 0, L.q, 1)
    return mpmath.exp(L.eta1 * x ** 2 / (2 * L.omega1)) * mpmath.jtheta(1, c * x, L.q) / (c * th1d1)


def wp(x, L: Lattice):
    return eval_elliptic("wp", x, L)


def wp_prime(x, L: Lattice):
    return eval_elliptic("wp_prime", x, L)


def zeta(x, L: Lattice):
    return eval_elliptic("zeta", x, L)


def sigma(x, L: Lattice):
    return eval_elliptic("sigma", x, L)


def eval_elliptic(kind: str, x, L: Lattice):
    """Evaluate one of ``KINDS`` at ``x`` on lattice ``L``."""
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    with mp.workdps(L.precision + 5):
        x = mpmath.mpc(x)
        if kind in ("wp", "wp_prime", "zeta"):
            _check_pole(x, L, kind)
            y, m, n = L.reduce(x)
            c, l1, d2, d3 = _log_theta_derivs(y, L)
            if kind == "wp":
                out = -L.eta1 / L.omega1 - c ** 2 * d2
            elif kind == "wp_prime":
                out = -(c ** 3) * d3
            else:
                out = L.eta1 * y / L.omega1 + c * l1 + 2 * m * L.eta1 + 2 * n * L.eta3
        elif kind == "sigma":
            out = _sigma_raw(x, L)
        elif kind == "theta1":
            out = mpmath.jtheta(1, mp.pi * x, L.q)
        else:
            i = int(kind[-1])
            wi = L.half_period(i)
            out = mpmath.exp(-L.eta(i) * x) * _sigma_raw(x + wi, L) / _sigma_raw(wi, L)
        return out


# ---------------------------------------------------------------------------
# complex128 fast path


@dataclass(frozen=True)
class _NumpyLattice:
    w1: complex
    w3: complex
    q: complex
    eta1: float
    nterms: int


def numpy_lattice(L: Lattice) -> _NumpyLattice:
    tau = complex(L.tau)
    nterms = max(6, int(math.ceil(math.sqrt(45.0 / (math.pi * tau.imag)))) + 4)
    return _NumpyLattice(complex(L.omega1), complex(L.omega3), complex(L.q), complex(L.eta1), nterms)


def wp_np(x, NL: _NumpyLattice, derivative: bool = False):
    """Vectorised ``wp`` (or ``wp'``) in double precision."""
    x = np.asarray(x, dtype=complex)
    w1, w3 = 2 * NL.w1, 2 * NL.w3
    det = (np.conj(w1) * w3).imag
    a = (np.conj(x) * w3).imag / det
    b = -(np.conj(x) * w1).imag / det
    y = x - np.rint(a) * w1 - np.rint(b) * w3
    c = np.pi / (2 * NL.w1)
    v = c * y
    n = np.arange(NL.nterms)
    k = 2 * n + 1
    coef = 2 * (-1.0) ** n * np.exp(1j * np.pi * (NL.w3 / NL.w1) * (n + 0.5) ** 2)
    kv = np.multiply.outer(v, k)
    s, co = np.sin(kv), np.cos(kv)
    t0 = (s * coef).sum(-1)
    t1 = (co * coef * k).sum(-1)
    t2 = -(s * coef * k ** 2).sum(-1)
    l1, l2 = t1 / t0, t2 / t0
    if derivative:
        t3 = -(co * coef * k ** 3).sum(-1)
        l3 = t3 / t0
        return -(c ** 3) * (l3 - 3 * l1 * l2 + 2 * l1 ** 3)
    return -NL.eta1 / NL.w1 - c ** 2 * (l2 - l1 ** 2)
