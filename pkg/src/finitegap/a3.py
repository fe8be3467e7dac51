"""Three-particle elliptic operators over the free algebra of pair symbols.

Coefficients are polynomials in ``p_ij = wp(x_i - x_j)`` and
``q_ij = wp'(x_i - x_j)`` for the pairs 12, 13, 23, with

    d_i p_ij = q_ij,  d_j p_ij = -q_ij,  q_ij' = 6 p_ij^2 - g2/2,
    q_ij^2 = 4 p_ij^3 - g2 p_ij - g3,

and ``p_ji = p_ij``, ``q_ji = -q_ij``.  The three-term addition relations
between different pairs are not imposed, so a commutator that vanishes only
modulo them is checked numerically at sample points.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction

import flint
import mpmath
from mpmath import mp

from .elliptic import ExactRoots, Lattice, eval_elliptic
from .errors import SamplePole

PAIRS = ((0, 1), (0, 2), (1, 2))
NAMES = ("p12", "p13", "p23", "q12", "q13", "q23")
CTX = flint.fmpq_mpoly_ctx.get(NAMES, "lex")
_GENS = CTX.gens()
_ONE = CTX.from_dict({}) + 1
_ZERO = _ONE * 0


def _q(v):
    v = Fraction(v)
    return flint.fmpq(v.numerator, v.denominator)


def p(i: int, j: int):
    """Symbol ``wp(x_i - x_j)`` for 1-based indices."""
    a, b = sorted((i - 1, j - 1))
    return _GENS[PAIRS.index((a, b))]


def dp(i: int, j: int):
    """Symbol ``wp'(x_i - x_j)`` for 1-based indices."""
    a, b = sorted((i - 1, j - 1))
    sign = 1 if (i - 1, j - 1) == (a, b) else -1
    return sign * _GENS[3 + PAIRS.index((a, b))]


class PairAlgebra:
    """Reduction and differentiation rules for a fixed ``(g2, g3)``."""

    def __init__(self, g2, g3):
        self.g2, self.g3 = _q(g2), _q(g3)
        self._cubic = {}

    def cubic(self, k: int):
        """``(4p^3 - g2 p - g3)`` for pair ``k``."""
        if k not in self._cubic:
            x = _GENS[k]
            self._cubic[k] = 4 * x ** 3 - self.g2 * x - self.g3
        return self._cubic[k]

    def reduce(self, f):
        """Replace ``q^2`` by the cubic in ``p`` until every ``q`` has degree <= 1."""
        if all(max(e[3:]) <= 1 for e in f.monoms()):
            return f
        out = _ZERO
        for exps, c in f.to_dict().items():
            exps = list(exps)
            term = _ONE * c
            for k in range(3):
                e = exps[3 + k]
                if e >= 2:
                    term = term * self.cubic(k) ** (e // 2)
                    exps[3 + k] = e % 2
            out += term * CTX.from_dict({tuple(exps): 1})
        return out

    def d(self, f, m: int):
        """Partial derivative in ``x_{m+1}``."""
        out = _ZERO
        for k, (a, b) in enumerate(PAIRS):
            if m not in (a, b):
                continue
            sign = 1 if m == a else -1
            fp = f.derivative(k)
            if not fp.is_zero():
                out += sign * fp * _GENS[3 + k]
            fq = f.derivative(3 + k)
            if not fq.is_zero():
                out += sign * fq * (6 * _GENS[k] ** 2 - self.g2 / 2)
        return self.reduce(out)

    def d_multi(self, f, alpha):
        for m, k in enumerate(alpha):
            for _ in range(k):
                f = self.d(f, m)
        return f

    def pdd(self, i: int, j: int):
        """``wp''(x_i - x_j)`` expressed through the pair symbol."""
        return 6 * p(i, j) ** 2 - self.g2 / 2


@dataclass
class PairVarOp:
    """``sum_alpha c_alpha(p, q) d^alpha`` with ``alpha`` a triple of derivative orders."""

    alg: PairAlgebra
    terms: dict

    @classmethod
    def zero(cls, alg):
        return cls(alg, {})

    @classmethod
    def scalar(cls, alg, f):
        return cls(alg, {(0, 0, 0): _ONE * f if not hasattr(f, "monoms") else f})

    @classmethod
    def partial(cls, alg, i: int):
        a = [0, 0, 0]
        a[i - 1] = 1
        return cls(alg, {tuple(a): _ONE})

    def _clean(self):
        self.terms = {k: v for k, v in self.terms.items() if not v.is_zero()}
        return self

    def __add__(self, other):
        other = _as_op(self.alg, other)
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, _ZERO) + v
        return PairVarOp(self.alg, t)._clean()

    __radd__ = __add__

    def __neg__(self):
        return PairVarOp(self.alg, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_op(self.alg, other))

    def __rsub__(self, other):
        return _as_op(self.alg, other) - self

    def __mul__(self, other):
        """Composition ``self o other``; a plain scalar multiplies the coefficients."""
        if not isinstance(other, PairVarOp):
            if isinstance(other, (int, Fraction)):
                other = _q(other)
            return PairVarOp(self.alg, {k: v * other for k, v in self.terms.items()})._clean()
        alg = self.alg
        out: dict = {}
        dcache: dict = {}
        for alpha, a in self.terms.items():
            for beta, b in other.terms.items():
                for gamma in itertools.product(*(range(k + 1) for k in alpha)):
                    key = (beta, gamma)
                    if key not in dcache:
                        dcache[key] = alg.d_multi(b, gamma)
                    db = dcache[key]
                    if db.is_zero():
                        continue
                    coef = math.prod(math.comb(x, y) for x, y in zip(alpha, gamma))
                    idx = tuple(x - y + z for x, y, z in zip(alpha, gamma, beta))
                    out[idx] = out.get(idx, _ZERO) + alg.reduce(a * db) * coef
        return PairVarOp(alg, out)._clean()

    def __rmul__(self, other):
        return PairVarOp(self.alg, {k: other * v for k, v in self.terms.items()})._clean()

    def __pow__(self, n: int):
        out = PairVarOp.scalar(self.alg, _ONE)
        for _ in range(n):
            out = out * self
        return out

    @property
    def order(self) -> int:
        return max((sum(k) for k in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, alpha):
        return self.terms.get(tuple(alpha), _ZERO)

    def apply(self, f):
        """Action on a coefficient-algebra element ``f``."""
        out = _ZERO
        for alpha, c in self.terms.items():
            out += c * self.alg.d_multi(f, alpha)
        return self.alg.reduce(out)

    def permute(self, sigma):
        """Relabel ``x_i -> x_sigma(i)`` (``sigma`` maps 1-based indices)."""
        s = {i - 1: sigma[i] - 1 for i in (1, 2, 3)}
        images = []
        for a, b in PAIRS:
            na, nb = s[a], s[b]
            k = PAIRS.index(tuple(sorted((na, nb))))
            images.append((k, 1 if na < nb else -1))
        out = {}
        for alpha, c in self.terms.items():
            beta = [0, 0, 0]
            for m, k in enumerate(alpha):
                beta[s[m]] = k
            nc = _ZERO
            for exps, v in c.to_dict().items():
                new = [0] * 6
                sign = 1
                for k in range(3):
                    kk, sg = images[k]
                    new[kk] += exps[k]
                    new[3 + kk] += exps[3 + k]
                    sign *= sg ** int(exps[3 + k])
                nc += CTX.from_dict({tuple(new): v}) * sign
            out[tuple(beta)] = nc
        return PairVarOp(self.alg, out)._clean()


def _as_op(alg, v) -> PairVarOp:
    if isinstance(v, PairVarOp):
        return v
    return PairVarOp.scalar(alg, _ONE * v if not hasattr(v, "monoms") else v)


def commutator(X: PairVarOp, Y: PairVarOp) -> PairVarOp:
    return X * Y - Y * X


def build_a3_operators(roots: ExactRoots) -> dict:
    """``H, P1, P3, I12, I23, I31`` for the ``l = 1`` three-particle model."""
    alg = PairAlgebra(roots.g2, roots.g3)
    d1, d2, d3 = (PairVarOp.partial(alg, i) for i in (1, 2, 3))
    S = lambda f: PairVarOp.scalar(alg, f)  # noqa: E731
    p12, p13, p23 = p(1, 2), p(1, 3), p(2, 3)
    q12, q13, q23 = dp(1, 2), dp(1, 3), dp(2, 3)
    H = (d1 ** 2 + d2 ** 2 + d3 ** 2) * Fraction(-1, 2) + S(2 * (p12 + p23 + p13))
    P1 = d1 + d2 + d3
    P3 = d1 * d2 * d3 + S(2 * p12) * d3 + S(2 * p23) * d1 + S(2 * p13) * d2
    D13, D23 = d1 - d3, d2 - d3
    I12 = (
        D13 ** 2 * D23 ** 2
        - S(8 * p23) * D13 ** 2
        - S(8 * p13) * D23 ** 2
        + S(4 * (p12 - p13 - p23)) * D13 * D23
        - S(2 * (q12 + q13 + 6 * q23)) * D13
        - S(2 * (-q12 + 6 * q13 + q23)) * D23
        + S(
            -2 * alg.pdd(1, 2) - 6 * alg.pdd(1, 3) - 6 * alg.pdd(2, 3)
            + 4 * (p12 ** 2 + p13 ** 2 + p23 ** 2)
            + 8 * (p12 * p13 + p12 * p23 + 7 * p13 * p23)
        )
    )
    cyc = {1: 2, 2: 3, 3: 1}
    I23 = I12.permute(cyc)
    I31 = I23.permute(cyc)
    return {"H": H, "P1": P1, "P3": P3, "I12": I12, "I23": I23, "I31": I31}


# fixed test family: degree <= 2 in the pair symbols
def probe_functions() -> list:
    s = [p(1, 2), p(1, 3), p(2, 3), dp(1, 2), dp(1, 3), dp(2, 3)]
    fam = [_ONE] + s
    fam += [s[0] * s[1], s[1] * s[2], s[0] * s[2], s[0] ** 2, s[3] * s[4], s[0] * s[5]]
    return fam


def sample_points(L: Lattice, samples: int, seed: int = 0, guard: float = 0.05) -> list:
    rng = random.Random(seed)
    pts = []
    while len(pts) < samples:
        x = [(2 * rng.random() - 1) * L.omega1 + (2 * rng.random() - 1) * L.omega3 for _ in range(3)]
        try:
            _check_point(x, L, guard)
        except SamplePole:
            continue
        pts.append(x)
    return pts


def _check_point(x, L, guard=0.05):
    for a, b in PAIRS:
        if L.distance_to_lattice(x[a] - x[b]) < guard:
            raise SamplePole(f"x{a + 1} - x{b + 1} lies within {guard} of the lattice")


def _values(x, L):
    vals = []
    for a, b in PAIRS:
        vals.append(eval_elliptic("wp", x[a] - x[b], L))
    for a, b in PAIRS:
        vals.append(eval_elliptic("wp_prime", x[a] - x[b], L))
    return vals


def evaluate(f, vals):
    tot = mpmath.mpc(0)
    for exps, c in f.to_dict().items():
        term = mpmath.mpf(int(c.p)) / int(c.q)
        for v, e in zip(vals, exps):
            if e:
                term *= v ** int(e)
        tot += term
    return tot


def commutator_residual(X: PairVarOp, Y: PairVarOp, L: Lattice, samples: int = 50, seed: int = 0,
                        points=None) -> float:
    """Largest ``|[X, Y] f|`` over the test family and sample points.

    Each coefficient function of ``[X, Y]`` is also evaluated, so the residual
    covers the operator itself and not only its action on the family.
    """
    C = commutator(X, Y)
    if C.is_zero():
        return 0.0
    fam = [C.apply(f) for f in probe_functions()]
    coeffs = list(C.terms.values())
    with mp.workdps(L.precision):
        if points is None:
            points = sample_points(L, samples, seed)
        else:
            for x in points:
                _check_point(x, L)
        worst = mpmath.mpf(0)
        for x in points:
            vals = _values([mpmath.mpc(v) for v in x], L)
            for f in fam + coeffs:
                worst = max(worst, abs(evaluate(f, vals)))
        return float(worst)


def residual_report(name_x: str, name_y: str, ops: dict, L: Lattice, samples: int = 50, seed: int = 0) -> dict:
    r = commutator_residual(ops[name_x], ops[name_y], L, samples, seed)
    return {"pair": f"{name_x},{name_y}", "precision": L.precision, "samples": samples, "max_residual": r}
