"""Exact algebra of functions of ``z = wp(x)`` with half-integer powers of ``z - e_i``.

An element is ``sum_mu r_mu(z, E) * prod_i (z - e_i)**(mu_i / 2)`` where each
``mu`` is a triple of bits and ``r_mu`` is a rational function whose
denominator involves ``z`` only.  Multiplying two half powers of the same
factor produces an integer power, which is folded back into ``r``.  The
derivative ``d/dx`` acts through ``dz/dx = wp'(x) = 2 prod_i (z - e_i)**(1/2)``,
so it flips every bit of ``mu``.

Scalars are rationals; the roots ``e_i`` are fixed rationals taken from an
``ExactRoots`` instance and ``E`` is a polynomial indeterminate used by the
spectral computations.

Branch convention: ``(z-e1)**(1/2)`` and ``(z-e2)**(1/2)`` take principal
values, and ``(z-e3)**(1/2)`` is chosen so that the product of the three is
``wp'(x)/2``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import comb

import flint
import mpmath
from mpmath import mp

from .elliptic import ExactRoots, Lattice, eval_elliptic
from .errors import DependentBasis, FieldMismatch, ReductionFailure

CTX = flint.fmpq_mpoly_ctx.get(("z", "E"), "lex")
Z, EVAR = CTX.gens()
ONE_POLY = CTX.constant(1)
ZERO_POLY = CTX.constant(0)

MU0 = (0, 0, 0)
MU1 = (1, 1, 1)


def _q(c) -> flint.fmpq:
    if isinstance(c, flint.fmpq):
        return c
    c = Fraction(c)
    return flint.fmpq(c.numerator, c.denominator)


def to_fraction(c) -> Fraction:
    c = _q(c)
    return Fraction(int(c.p), int(c.q))


class RatFunc:
    """Reduced fraction ``num/den`` of polynomials in (z, E); ``den`` monic in z."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, reduce=True):
        if not isinstance(num, flint.fmpq_mpoly):
            num = CTX.constant(_q(num))
        if den is None:
            den = ONE_POLY
        elif not isinstance(den, flint.fmpq_mpoly):
            den = CTX.constant(_q(den))
        if reduce:
            if num.is_zero():
                den = ONE_POLY
            elif not den.is_one():
                g = num.gcd(den)
                if not g.is_one():
                    num = num / g
                    den = den / g
                lc = den.leading_coefficient()
                if lc != 1:
                    num = num / lc
                    den = den / lc
        self.num = num
        self.den = den

    @classmethod
    def poly(cls, p):
        return cls(p, ONE_POLY, reduce=False)

    def is_zero(self):
        return self.num.is_zero()

    def is_polynomial(self):
        return self.den.is_one()

    def is_constant(self):
        return self.den.is_one() and self.num.is_constant()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("not a constant")
        if self.num.is_zero():
            return Fraction(0)
        return to_fraction(self.num.coeffs()[0])

    def __add__(self, other):
        if not isinstance(other, RatFunc):
            other = RatFunc(other)
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, reduce=False)

    def __sub__(self, other):
        if not isinstance(other, RatFunc):
            other = RatFunc(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, RatFunc):
            c = _q(other)
            if c == 0:
                return RatFunc(ZERO_POLY, reduce=False)
            return RatFunc(self.num * c, self.den, reduce=False)
        if self.num.is_zero() or other.num.is_zero():
            return RatFunc(ZERO_POLY, reduce=False)
        if self.den.is_one() and other.den.is_one():
            return RatFunc(self.num * other.num, ONE_POLY, reduce=False)
        g1 = self.num.gcd(other.den)
        g2 = other.num.gcd(self.den)
        num = (self.num / g1) * (other.num / g2)
        den = (self.den / g2) * (other.den / g1)
        return RatFunc(num, den)

    __rmul__ = __mul__

    def inverse(self):
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other):
        if not isinstance(other, RatFunc):
            other = RatFunc(other)
        return self * other.inverse()

    def __eq__(self, other):
        if not isinstance(other, RatFunc):
            other = RatFunc(other)
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((str(self.num), str(self.den)))

    def dz(self):
        """Partial derivative in z."""
        n, d = self.num, self.den
        if d.is_one():
            return RatFunc(n.derivative("z"), ONE_POLY, reduce=False)
        return RatFunc(n.derivative("z") * d - n * d.derivative("z"), d * d)

    def degree_key(self):
        return (self.num.degrees()[0] + self.den.degrees()[0], len(self.num.coeffs()) if not self.num.is_zero() else 0)

    def evaluate(self, z, E=0):
        return _poly_eval(self.num, z, E) / _poly_eval(self.den, z, E)

    def __repr__(self):
        return f"RatFunc({format_poly(self.num)!r}, {format_poly(self.den)!r})"


def _poly_eval(p, z, E):
    total = 0
    for (a, b), c in zip(p.monoms(), p.coeffs()):
        total += (mpmath.mpf(int(c.p)) / int(c.q)) * z ** int(a) * E ** int(b)
    return total


# ---------------------------------------------------------------------------
# polynomial text format


def format_poly(p) -> str:
    if p.is_zero():
        return "0"
    out = []
    for (a, b), c in zip(p.monoms(), p.coeffs()):
        mon = []
        if a:
            mon.append("z" if a == 1 else f"z^{a}")
        if b:
            mon.append("E" if b == 1 else f"E^{b}")
        sign = "-" if c < 0 else "+"
        mag = -c if c < 0 else c
        if not mon:
            body = str(mag)
        elif mag == 1:
            body = "*".join(mon)
        else:
            body = str(mag) + "*" + "*".join(mon)
        out.append((sign, body))
    text = ("-" if out[0][0] == "-" else "") + out[0][1]
    for sign, body in out[1:]:
        text += f" {sign} {body}"
    return text


_TERM_RE = re.compile(r"^(?P<coef>\d+(?:/\d+)?)?\*?(?P<mons>(?:[zE](?:\^\d+)?\*?)*)$")


def parse_poly(text: str):
    text = text.replace(" ", "")
    if text in ("", "0"):
        return ZERO_POLY
    terms = re.findall(r"[+-]?[^+-]+", text)
    d = {}
    for t in terms:
        sign = -1 if t.startswith("-") else 1
        t = t.lstrip("+-")
        m = _TERM_RE.match(t)
        if not m:
            raise ValueError(f"cannot parse polynomial term {t!r}")
        coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        a = b = 0
        for var, exp in re.findall(r"([zE])(?:\^(\d+))?", m.group("mons")):
            e = int(exp) if exp else 1
            if var == "z":
                a += e
            else:
                b += e
        key = (a, b)
        d[key] = d.get(key, 0) + sign * coef
    return CTX.from_dict({k: _q(v) for k, v in d.items() if v != 0}) if any(d.values()) else ZERO_POLY


# ---------------------------------------------------------------------------
# half-power elements


class HalfPowerElement:
    """Element of the algebra; ``terms`` maps a bit triple to a nonzero RatFunc."""

    __slots__ = ("roots", "terms")

    def __init__(self, roots: ExactRoots, terms=None):
        self.roots = roots
        self.terms = {mu: r for mu, r in (terms or {}).items() if not r.is_zero()}

    # constructors
    @classmethod
    def const(cls, roots, c):
        return cls(roots, {MU0: RatFunc(c)})

    @classmethod
    def zvar(cls, roots):
        return cls(roots, {MU0: RatFunc.poly(Z)})

    @classmethod
    def evar(cls, roots):
        return cls(roots, {MU0: RatFunc.poly(EVAR)})

    @classmethod
    def rational(cls, roots, r, mu=MU0):
        if not isinstance(r, RatFunc):
            r = RatFunc(r)
        return cls(roots, {tuple(mu): r})

    @classmethod
    def wp_prime(cls, roots):
        return cls(roots, {MU1: RatFunc(2)})

    @classmethod
    def wp_shift(cls, roots, i: int):
        """``wp(x + omega_i)`` via ``e_i + (e_i-e_j)(e_i-e_k)/(z-e_i)``."""
        if i == 0:
            return cls.zvar(roots)
        e = roots.e
        ei = e[i - 1]
        ej, ek = [e[k] for k in range(3) if k != i - 1]
        r = RatFunc(CTX.constant(_q(ei)) * (Z - _q(ei)) + _q((ei - ej) * (ei - ek)), Z - _q(ei))
        return cls(roots, {MU0: r})

    @classmethod
    def half_power(cls, roots, alpha):
        """``prod_{i=1..3} (z - e_i)**(alpha_i / 2)`` for integer ``alpha``."""
        num, den = ONE_POLY, ONE_POLY
        mu = []
        for a, ei in zip(alpha, roots.e):
            a = int(a)
            mu.append(a % 2)
            k = (a - (a % 2)) // 2
            f = Z - _q(ei)
            if k > 0:
                num = num * f ** k
            elif k < 0:
                den = den * f ** (-k)
        return cls(roots, {tuple(mu): RatFunc(num, den)})

    def _check(self, other):
        if isinstance(other, HalfPowerElement):
            if other.roots != self.roots:
                raise FieldMismatch("elements built over different roots")
            return other
        return HalfPowerElement.const(self.roots, other)

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        other = self._check(other)
        return self.terms.keys() == other.terms.keys() and all(self.terms[k] == other.terms[k] for k in self.terms)

    def __hash__(self):
        return hash(tuple(sorted((k, hash(v)) for k, v in self.terms.items())))

    def __add__(self, other):
        other = self._check(other)
        out = dict(self.terms)
        for mu, r in other.terms.items():
            out[mu] = out[mu] + r if mu in out else r
        return HalfPowerElement(self.roots, out)

    __radd__ = __add__

    def __neg__(self):
        return HalfPowerElement(self.roots, {mu: -r for mu, r in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        if not isinstance(other, HalfPowerElement):
            return HalfPowerElement(self.roots, {mu: r * other for mu, r in self.terms.items()})
        other = self._check(other)
        out = {}
        for m1, r1 in self.terms.items():
            for m2, r2 in other.terms.items():
                mu, carry = _mu_product(m1, m2, self.roots)
                r = r1 * r2
                if carry is not None:
                    r = r * carry
                out[mu] = out[mu] + r if mu in out else r
        return HalfPowerElement(self.roots, out)

    __rmul__ = __mul__

    def ddx(self):
        return hp_ddx(self)

    def mu_classes(self):
        return set(self.terms)

    def is_homogeneous(self):
        return len(self.terms) <= 1

    def coefficient(self, mu=MU0) -> RatFunc:
        return self.terms.get(tuple(mu), RatFunc(ZERO_POLY, reduce=False))

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mu in sorted(self.terms):
            r = self.terms[mu]
            parts.append("{%s}(%s)/(%s)" % ("".join(map(str, mu)), format_poly(r.num), format_poly(r.den)))
        return " + ".join(parts)

    @classmethod
    def from_text(cls, roots, text: str):
        text = text.strip()
        if text == "0":
            return cls(roots)
        terms = {}
        for bits, num, den in re.findall(r"\{([01]{3})\}\(([^()]*)\)/\(([^()]*)\)", text):
            terms[tuple(int(b) for b in bits)] = RatFunc(parse_poly(num), parse_poly(den))
        return cls(roots, terms)

    def __repr__(self):
        return f"HalfPowerElement({self.to_text()})"


_CARRY_CACHE = {}


def _mu_product(m1, m2, roots):
    key = (m1, m2, roots)
    hit = _CARRY_CACHE.get(key)
    if hit is None:
        mu = tuple((a + b) % 2 for a, b in zip(m1, m2))
        carry = None
        p = ONE_POLY
        for a, b, ei in zip(m1, m2, roots.e):
            if a and b:
                p = p * (Z - _q(ei))
        if not p.is_one():
            carry = RatFunc.poly(p)
        hit = _CARRY_CACHE[key] = (mu, carry)
    return hit


def hp_ddx(f: HalfPowerElement) -> HalfPowerElement:
    """Exact ``d/dx`` using ``dz/dx = 2 prod (z - e_i)**(1/2)``."""
    out = {}
    e = [Z - _q(ei) for ei in f.roots.e]
    for mu, r in f.terms.items():
        new_mu = tuple(1 - b for b in mu)
        on = [i for i in range(3) if mu[i]]
        full = ONE_POLY
        for i in on:
            full = full * e[i]
        term = r.dz() * RatFunc.poly(2 * full)
        if on:
            s = ZERO_POLY
            for i in on:
                prod = ONE_POLY
                for j in on:
                    if j != i:
                        prod = prod * e[j]
                s = s + prod
            term = term + r * RatFunc.poly(s)
        out[new_mu] = out[new_mu] + term if new_mu in out else term
    return HalfPowerElement(f.roots, out)


def _sqrt_factors(z, L: Lattice, wpp):
    e1, e2, e3 = L.e
    s1 = mpmath.sqrt(z - e1)
    s2 = mpmath.sqrt(z - e2)
    s3 = (wpp / 2) / (s1 * s2)
    return (s1, s2, s3)


def hp_eval(f: HalfPowerElement, x, L: Lattice, branch=(1, 1, 1), E=0):
    """Numeric value of ``f`` at ``x``; ``branch`` multiplies each square root by a sign."""
    with mp.workdps(L.precision + 5):
        z = eval_elliptic("wp", x, L)
        needs_sqrt = any(any(mu) for mu in f.terms)
        if needs_sqrt:
            wpp = eval_elliptic("wp_prime", x, L)
            roots = [s * b for s, b in zip(_sqrt_factors(z, L, wpp), branch)]
        total = mpmath.mpc(0)
        for mu, r in f.terms.items():
            v = r.evaluate(z, E)
            for i in range(3):
                if mu[i]:
                    v *= roots[i]
            total += v
        return total


def hp_eval_z(f: HalfPowerElement, z, E=0):
    """Value of an element with only the ``mu = 0`` class at ``wp(x) = z``."""
    if any(any(mu) for mu in f.terms):
        raise ValueError("element carries half powers; use hp_eval")
    r = f.terms.get(MU0)
    return 0 if r is None else r.evaluate(z, E)


# ---------------------------------------------------------------------------
# differential operators


class DiffOp:
    """``sum_k coeffs[k] * (d/dx)**k`` with HalfPowerElement coefficients."""

    __slots__ = ("roots", "coeffs")

    def __init__(self, roots: ExactRoots, coeffs):
        coeffs = [c if isinstance(c, HalfPowerElement) else HalfPowerElement.const(roots, c) for c in coeffs]
        while coeffs and coeffs[-1].is_zero():
            coeffs.pop()
        for c in coeffs:
            if c.roots != roots:
                raise FieldMismatch("coefficient built over different roots")
        self.roots = roots
        self.coeffs = coeffs

    @classmethod
    def d(cls, roots, k=1):
        return cls(roots, [0] * k + [1])

    @classmethod
    def mult(cls, f: HalfPowerElement):
        return cls(f.roots, [f])

    @classmethod
    def zero(cls, roots):
        return cls(roots, [])

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self):
        return not self.coeffs

    def is_monic(self):
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def coeff(self, k) -> HalfPowerElement:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return HalfPowerElement(self.roots)

    def _check(self, other):
        if isinstance(other, DiffOp):
            if other.roots != self.roots:
                raise FieldMismatch("operators built over different roots")
            return other
        if isinstance(other, HalfPowerElement):
            return DiffOp.mult(other)
        return DiffOp(self.roots, [other])

    def __add__(self, other):
        other = self._check(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return DiffOp(self.roots, [self.coeff(k) + other.coeff(k) for k in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return DiffOp(self.roots, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        if isinstance(other, DiffOp):
            return op_compose(self, other)
        if isinstance(other, HalfPowerElement):
            return op_compose(self, DiffOp.mult(other))
        return DiffOp(self.roots, [c * other for c in self.coeffs])

    def __rmul__(self, other):
        if isinstance(other, HalfPowerElement):
            return op_compose(DiffOp.mult(other), self)
        return DiffOp(self.roots, [c * other for c in self.coeffs])

    def __matmul__(self, other):
        return op_compose(self, other)

    def __eq__(self, other):
        other = self._check(other)
        return len(self.coeffs) == len(other.coeffs) and all(a == b for a, b in zip(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash(tuple(hash(c) for c in self.coeffs))

    def apply(self, f):
        return op_apply(self, f)

    def to_text(self) -> str:
        if not self.coeffs:
            return "0"
        lines = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if not c.is_zero():
                lines.append(f"D^{k}: {c.to_text()}")
        return "\n".join(lines)

    @classmethod
    def from_text(cls, roots, text: str):
        text = text.strip()
        if text == "0":
            return cls.zero(roots)
        coeffs = {}
        for line in text.splitlines():
            head, body = line.split(":", 1)
            coeffs[int(head.strip()[2:])] = HalfPowerElement.from_text(roots, body)
        n = max(coeffs) + 1
        return cls(roots, [coeffs.get(k, HalfPowerElement(roots)) for k in range(n)])

    def __repr__(self):
        return f"DiffOp(order={self.order})"


def derivatives(f: HalfPowerElement, n: int):
    out = [f]
    for _ in range(n):
        out.append(hp_ddx(out[-1]))
    return out


def op_compose(P: DiffOp, Q: DiffOp) -> DiffOp:
    """Leibniz expansion of ``P o Q``."""
    if P.roots != Q.roots:
        raise FieldMismatch("operators built over different roots")
    if P.is_zero() or Q.is_zero():
        return DiffOp.zero(P.roots)
    m = P.order
    qders = [derivatives(q, m) if not q.is_zero() else None for q in Q.coeffs]
    out = [HalfPowerElement(P.roots) for _ in range(P.order + Q.order + 1)]
    for i, p in enumerate(P.coeffs):
        if p.is_zero():
            continue
        for j, ders in enumerate(qders):
            if ders is None:
                continue
            for k in range(i + 1):
                qk = ders[k]
                if qk.is_zero():
                    continue
                out[i - k + j] = out[i - k + j] + p * (qk * comb(i, k))
    return DiffOp(P.roots, out)


def op_apply(P: DiffOp, f: HalfPowerElement) -> HalfPowerElement:
    if f.roots != P.roots:
        raise FieldMismatch("element and operator built over different roots")
    ders = derivatives(f, max(P.order, 0))
    out = HalfPowerElement(P.roots)
    for p, fd in zip(P.coeffs, ders):
        if not p.is_zero():
            out = out + p * fd
    return out


def op_commutator(P: DiffOp, Q: DiffOp) -> DiffOp:
    return op_compose(P, Q) - op_compose(Q, P)


def op_power(P: DiffOp, n: int) -> DiffOp:
    out = DiffOp(P.roots, [1])
    for _ in range(n):
        out = op_compose(out, P)
    return out


def poly_of_op(coeffs, H: DiffOp) -> DiffOp:
    """``sum_k coeffs[k] * H**k`` by Horner's rule; ``coeffs`` ascending rationals."""
    out = DiffOp.zero(H.roots)
    for c in reversed(list(coeffs)):
        out = op_compose(out, H) + DiffOp(H.roots, [HalfPowerElement.const(H.roots, c)])
    return out


# ---------------------------------------------------------------------------
# annihilator


def _solve_ratfunc(M, rhs):
    """Gaussian elimination over rational functions; pivot = lowest-degree entry."""
    n = len(M)
    A = [list(row) + [b] for row, b in zip(M, rhs)]
    for col in range(n):
        cands = [r for r in range(col, n) if not A[r][col].is_zero()]
        if not cands:
            raise DependentBasis("Wronskian vanishes identically")
        piv = min(cands, key=lambda r: A[r][col].degree_key())
        A[col], A[piv] = A[piv], A[col]
        inv = A[col][col].inverse()
        A[col] = [a * inv for a in A[col]]
        for r in range(n):
            if r != col and not A[r][col].is_zero():
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return [A[r][n] for r in range(n)]


def annihilator(basis) -> DiffOp:
    """Monic operator of order ``len(basis)`` killing every element of ``basis``.

    The basis elements must share a single half-power class.
    """
    basis = list(basis)
    if not basis:
        raise DependentBasis("empty basis")
    roots = basis[0].roots
    classes = {mu for f in basis for mu in f.terms}
    if any(f.is_zero() for f in basis):
        raise DependentBasis("zero element in basis")
    if len(classes) != 1:
        raise ValueError("annihilator needs basis elements of one common half-power class")
    n = len(basis)
    ders = [derivatives(f, n) for f in basis]
    # f^{(j)} lives in class m + j*(1,1,1); write it as phi * monomial_j
    m = next(iter(classes))
    mono_class = [tuple((b + j) % 2 for b in m) for j in range(n + 1)]
    phi = [[d[j].coefficient(mono_class[j]) for j in range(n + 1)] for d in ders]
    # c_i * f^{(n-i)} with c_i = gamma_i * w**(i%2); w = prod (z-e)^(1/2)
    carry = []
    for i in range(1, n + 1):
        wi = MU1 if i % 2 else MU0
        _, c = _mu_product(wi, mono_class[n - i], roots)
        carry.append(c if c is not None else RatFunc(1))
    M = [[phi[k][n - i] for i in range(1, n + 1)] for k in range(n)]
    rhs = [-phi[k][n] for k in range(n)]
    y = _solve_ratfunc(M, rhs)
    coeffs = [None] * (n + 1)
    coeffs[n] = HalfPowerElement.const(roots, 1)
    for i in range(1, n + 1):
        gamma = y[i - 1] / carry[i - 1]
        coeffs[n - i] = HalfPowerElement(roots, {MU1 if i % 2 else MU0: gamma})
    L = DiffOp(roots, coeffs)
    for f in basis:
        if not op_apply(L, f).is_zero():
            raise DependentBasis("annihilator check failed")
    return L


# ---------------------------------------------------------------------------
# reduction of A against powers of H


def op_right_divide(P: DiffOp, H: DiffOp):
    """``P = S o H + R`` with ``order(R) <= 1``; ``H`` monic up to sign in order 2."""
    if H.order != 2:
        raise ReductionFailure("divisor must have order 2")
    lead = H.coeffs[2]
    if lead == -1:
        sgn = -1
    elif lead == 1:
        sgn = 1
    else:
        raise ReductionFailure("divisor leading coefficient must be +-1")
    R = P
    S = DiffOp.zero(P.roots)
    while R.order >= 2:
        m = R.order
        t = DiffOp(P.roots, [0] * (m - 2) + [R.coeffs[m] * sgn])
        S = S + t
        R = R - op_compose(t, H)
        if R.order >= m:
            raise ReductionFailure("leading term did not cancel")
    return S, R


def op_right_reduce(A: DiffOp, H: DiffOp, g: int):
    """Decompose ``A = (-1)^g sum_j [(a_j d/dx - a_j'/2) + c_j] H^(g-j)``.

    Returns ``[(a_j, b_j, c_j)]`` for ``j = 0..g`` where ``b_j = -a_j'/2 + c_j``.
    """
    if A.order != 2 * g + 1:
        raise ReductionFailure(f"order {A.order} is not 2g+1 for g={g}")
    if H.order != 2 or H.coeffs[2] != -1:
        raise ReductionFailure("H must be -(d/dx)^2 + potential")
    rems = []
    cur = A
    for _ in range(g):
        cur, R = op_right_divide(cur, H)
        rems.append(R)
    rems.append(cur)
    rems.reverse()  # rems[j] multiplies H^(g-j)
    sign = (-1) ** g
    out = []
    for R in rems:
        if R.order > 1:
            raise ReductionFailure("remainder of order > 1")
        a = R.coeff(1) * sign
        b = R.coeff(0) * sign
        cj = b + hp_ddx(a) * Fraction(1, 2)
        if cj.is_zero():
            cval = Fraction(0)
        else:
            r = cj.terms.get(MU0)
            if set(cj.terms) != {MU0} or not r.is_constant():
                raise ReductionFailure("c_j is not a constant")
            cval = r.constant_value()
        out.append((a, b, cval))
    if out[0][0] != 1:
        raise ReductionFailure("a_0 != 1")
    # re-expansion must reproduce A
    rebuilt = DiffOp.zero(A.roots)
    for a, b, _ in out:
        rebuilt = op_compose(rebuilt, H) + DiffOp(A.roots, [b * sign, a * sign])
    if not (rebuilt - A).is_zero():
        raise ReductionFailure("re-expansion does not reproduce A")
    return out
