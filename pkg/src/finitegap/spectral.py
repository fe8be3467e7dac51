"""Finite-gap data of ``H = -(d/dx)^2 + sum_i l_i (l_i + 1) wp(x + omega_i)``.

Everything here is exact over the rationals with fixed rational roots ``e_i``:
the quasi-solvable spaces ``V_alpha``, the Darboux-Crum operators ``L_alpha``,
the odd-order commuting operator ``A`` built by composing four of them, the
doubly periodic solution ``Xi(x, E)`` of the symmetric-square equation, the
spectral polynomial ``Q(E)`` and the monodromy polynomials ``a(E)``, ``c(E)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import flint
import mpmath

from .elliptic import ExactRoots, Lattice
from .errors import (
    AnsatzFailure,
    ClosureFailure,
    ComplexRoots,
    IntertwineFailure,
    NonRectangular,
    NotQuasiSolvable,
    RelationFailure,
)
from .hpalg import (
    CTX,
    MU0,
    EVAR,
    Z,
    DiffOp,
    HalfPowerElement,
    RatFunc,
    _q,
    annihilator,
    hp_ddx,
    op_apply,
    op_commutator,
    op_compose,
    op_right_reduce,
    poly_of_op,
    to_fraction,
)


class CouplingVector(NamedTuple):
    l0: int
    l1: int
    l2: int
    l3: int

    @classmethod
    def of(cls, l) -> "CouplingVector":
        l = tuple(l)
        if len(l) != 4 or any(int(x) != x or x < 0 for x in l):
            raise ValueError("couplings must be non-negative integers")
        return cls(*(int(x) for x in l))

    @property
    def total(self) -> int:
        return sum(self)


class AlphaVector(NamedTuple):
    a0: int
    a1: int
    a2: int
    a3: int

    @property
    def d(self) -> Fraction:
        return -Fraction(sum(self), 2)

    def coupling(self) -> CouplingVector:
        """The coupling for which every entry is ``-l_i`` or ``l_i + 1``."""
        return CouplingVector(*(-a if a <= 0 else a - 1 for a in self))

    def admissible_for(self, l) -> bool:
        return all(a == -li or a == li + 1 for a, li in zip(self, normalize_coupling(l)))


def normalize_coupling(l) -> CouplingVector:
    """``l`` and ``-1 - l`` give the same potential; pick the non-negative one."""
    return CouplingVector(*(x if x >= 0 else -1 - x for x in l))


def potential(l, roots: ExactRoots) -> HalfPowerElement:
    u = HalfPowerElement(roots)
    for i, li in enumerate(l):
        if li * (li + 1):
            u = u + HalfPowerElement.wp_shift(roots, i) * (li * (li + 1))
    return u


def hamiltonian(l, roots: ExactRoots) -> DiffOp:
    return DiffOp(roots, [potential(l, roots), 0, -1])


# ---------------------------------------------------------------------------
# genus


def genus(l) -> int:
    l = CouplingVector.of(l)
    k0, k1, k2, k3 = sorted(l, reverse=True)
    if l.total % 2 == 0:
        if k0 + k3 >= k1 + k2:
            return k0
        return (k0 + k1 + k2 - k3) // 2
    if k0 >= k1 + k2 + k3 + 1:
        return k0
    return (k0 + k1 + k2 + k3 + 1) // 2


# ---------------------------------------------------------------------------
# quasi-solvable spaces and Darboux steps


@dataclass
class QuasiSpace:
    alpha: AlphaVector
    coupling: CouplingVector
    basis: list
    matrix: list  # matrix[m][n]: coefficient of basis[m] in H basis[n]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def charpoly(self) -> flint.fmpq_poly:
        n = self.dim
        M = flint.fmpq_mat(n, n, [_q(x) for row in self.matrix for x in row])
        return M.charpoly()


def quasi_space_basis(alpha, roots: ExactRoots) -> QuasiSpace:
    """Basis ``Phi(z) z^n`` (n = 0..d) of ``V_alpha`` and the matrix of H on it."""
    alpha = AlphaVector(*(int(a) for a in alpha))
    d = alpha.d
    if d.denominator != 1 or d < 0:
        raise NotQuasiSolvable(f"d = {d} is not a non-negative integer for alpha={tuple(alpha)}")
    d = int(d)
    l = alpha.coupling()
    phi = HalfPowerElement.half_power(roots, alpha[1:])
    (mu, rphi), = phi.terms.items()
    basis = [phi * HalfPowerElement.rational(roots, RatFunc.poly(Z ** n)) for n in range(d + 1)]
    H = hamiltonian(l, roots)
    matrix = [[Fraction(0)] * (d + 1) for _ in range(d + 1)]
    for n, v in enumerate(basis):
        w = op_apply(H, v)
        if w.is_zero():
            continue
        if set(w.terms) != {mu}:
            raise ClosureFailure(f"H maps basis element {n} out of the half-power class")
        ratio = w.terms[mu] / rphi
        if not ratio.is_polynomial():
            raise ClosureFailure(f"H(basis[{n}]) / Phi is not a polynomial")
        p = ratio.num
        if p.degrees()[1] > 0 or p.degrees()[0] > d:
            raise ClosureFailure(f"H(basis[{n}]) leaves the span")
        for (a, _), c in zip(p.monoms(), p.coeffs()):
            matrix[a][n] = to_fraction(c)
    return QuasiSpace(alpha, l, basis, matrix)


def darboux_step(alpha, l, roots: ExactRoots, check: bool = True) -> DiffOp:
    """``L_alpha`` with the intertwining ``H^(alpha+d) L = L H^(l)`` verified exactly."""
    alpha = AlphaVector(*(int(a) for a in alpha))
    if not alpha.admissible_for(l):
        raise NotQuasiSolvable(f"alpha={tuple(alpha)} is not admissible for l={tuple(l)}")
    space = quasi_space_basis(alpha, roots)
    L = annihilator(space.basis)
    if check:
        d = int(alpha.d)
        target = normalize_coupling([a + d for a in alpha])
        lhs = op_compose(hamiltonian(target, roots), L)
        rhs = op_compose(L, hamiltonian(l, roots))
        if not (lhs - rhs).is_zero():
            raise IntertwineFailure(f"intertwining fails for alpha={tuple(alpha)}")
    return L


def tilde_alpha(alpha):
    """Selection rule: ``(alpha, d)``, ``(1 - alpha, d)`` or ``None`` for the unit factor."""
    s = Fraction(sum(alpha), 2)
    if s.denominator == 1 and s <= 0:
        return AlphaVector(*alpha)
    if s.denominator == 1 and s >= 2:
        return AlphaVector(*(1 - a for a in alpha))
    return None


def a_factor_alphas(l) -> list:
    """The four alpha subscripts of A, rightmost factor first."""
    l0, l1, l2, l3 = CouplingVector.of(l)
    if (l0 + l1 + l2 + l3) % 2 == 0:
        e0 = Fraction(-l0 + l1 + l2 + l3, 2)
        e1 = Fraction(l0 - l1 + l2 + l3, 2)
        e2 = Fraction(l0 + l1 - l2 + l3, 2)
        e3 = Fraction(l0 + l1 + l2 - l3, 2)
        seq = [
            (-l0, -l1, -l2, -l3),
            (-e0, -e1, e2 + 1, e3 + 1),
            (-l1, l0 + 1, -l3, l2 + 1),
            (-e3, e2 + 1, e1 + 1, -e0),
        ]
    else:
        o0 = Fraction(l0 + l1 + l2 + l3 + 1, 2)
        o1 = Fraction(l0 + l1 - l2 - l3 - 1, 2)
        o2 = Fraction(l0 - l1 + l2 - l3 - 1, 2)
        o3 = Fraction(l0 - l1 - l2 + l3 - 1, 2)
        seq = [
            (l0 + 1, -l1, -l2, -l3),
            (-o0, o1 + 1, -o2, -o3),
            (-l1, -l0, l3 + 1, -l2),
            (o2 + 1, -o3, -o0, -o1),
        ]
    return [tuple(int(a) for a in s) for s in seq]


@dataclass
class AChain:
    """The factors of A and the couplings they intertwine."""

    A: DiffOp
    factors: list  # (alpha as written, alpha used or None, operator or None)
    couplings: list  # coupling before each factor, plus the final one


def build_A_chain(l, roots: ExactRoots, check: bool = True) -> AChain:
    l = CouplingVector.of(l)
    cur = l
    A = DiffOp(roots, [1])
    factors, couplings = [], [cur]
    for written in a_factor_alphas(l):
        used = tilde_alpha(written)
        if used is None:
            factors.append((written, None, None))
            couplings.append(cur)
            continue
        if not used.admissible_for(cur):
            raise IntertwineFailure(
                f"factor alpha={used} is not admissible for intermediate coupling {tuple(cur)}")
        L = darboux_step(used, cur, roots, check=check)
        A = op_compose(L, A)
        cur = normalize_coupling([a + int(used.d) for a in used])
        factors.append((written, used, L))
        couplings.append(cur)
    if cur != l:
        raise IntertwineFailure(f"chain ends at {tuple(cur)}, not {tuple(l)}")
    return AChain(A, factors, couplings)


def build_A(l, roots: ExactRoots, check: bool = True) -> DiffOp:
    """Monic odd-order operator commuting with ``H^(l)``."""
    l = CouplingVector.of(l)
    A = build_A_chain(l, roots, check=check).A
    g = genus(l)
    if A.order != 2 * g + 1 or not A.is_monic():
        raise IntertwineFailure(f"A has order {A.order}, expected monic of order {2 * g + 1}")
    if check and not op_commutator(A, hamiltonian(l, roots)).is_zero():
        raise RelationFailure("[A, H] != 0")
    return A


# ---------------------------------------------------------------------------
# Xi, Q, a, c


def _epoly_to_fmpq_poly(p) -> flint.fmpq_poly:
    """Polynomial in E only (as an mpoly) to a univariate fmpq_poly."""
    coeffs = {}
    for (a, b), c in zip(p.monoms(), p.coeffs()):
        if a:
            raise ValueError("polynomial still depends on z")
        coeffs[b] = c
    if not coeffs:
        return flint.fmpq_poly([])
    return flint.fmpq_poly([coeffs.get(k, 0) for k in range(max(coeffs) + 1)])


def _fmpq_poly_to_epoly(p: flint.fmpq_poly):
    out = CTX.constant(0)
    for k, c in enumerate(p.coeffs()):
        if c != 0:
            out = out + c * EVAR ** k
    return out


@dataclass
class SpectralData:
    l: CouplingVector
    roots: ExactRoots
    g: int
    Xi: HalfPowerElement
    Q: flint.fmpq_poly
    a: flint.fmpq_poly
    c: flint.fmpq_poly
    c0: flint.fmpq_poly
    b: dict  # (i, j) -> fmpq_poly, coefficient of wp(x+omega_i)^(l_i - j)
    a_parts: dict = field(default_factory=dict)  # (i, j) -> coefficient of (d/dx)^(2j) wp(x+omega_i)

    def Xi_coefficients_in_E(self) -> list:
        """``[a_g(x), ..., a_0(x)]``: the coefficient of ``E**k`` as an element in z."""
        r = self.Xi.coefficient(MU0)
        out = [CTX.constant(0) for _ in range(self.g + 1)]
        for (a, b), c in zip(r.num.monoms(), r.num.coeffs()):
            out[b] = out[b] + c * Z ** a
        return [HalfPowerElement.rational(self.roots, RatFunc(p, r.den)) for p in out]

    def xi_value(self, z, E):
        """Numeric ``Xi`` at ``wp(x) = z``."""
        return self.Xi.coefficient(MU0).evaluate(z, E)

    def Q_value(self, E):
        return poly_value(self.Q, E)

    def to_json(self) -> dict:
        return {
            "l": list(self.l),
            "g": self.g,
            "Q": poly_to_strings(self.Q),
            "a": poly_to_strings(self.a),
            "c": poly_to_strings(self.c),
            "Xi": {
                "c0": poly_to_strings(self.c0),
                "b": {f"{i},{j}": poly_to_strings(p) for (i, j), p in sorted(self.b.items())},
            },
        }


def poly_to_strings(p: flint.fmpq_poly) -> list:
    cs = p.coeffs()
    if not cs:
        return ["0/1"]
    return [f"{int(c.p)}/{int(c.q)}" for c in cs]


def poly_value(p: flint.fmpq_poly, E):
    if isinstance(E, (int, Fraction)):
        total = Fraction(0)
        for c in reversed(p.coeffs()):
            total = total * E + Fraction(int(c.p), int(c.q))
        return total
    total = mpmath.mpc(0)
    for c in reversed(p.coeffs()):
        total = total * E + mpmath.mpf(int(c.p)) / int(c.q)
    return total


def _prod_de_parts(f: HalfPowerElement, u: HalfPowerElement, du: HalfPowerElement):
    """``(D^3 - 4u D - 2u') f`` and ``4 D f`` (the E-coefficient)."""
    f1 = hp_ddx(f)
    f3 = hp_ddx(hp_ddx(f1))
    return f3 - u * f1 * 4 - du * f * 2, f1 * 4


def prod_de(Xi: HalfPowerElement, u: HalfPowerElement) -> HalfPowerElement:
    """Apply ``D^3 - 4(u - E) D - 2u'`` with E symbolic."""
    x1 = hp_ddx(Xi)
    x3 = hp_ddx(hp_ddx(x1))
    Eel = HalfPowerElement.evar(Xi.roots)
    return x3 - (u - Eel) * x1 * 4 - hp_ddx(u) * Xi * 2


def _wp_power_poly_basis(l):
    """Ansatz functions: 1 and wp(x+omega_i)^m for m = 1..l_i, with their labels."""
    out = [("c0", None)]
    for i, li in enumerate(l):
        for j in range(li):
            out.append(("b", (i, j)))
    return out


def solve_xi(l, roots: ExactRoots, g: int | None = None):
    """Solve for the coefficient polynomials of Xi with E-degree at most ``g``."""
    l = CouplingVector.of(l)
    if g is None:
        g = genus(l)
    u = potential(l, roots)
    du = hp_ddx(u)
    labels = _wp_power_poly_basis(l)
    funcs = []
    for kind, ij in labels:
        if kind == "c0":
            funcs.append(HalfPowerElement.const(roots, 1))
        else:
            i, j = ij
            funcs.append(_pow(HalfPowerElement.wp_shift(roots, i), l[i] - j))
    parts = [_prod_de_parts(f, u, du) for f in funcs]
    # columns: (label index, E power k); equation image lives in the (1,1,1) class
    cols = [(n, k) for n in range(len(labels)) for k in range(g + 1)]
    images = []
    for n, k in cols:
        p0, p1 = parts[n]
        img = p0 * HalfPowerElement.rational(roots, RatFunc.poly(EVAR ** k)) + \
            p1 * HalfPowerElement.rational(roots, RatFunc.poly(EVAR ** (k + 1)))
        images.append(img)
    classes = set()
    for img in images:
        classes |= set(img.terms)
    rows = {}
    for mu in classes:
        rs = [img.coefficient(mu) for img in images]
        den = CTX.constant(1)
        for r in rs:
            if not r.is_zero():
                den = den * (r.den / r.den.gcd(den))
        for col, r in enumerate(rs):
            if r.is_zero():
                continue
            num = r.num * (den / r.den)
            for mon, c in zip(num.monoms(), num.coeffs()):
                rows.setdefault((mu, mon), {})[col] = c
    ncol = len(cols)
    keys = sorted(rows)
    M = flint.fmpq_mat(len(keys), ncol)
    for r_i, key in enumerate(keys):
        for col, c in rows[key].items():
            M[r_i, col] = c
    basis_vectors = _nullspace_vectors(M, ncol)
    if len(basis_vectors) != 1:
        raise AnsatzFailure(
            f"doubly periodic solution space has dimension {len(basis_vectors)} (expected 1) for l={tuple(l)}")
    vec = basis_vectors[0]
    coeff_polys = {}
    for (n, k), val in zip(cols, vec):
        coeff_polys.setdefault(n, [0] * (g + 1))[k] = val
    polys = {n: flint.fmpq_poly(cs) for n, cs in coeff_polys.items()}
    return labels, funcs, polys


def _pow(f, m):
    out = HalfPowerElement.const(f.roots, 1)
    for _ in range(m):
        out = out * f
    return out


def _nullspace_vectors(M: flint.fmpq_mat, ncol: int) -> list:
    if M.nrows() == 0:
        return [[1 if i == j else 0 for i in range(ncol)] for j in range(ncol)]
    R, rank = M.rref()
    pivots = []
    for r in range(rank):
        for c in range(ncol):
            if R[r, c] != 0:
                pivots.append(c)
                break
    free = [c for c in range(ncol) if c not in pivots]
    out = []
    for f in free:
        v = [flint.fmpq(0)] * ncol
        v[f] = flint.fmpq(1)
        for r, pc in enumerate(pivots):
            v[pc] = -R[r, f]
        out.append(v)
    return out


def _wp_derivative_polys(n: int, roots: ExactRoots) -> list:
    """``(d/dx)^(2j) wp`` as polynomials in ``w = wp`` for j = 0..n-1."""
    g2, g3 = _q(roots.g2), _q(roots.g3)
    P = flint.fmpq_poly([-g3, -g2, 0, 4])
    dP = P.derivative()
    out = [flint.fmpq_poly([0, 1])]
    for _ in range(1, n):
        f = out[-1]
        out.append(f.derivative().derivative() * P + f.derivative() * dP / 2)
    return out


def spectral_data(l, roots: ExactRoots) -> SpectralData:
    l = CouplingVector.of(l)
    g = genus(l)
    labels, funcs, polys = solve_xi(l, roots, g)
    c0 = polys[0]
    # normalise: make c0 monic, then check content
    lead = c0.coeffs()[-1] if c0.coeffs() else 0
    if c0.degree() != g or lead == 0:
        raise AnsatzFailure(f"deg c0 = {c0.degree()} but genus is {g}")
    polys = {n: p / lead for n, p in polys.items()}
    gcd = flint.fmpq_poly([0])
    for p in polys.values():
        gcd = gcd.gcd(p) if not gcd.is_zero() else p
    if gcd.degree() > 0:
        raise AnsatzFailure("Xi coefficients share a common factor in E")
    b = {}
    Xi = HalfPowerElement(roots)
    for n, (kind, ij) in enumerate(labels):
        p = polys[n]
        if kind == "b":
            if p.degree() >= g:
                raise AnsatzFailure(f"deg b{ij} = {p.degree()} is not below g = {g}")
            b[ij] = p
        Xi = Xi + funcs[n] * HalfPowerElement.rational(roots, RatFunc.poly(_fmpq_poly_to_epoly(p)))
    c0 = polys[0]
    Q = spectral_polynomial(Xi, l, roots)
    if Q.degree() != 2 * g + 1 or Q.coeffs()[-1] != 1:
        raise AnsatzFailure(f"Q has degree {Q.degree()}, expected monic of degree {2 * g + 1}")
    a, c, a_parts = _derivative_basis(l, roots, c0, b)
    return SpectralData(l, roots, g, Xi, Q, a, c, c0, b, a_parts)


def spectral_polynomial(Xi: HalfPowerElement, l, roots: ExactRoots) -> flint.fmpq_poly:
    """``Xi^2 (E - u) + Xi Xi''/2 - Xi'^2/4``; raises if it depends on x."""
    u = potential(l, roots)
    Eel = HalfPowerElement.evar(roots)
    x1 = hp_ddx(Xi)
    x2 = hp_ddx(x1)
    expr = Xi * Xi * (Eel - u) + Xi * x2 * Fraction(1, 2) - x1 * x1 * Fraction(1, 4)
    if set(expr.terms) - {MU0}:
        raise AnsatzFailure("Q picked up half-power terms")
    r = expr.coefficient(MU0)
    if not r.is_polynomial() or r.num.degrees()[0] > 0:
        raise AnsatzFailure("Q(E) depends on x")
    return _epoly_to_fmpq_poly(r.num)


def _derivative_basis(l, roots, c0, b):
    """Rewrite ``sum b_j^(i) wp_i^(l_i - j)`` as ``c + sum a_j^(i) (d/dx)^(2j) wp_i``."""
    c = c0
    a_parts = {}
    dpolys = _wp_derivative_polys(max(l) if max(l) else 1, roots)
    for i, li in enumerate(l):
        if li == 0:
            continue
        # remaining polynomial in w with E-polynomial coefficients: {power: fmpq_poly}
        rem = {li - j: b[(i, j)] for j in range(li)}
        for j in range(li - 1, -1, -1):
            D = dpolys[j]
            top = D.coeffs()[-1]
            coef = rem.get(j + 1, flint.fmpq_poly([0])) / top
            a_parts[(i, j)] = coef
            for k, dk in enumerate(D.coeffs()):
                if dk != 0:
                    rem[k] = rem.get(k, flint.fmpq_poly([0])) - coef * dk
        for k, p in rem.items():
            if k >= 1 and not p.is_zero():
                raise AnsatzFailure("derivative-basis rewrite left a non-constant remainder")
        c = c + rem.get(0, flint.fmpq_poly([0]))
    a = flint.fmpq_poly([0])
    for (i, j), p in a_parts.items():
        if j == 0:
            a = a + p
    return a, c, a_parts


# ---------------------------------------------------------------------------
# relations


def verify_A_relations(l, roots: ExactRoots, A: DiffOp | None = None, S: SpectralData | None = None) -> dict:
    """Check ``[A,H] = 0``, ``A^2 + Q(H) = 0`` and the reduction of A against H."""
    l = CouplingVector.of(l)
    if A is None:
        A = build_A(l, roots, check=False)
    if S is None:
        S = spectral_data(l, roots)
    H = hamiltonian(l, roots)
    report = {"l": list(l), "g": S.g, "order_A": A.order}
    comm = op_commutator(A, H)
    report["commutes"] = comm.is_zero()
    if not report["commutes"]:
        raise RelationFailure("[A, H] != 0", diff=comm.to_text())
    qcoef = [to_fraction(c) for c in S.Q.coeffs()]
    rel = op_compose(A, A) + poly_of_op(qcoef, H)
    report["A2_plus_QH_zero"] = rel.is_zero()
    if not report["A2_plus_QH_zero"]:
        raise RelationFailure("A^2 + Q(H) != 0", diff=rel.to_text())
    parts = op_right_reduce(A, H, S.g)
    xi_coeffs = S.Xi_coefficients_in_E()  # index k -> coefficient of E^k = a_{g-k}
    mism = [j for j, (aj, _, _) in enumerate(parts) if aj != xi_coeffs[S.g - j]]
    report["reduction_matches_Xi"] = not mism
    if mism:
        raise RelationFailure(f"a_j from A disagree with Xi for j in {mism}",
                              diff={j: parts[j][0].to_text() for j in mism})
    cs = [cj for _, _, cj in parts]
    report["c_j"] = [str(c) for c in cs]
    if any(cs):
        raise RelationFailure("reduction constants c_j are not all zero", diff=report["c_j"])
    u = potential(l, roots)
    du = hp_ddx(u)
    for j, (aj, _, _) in enumerate(parts):
        nxt = parts[j + 1][0] if j + 1 < len(parts) else HalfPowerElement(roots)
        a1 = hp_ddx(aj)
        a3 = hp_ddx(hp_ddx(a1))
        res = a3 - u * a1 * 4 + hp_ddx(nxt) * 4 - du * aj * 2
        if not res.is_zero():
            raise RelationFailure(f"recursion for a_{j} fails", diff=res.to_text())
    report["recursion_holds"] = True
    return report


# ---------------------------------------------------------------------------
# invariant spaces


def invariant_components(l) -> list:
    l0, l1, l2, l3 = CouplingVector.of(l)
    if (l0 + l1 + l2 + l3) % 2 == 0:
        return [(-l0, -l1, -l2, -l3), (-l0, -l1, l2 + 1, l3 + 1),
                (-l0, l1 + 1, -l2, l3 + 1), (-l0, l1 + 1, l2 + 1, -l3)]
    return [(-l0, -l1, -l2, l3 + 1), (-l0, -l1, l2 + 1, -l3),
            (-l0, l1 + 1, -l2, -l3), (l0 + 1, -l1, -l2, -l3)]


def invariant_spaces(l, roots: ExactRoots) -> list:
    """``(alpha as written, QuasiSpace or None)`` for the four components."""
    out = []
    for alpha in invariant_components(l):
        used = tilde_alpha(alpha)
        out.append((alpha, None if used is None else quasi_space_basis(used, roots)))
    return out


def invariant_charpoly(l, roots: ExactRoots):
    """Characteristic polynomials of H on the four components and their product."""
    parts = []
    full = flint.fmpq_poly([1])
    for _, space in invariant_spaces(l, roots):
        p = space.charpoly() if space is not None else flint.fmpq_poly([1])
        parts.append(p)
        full = full * p
    return full, parts


# ---------------------------------------------------------------------------
# band edges


def polynomial_roots(p: flint.fmpq_poly, digits: int = 50) -> list:
    """Roots with multiplicity: exact Fractions for rational roots, mpmath numbers otherwise."""
    out = []
    _, factors = p.factor()
    for f, mult in factors:
        if f.degree() == 1:
            c0, c1 = f.coeffs()
            r = -Fraction(int(c0.p), int(c0.q)) / Fraction(int(c1.p), int(c1.q))
            out.extend([r] * mult)
            continue
        with mpmath.workdps(digits + 10):
            coeffs = [mpmath.mpf(int(c.p)) / int(c.q) for c in reversed(f.coeffs())]
            rts = mpmath.polyroots(coeffs, maxsteps=200, extraprec=4 * digits)
        for r in rts:
            out.extend([r] * mult)
    return out


def band_edges(l, L: Lattice, tol: float = 1e-30) -> list:
    """Real roots of Q sorted ascending; needs a real rectangular lattice with exact roots."""
    if L.roots is None:
        raise ValueError("band edges need a lattice built from exact roots")
    if not L.is_rectangular() or mpmath.re(L.omega1) == 0:
        raise NonRectangular("band edges need omega1 real and omega3 purely imaginary")
    S = spectral_data(l, L.roots)
    rts = polynomial_roots(S.Q, L.precision)
    bad = [r for r in rts if not isinstance(r, Fraction) and abs(mpmath.im(r)) > tol]
    if bad:
        raise ComplexRoots("Q(E) has non-real roots", roots=rts)
    real = [r if isinstance(r, Fraction) else mpmath.re(r) for r in rts]
    return sorted(real, key=lambda r: mpmath.mpf(r.numerator) / r.denominator if isinstance(r, Fraction) else r)
