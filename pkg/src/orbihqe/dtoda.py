"""Wave functions of the extended D-Toda hierarchy and their bilinear residue equations.

Everything lives in :class:`Poly` with variables ('t', copy, family, index), x, eps and z.
Products of wave functions are normal-ordered x-differential operators (:class:`DiffOp`);
the residue is coefficient extraction, Res_{z=0} g dz/z = [z^0] g.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

from gmpy2 import mpq

from .periods import harmonic
from .scalars import Scalar
from .series import EPS, X, Z, DiffOp, Poly, WindowError, exp_shift_operator, mono_degree

__all__ = [
    "NonInvertibleTau",
    "TVars",
    "WaveFunction",
    "admissible_tau",
    "bilinear_defect",
    "bilinear_defects",
    "bilinear_sides",
    "c_constant",
    "dressed_defect",
    "dressed_defects",
    "head_power",
    "make_psi",
    "tau_inverse",
    "tvar",
]


class NonInvertibleTau(ArithmeticError):
    pass


def tvar(family, index, copy=0):
    return ("t", copy, family, index)


@dataclass(frozen=True)
class TVars:
    """The finite window of times matching q-indices k <= K."""

    n: int
    K: int

    def family(self, a):
        n, K = self.n, self.K
        if a == 0:
            return list(range(1, K + 1))
        if a == 1:
            return list(range(1, (K + 1) * (n - 2) + 1))
        if a in (2, 3):
            return list(range(1, 2 * K + 2, 2))
        raise ValueError(f"no time family {a}")

    def variables(self, copy=0):
        return [tvar(a, k, copy) for a in range(4) for k in self.family(a)]


def c_constant(n) -> Scalar:
    """C = -Q (n-2)^(1/(n-2))."""
    return Scalar.monomial(n, -1, NQ=1) * Scalar.radical(n, n - 2, mpq(1, n - 2))


def head_power(n, k: int) -> Poly:
    """(-z/C)^k for an integer k."""
    c = c_constant(n).inverse()
    return Poly.monomial(n, {Z: k}, (c if k >= 0 else c_constant(n)) ** abs(k) * (-1) ** (k % 2))


def tau_inverse(tau: Poly) -> Poly:
    """1/tau at the degree cap; the degree-0 part must be a single x-free monomial."""
    if tau.cap is None:
        raise WindowError("tau needs a degree cap")
    head = {m: c for m, c in tau.t.items() if mono_degree(m) == 0}
    if len(head) != 1:
        raise NonInvertibleTau("degree-0 part of tau is not a single monomial")
    (m0, c0), = head.items()
    if any(v == X for v, _ in m0):
        raise NonInvertibleTau("degree-0 part of tau depends on x")
    inv0 = Poly(tau.n, {tuple((v, -e) for v, e in m0): c0.inverse()}, tau.cap)
    rest = (tau - Poly(tau.n, {m0: c0}, tau.cap)) * inv0
    out = Poly.const(tau.n, 1, tau.cap)
    term = out
    while True:
        term = -(term * rest)
        if not term.t:
            break
        out = out + term
    return out * inv0


def shift_x(tau: Poly, k) -> Poly:
    """tau(x + k eps)."""
    if not k:
        return tau
    return tau.subs({X: Poly.var(tau.n, X) + Poly.var(tau.n, EPS, coeff=k)})


def _shift_times(tau: Poly, tv: TVars, family, sign, copy):
    n = tau.n
    mapping = {}
    if family == 1:
        for k in tv.family(1):
            v = tvar(1, k, copy)
            mapping[v] = Poly.var(n, v) + Poly.monomial(n, {Z: -k}, mpq(sign, k))
    else:
        for k in tv.family(family):
            v = tvar(family, k, copy)
            mapping[v] = Poly.var(n, v) + Poly.monomial(n, {Z: -k}, mpq(2 * sign, k))
    present = tau.variables()
    return tau.subs({v: p for v, p in mapping.items() if v in present})


def _xi(n, tv: TVars, family, copy, cap):
    """xi = A + B * eps d_x, returned as (A, B)."""
    A = Poly(n, {}, cap)
    B = Poly(n, {}, cap)
    if family == 1:
        for k in tv.family(1):
            A = A + Poly.monomial(n, {tvar(1, k, copy): 1, Z: k}, 1, cap)
        for k in tv.family(0):
            c = mpq(1, (n - 2) ** k * factorial(k))
            t = Poly.monomial(n, {tvar(0, k, copy): 1, Z: (n - 2) * k}, c, cap)
            B = B + t
            A = A - t.scale(harmonic(k) / (n - 2))
    else:
        for k in tv.family(family):
            A = A + Poly.monomial(n, {tvar(family, k, copy): 1, Z: k}, 1, cap)
        for k in tv.family(0):
            B = B + Poly.monomial(n, {tvar(0, k, copy): 1, Z: 2 * k}, mpq(1, 2 ** k * factorial(k)), cap)
    return A, B


@dataclass
class WaveFunction:
    """Psi^side_family = psi * e^{xi} (side +) or e^{-xi} * psi (side -), plus the family-1 head."""

    side: int
    family: int
    psi: Poly
    xi: tuple
    copy: int

    def coefficients(self):
        """psi_k with psi = sum psi_k z^-k."""
        lo, hi = self.psi.exponent_range(Z)
        return {-e: self.psi.coeff(Z, e) for e in range(lo, hi + 1) if self.psi.coeff(Z, e).t}


def make_psi(tau: Poly, side: int, family: int, K: int, copy=0) -> WaveFunction:
    """Wave function data for tau(x, t) in the time window of size K."""
    if side not in (1, -1) or family not in (1, 2, 3):
        raise ValueError("side must be +-1 and family 1, 2 or 3")
    tv = TVars(tau.n, K)
    inv = tau_inverse(tau)
    shifted = shift_x(tau, -side) if family == 1 else tau
    num = _shift_times(shifted, tv, family, -side, copy)
    return WaveFunction(side, family, num * inv, _xi(tau.n, tv, family, copy, tau.cap), copy)


def _product(plus: WaveFunction, minus: WaveFunction, head: Poly) -> DiffOp:
    """Psi^+ Psi^- as a normal-ordered operator; the heads are already combined into head."""
    n = plus.psi.n
    a_p, b_p = plus.xi
    a_m, b_m = minus.xi
    da = a_p - a_m
    left = plus.psi * (da.exp() if da.t else Poly.const(n, 1, plus.psi.cap)) * head
    db = b_p - b_m
    shift = exp_shift_operator(db * Poly.var(n, EPS)) if db.t else DiffOp.function(Poly.const(n, 1))
    return DiffOp.function(left).compose(shift).compose(DiffOp.function(minus.psi))


def _rename(tau: Poly, copy):
    return tau.map_vars(lambda v: ("t", copy) + v[2:] if v[0] == "t" else v)


def _psis(tau1, tau2, m, K):
    t1 = _rename(tau1, 1)
    t2 = shift_x(_rename(tau2, 2), m)
    out = {}
    for fam in (1, 2, 3):
        out[fam] = (make_psi(t1, 1, fam, K, 1), make_psi(t1, -1, fam, K, 1),
                    make_psi(t2, 1, fam, K, 2), make_psi(t2, -1, fam, K, 2))
    return out


def _extract(op: DiffOp, k) -> DiffOp:
    return op.map_coeffs(lambda p: p.coeff(Z, k))


def bilinear_sides(tau: Poly, m: int, rs, K: int, tau2: Poly | None = None) -> dict:
    """{r: (lhs, rhs)}: the family-1 residue and the families-2/3 residue of the (m, r) equation."""
    if any(r < 0 for r in rs):
        raise ValueError("r must be nonnegative")
    n = tau.n
    tau2 = tau if tau2 is None else tau2
    ps = _psis(tau, tau2, m, K)
    p1, m1, p2, m2 = ps[1]
    first = _product(p1, m2, head_power(n, -m - 1))
    second = _product(p2, m1, head_power(n, m - 1)).adjoint()
    one = first + second
    a = _product(ps[2][0], ps[2][3], Poly.const(n, 1))
    b = _product(ps[3][0], ps[3][3], Poly.const(n, 1))
    two = a - b.scale((-1) ** (m % 2))
    out = {}
    for r in rs:
        lhs = _extract(one, -(n - 2) * r).scale(mpq(1, (n - 2) ** r * factorial(r)))
        rhs = _extract(two, -2 * r).scale(mpq(1, 2 * 2 ** r * factorial(r)))
        out[r] = (lhs, rhs)
    return out


def bilinear_defects(tau: Poly, m: int, rs, K: int, tau2: Poly | None = None) -> dict:
    """{r: lhs - rhs} for several r at once (the operator products are shared)."""
    return {r: lhs - rhs for r, (lhs, rhs) in bilinear_sides(tau, m, rs, K, tau2).items()}


def bilinear_defect(tau: Poly, m: int, r: int, K: int, tau2: Poly | None = None) -> DiffOp:
    """LHS - RHS of the (m, r) bilinear equation with Psi(x, t') from tau and Psi(x + m eps, t'') from tau2."""
    return bilinear_defects(tau, m, [r], K, tau2)[r]


def dressed_defects(tau: Poly, m: int, rs, K: int, tau2: Poly | None = None) -> dict:
    """tau(x, t') o defect o tau2(x + m eps, t''): the defects with the denominators cleared."""
    tau2 = tau if tau2 is None else tau2
    left = DiffOp.function(_rename(tau, 1))
    right = DiffOp.function(shift_x(_rename(tau2, 2), m))
    return {r: left.compose(d).compose(right) for r, d in bilinear_defects(tau, m, rs, K, tau2).items()}


def dressed_defect(tau: Poly, m: int, r: int, K: int, tau2: Poly | None = None) -> DiffOp:
    return dressed_defects(tau, m, [r], K, tau2)[r]


def admissible_tau(F: Poly, n: int) -> bool:
    """Dimension constraint on the monomials of a free energy in q-variables.

    A term hbar^(g-1) Q^d prod q_{i_s,p_s,k_s} may be nonzero only if
    sum (k_s + p_s/a_{i_s}) = 2g - 2 + r + d/(n-2), r the number of factors.
    """
    a = (1, n - 2, 2, 2)
    for mono, c in F.t.items():
        e_eps = 0
        lhs = mpq(0)
        r = 0
        for v, e in mono:
            if v == EPS:
                e_eps = e
            elif v[0] == "q":
                _, _, i, p, k = v
                lhs += e * (k + mpq(p, a[i]))
                r += e
            else:
                return False
        if e_eps % 2:
            return False
        g = e_eps // 2 + 1
        for smono in c.t:
            d = dict(smono).get("NQ", 0)
            if lhs != 2 * g - 2 + r + mpq(d, n - 2):
                return False
    return True
