"""Hirota quadratic equations in the z-plane coordinates of the three branch sectors.

Tau functions are :class:`Poly` objects in x and ('q', copy, i, p, k) with k >= 0, where
q_{0,0,0} is merged into x and the variable (0,0,1) is the shifted coordinate q_{0,0,1} + 1
(so that the passage to the times t is linear).  The vertex operators of the sectors are
built from the calibrated periods through the Heisenberg rules, not from the time formulas.

Residue convention: [z^k] is coefficient extraction and Res_{z=inf} f dz = -[z^-1] f.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

from gmpy2 import mpq

from .dtoda import c_constant, shift_x, tvar
from .fock import qvar, translate
from .klattice import _dual_index, coh_basis, eps
from .periods import PuiseuxLog, calibrated_period, harmonic
from .phase import _parse_e
from .scalars import Cyclotomic, Scalar
from .series import EPS, Z, DiffOp, Poly, WindowError, exp_shift_operator

__all__ = [
    "SectorResidual",
    "change_vars",
    "dilaton_shift",
    "gamma_apply",
    "hqe_residual",
    "hqe_residuals",
    "lam_to_z",
    "one_form",
    "pullback_b",
    "q_window",
    "sector_residual",
    "vertex_data",
]


def q_window(n, K, copy=0):
    """The q-variables with k <= K, q_{0,0,0} excluded (it is x)."""
    out = []
    for i, p in coh_basis(n):
        for k in range(K + 1):
            if (i, p, k) != (0, 0, 0):
                out.append(qvar(i, p, k, copy))
    return out


def _double_factorial_odd(l):
    out = 1
    for j in range(1, 2 * l + 2, 2):
        out *= j
    return out


@lru_cache(maxsize=None)
def _q_in_t(n, K):
    """Each q_{i,p,k} as a linear form sum (t-var, Scalar) times eps, for copy 0."""
    sqrt2 = Scalar.radical(n, 2, mpq(1, 2))
    out = {}
    for k in range(1, K + 1):
        out[(0, 0, k)] = [(tvar(0, k), Scalar.const(n, 1))]
    for l in range(1, K + 2):
        out[(0, 1, l - 1)] = [(tvar(1, l * (n - 2)), Scalar.const(n, (n - 2) ** l * factorial(l)))]
    for i in range(1, n - 2):
        for l in range(K + 1):
            prod = 1
            for j in range(l + 1):
                prod *= i + (n - 2) * j
            out[(1, i, l)] = [(tvar(1, l * (n - 2) + i), Scalar.radical(n, n - 2, mpq(i, n - 2)).scale(prod))]
    for l in range(K + 1):
        d = _double_factorial_odd(l)
        c = sqrt2.inverse().scale(d)
        out[(2, 1, l)] = [(tvar(2, 2 * l + 1), c), (tvar(3, 2 * l + 1), c)]
        out[(3, 1, l)] = [(tvar(2, 2 * l + 1), c), (tvar(3, 2 * l + 1), -c)]
    return out


@lru_cache(maxsize=None)
def _t_in_q(n, K):
    """Each t-variable as a linear form sum (q-var, Scalar) times 1/eps, for copy 0."""
    sqrt2 = Scalar.radical(n, 2, mpq(1, 2))
    out = {}
    for k in range(1, K + 1):
        out[(0, k)] = [(qvar(0, 0, k), Scalar.const(n, 1))]
    for l in range(1, K + 2):
        out[(1, l * (n - 2))] = [(qvar(0, 1, l - 1), Scalar.const(n, mpq(1, (n - 2) ** l * factorial(l))))]
    for i in range(1, n - 2):
        for l in range(K + 1):
            prod = 1
            for j in range(l + 1):
                prod *= i + (n - 2) * j
            out[(1, l * (n - 2) + i)] = [(qvar(1, i, l), Scalar.radical(n, n - 2, mpq(-i, n - 2)).scale(mpq(1, prod)))]
    for l in range(K + 1):
        c = sqrt2.inverse().scale(mpq(1, _double_factorial_odd(l)))
        out[(2, 2 * l + 1)] = [(qvar(2, 1, l), c), (qvar(3, 1, l), c)]
        out[(3, 2 * l + 1)] = [(qvar(2, 1, l), c), (qvar(3, 1, l), -c)]
    return out


def change_vars(direction: str, data, K: int):
    """Linear substitution between q (shifted origin) and t.

    direction 'q->t' rewrites a Poly in q-variables as a Poly in t-variables; 't->q' the reverse.
    Accepts a Poly or a DiffOp (coefficientwise).  Copies are preserved.
    """
    if isinstance(data, DiffOp):
        return data.map_coeffs(lambda p: change_vars(direction, p, K))
    poly = data
    n = poly.n
    if direction == "q->t":
        table, src, factor = _q_in_t(n, K), "q", 1
    elif direction == "t->q":
        table, src, factor = _t_in_q(n, K), "t", -1
    else:
        raise ValueError(f"unknown direction {direction!r}")
    mapping = {}
    for v in poly.variables():
        if v[0] != src:
            continue
        key = v[2:]
        if key not in table:
            raise WindowError(f"variable {v} outside the window K = {K}")
        copy = v[1]
        form = Poly(n, {})
        for w, c in table[key]:
            w = (w[0], copy) + w[2:]
            form = form + Poly.monomial(n, {w: 1, EPS: factor}, c)
        mapping[v] = form
    return poly.subs(mapping)


def dilaton_shift(poly: Poly) -> Poly:
    """Rewrite a Poly in the plain q_{0,0,1} in terms of the shifted coordinate (q_{0,0,1} -> q - 1)."""
    n = poly.n
    mapping = {v: Poly.var(n, v) - 1 for v in poly.variables() if v[0] == "q" and v[2:] == (0, 0, 1)}
    return poly.with_cap(None).subs(mapping).with_cap(poly.cap)


# -- vertex operators from the periods ----------------------------------------------

def lam_to_z(n, series: PuiseuxLog, d: int) -> Poly:
    """Substitute lam = z^d / d into a log-free Puiseux series."""
    out = Poly(n, {})
    for (r, e), c in series.terms():
        if e:
            raise ValueError("log terms do not survive in the sector vertex operators")
        zexp = r * d
        if zexp.denominator != 1:
            raise ValueError(f"lam^{r} is not an integral power of z")
        out = out + Poly.monomial(n, {Z: int(zexp)}, c * Scalar.radical(n, d, -r))
    return out


@lru_cache(maxsize=None)
def vertex_data(n: int, family: int, sign: int, K: int):
    """(creation, shifts) for the sector vertex operator, copy 0.

    family 1, sign +-1: Gamma_1^{+-}(z) from +-eps^1_{n-2} restricted to the phi_{0,1}, phi_{1,j} directions;
    family a = 2, 3, sign s: Gamma_a(s z) from -s eps^a_1 restricted to phi_{2,1}, phi_{3,1}.
    creation is a Poly (z-Laurent coefficients) and shifts maps q-vars to translation amounts.
    """
    labels = coh_basis(n)
    if family == 1:
        alpha = eps(n, 1, n - 2) * sign
        allowed = [(0, 1)] + [(1, j) for j in range(1, n - 2)]
        d = n - 2
    else:
        alpha = eps(n, family, 1) * (-sign)
        allowed = [(2, 1), (3, 1)]
        d = 2
    eps_inv = Poly.var(n, EPS, exp=-1)
    creation = Poly(n, {})
    shifts = {}
    for k in range(K + 1):
        low = calibrated_period(alpha, -k - 1)
        high = calibrated_period(alpha, k)
        for b in allowed:
            bi = labels.index(b)
            bb, w = _dual_index(n, bi)
            pair = lam_to_z(n, low.value[bb], d).scale(w)
            if pair.t and (b, k) != ((0, 0), 0):
                creation = creation + pair * Poly.var(n, qvar(*b, k)) * eps_inv
            comp = lam_to_z(n, high.value[bi], d)
            if comp.t:
                shifts[qvar(*b, k)] = comp.scale(-((-1) ** k)) * Poly.var(n, EPS)
    return creation, shifts


def _recopy(p: Poly, copy):
    return p.map_vars(lambda v: ("q", copy) + v[2:] if v[0] == "q" else v)


def gamma_apply(family: int, sign: int, tau: Poly, K: int, copy=0) -> Poly:
    """Gamma tau for the sector operators (tau in the variables of the given copy)."""
    n = tau.n
    creation, shifts = vertex_data(n, family, sign, K)
    creation = _recopy(creation, copy)
    shifts = {("q", copy) + v[2:]: a for v, a in shifts.items()}
    present = tau.variables()
    out = translate(tau, {v: a for v, a in shifts.items() if v in present})
    return creation.with_cap(tau.cap).exp() * out


def _delta_q(n, K, l, cap):
    return Poly.var(n, qvar(0, 0, l, 1), cap=cap) - Poly.var(n, qvar(0, 0, l, 2), cap=cap)


def _e_factor(n, K, family, sign, cap) -> DiffOp:
    """The q_{0,0,l} factor: exp(sum c_l (eps d_x - sign h_l) dq_l / eps) or exp(sum c_l d_x dq_l)."""
    shift = Poly(n, {}, cap)
    mult = Poly(n, {}, cap)
    for l in range(1, K + 1):
        dq = _delta_q(n, K, l, cap)
        if family == 1:
            c = Poly.monomial(n, {Z: (n - 2) * l}, mpq(1, (n - 2) ** l * factorial(l)))
            shift = shift + c * dq
            mult = mult - (c * dq * Poly.var(n, EPS, exp=-1)).scale(sign * harmonic(l) / (n - 2))
        else:
            shift = shift + Poly.monomial(n, {Z: 2 * l}, mpq(1, 2 ** l * factorial(l))) * dq
    op = exp_shift_operator(shift) if shift.t else DiffOp.function(Poly.const(n, 1))
    if mult.t:
        op = DiffOp.function(mult.exp()).compose(op)
    return op


def _z_over_c(n, k) -> Poly:
    c = c_constant(n)
    return Poly.monomial(n, {Z: k}, c.inverse() ** k if k >= 0 else c ** (-k))


def _rename_q(tau, copy):
    return _recopy(tau, copy)


@dataclass
class SectorResidual:
    sector: int
    m: int
    r: int
    value: DiffOp


def _sandwich(left: Poly, mid: DiffOp, right: Poly) -> DiffOp:
    return DiffOp.function(left).compose(mid).compose(DiffOp.function(right))


def _extract(op: DiffOp, k) -> DiffOp:
    return op.map_coeffs(lambda p: p.coeff(Z, k))


def _sector_operators(sector, tau1, tau2, m, K):
    n = tau1.n
    caps = [c for c in (tau1.cap, tau2.cap) if c is not None]
    cap = min(caps) if caps else None
    t1 = _rename_q(tau1, 1).with_cap(cap)
    t2 = _rename_q(tau2, 2).with_cap(cap)
    if sector == 1:
        a = _sandwich(
            gamma_apply(1, 1, shift_x(t1, -1), K, 1) * _z_over_c(n, m - 1),
            _e_factor(n, K, 1, 1, cap),
            gamma_apply(1, -1, shift_x(t2, -m + 1), K, 2),
        )
        b = _sandwich(
            gamma_apply(1, -1, shift_x(t1, 1), K, 1) * _z_over_c(n, -m - 1),
            _e_factor(n, K, 1, -1, cap),
            gamma_apply(1, 1, shift_x(t2, -m - 1), K, 2),
        )
        return a + b
    if sector in (2, 3):
        return _sandwich(
            gamma_apply(sector, 1, t1, K, 1),
            _e_factor(n, K, sector, 0, cap),
            gamma_apply(sector, -1, shift_x(t2, -m), K, 2),
        )
    raise ValueError("sector must be 1, 2 or 3")


def _sector_extract(sector, op, n, m, r):
    if sector == 1:
        return _extract(op, -(n - 2) * r).scale(mpq(1, (n - 2) ** r * factorial(r)))
    weight = mpq((-1) ** (m % 2), 2) if sector == 2 else mpq(-1, 2)
    return _extract(op, -2 * r).scale(weight / (2 ** r * factorial(r)))


def sector_residual(sector: int, tau1: Poly, tau2: Poly, m: int, r: int, K: int) -> SectorResidual:
    """Residue of one sector at the constraint q'_{0,0,0} - q''_{0,0,0} = m eps.

    tau2 is evaluated at x - m eps; the result is an operator in x with q', q'' coefficients.
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    op = _sector_operators(sector, tau1, tau2, m, K)
    return SectorResidual(sector, m, r, _sector_extract(sector, op, tau1.n, m, r))


def hqe_residuals(tau1: Poly, tau2: Poly, m: int, rs, K: int) -> dict:
    """{r: hqe_residual} for several r at once."""
    if any(r < 0 for r in rs):
        raise ValueError("r must be nonnegative")
    n = tau1.n
    ops = {s: _sector_operators(s, tau1, tau2, m, K) for s in (1, 2, 3)}
    out = {}
    for r in rs:
        total = DiffOp(n, {})
        for s in (1, 2, 3):
            total = total + _sector_extract(s, ops[s], n, m, r)
        out[r] = total
    return out


def hqe_residual(tau1: Poly, tau2: Poly, m: int, r: int, K: int) -> DiffOp:
    """Sum of the three sector residues; the HQE at (m, r) holds iff this vanishes at the cap."""
    return hqe_residuals(tau1, tau2, m, [r], K)[r]


# -- 1-forms --------------------------------------------------------------------

def one_form(n: int, label):
    """The z-plane 1-form c z^e dz used for the sector of an element of E, as (c, e)."""
    a, i, _ = _parse_e(n, label)
    if a == 1:
        return -c_constant(n) * Cyclotomic.root(n, -i, n - 2), -2
    return Scalar.const(n, mpq(-1, 2) if a == 2 else mpq(1, 2)), -1


def pullback_b(n: int, label) -> PuiseuxLog:
    """Recover b(lam) from c z^e dz = b(lam) dlam/lam under lam = z^d/d."""
    a, _, _ = _parse_e(n, label)
    c, e = one_form(n, label)
    d = n - 2 if a == 1 else 2
    # dlam/lam = d dz/z, so b = (c/d) z^(e+1) with z = (d lam)^(1/d)
    r = mpq(e + 1, d)
    return PuiseuxLog(n, {(r, 0): c.scale(mpq(1, d)) * Scalar.radical(n, d, r)})
