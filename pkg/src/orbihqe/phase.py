"""Phase factors of composed vertex operators and the b-tilde coefficients.

The phase factor of two vertex operators is computed twice: directly from the
symplectic pairing of calibrated periods, and from the closed product formula in
x = (lam2/lam1)^(1/kappa).
"""

from __future__ import annotations

from gmpy2 import mpq

from .klattice import (
    CohVector,
    KClass,
    coh_basis,
    degree,
    eps,
    euler_pair,
    h_inter_pair,
    h_sigma,
    inter_pair,
    rank,
    sigma_power,
)
from .periods import PuiseuxLog, calibrated_period, period_operator
from .scalars import Cyclotomic, Scalar, field

__all__ = [
    "NotInE",
    "PhaseSeries",
    "PoleMismatch",
    "b_from_limit",
    "b_tilde",
    "phase_closed",
    "phase_direct",
    "phase_limit_sides",
]


class NotInE(ValueError):
    pass


class PoleMismatch(ArithmeticError):
    pass


class PhaseSeries:
    """head_log * log(lam2) + head_const + sum_{k=1..N} coeffs[k] x^k."""

    def __init__(self, n, order, head_log=None, head_const=None, coeffs=None):
        self.n = n
        self.order = order
        self.head_log = head_log if head_log is not None else Scalar.zero(n)
        self.head_const = head_const if head_const is not None else Scalar.zero(n)
        self.coeffs = coeffs if coeffs is not None else [Scalar.zero(n) for _ in range(order + 1)]

    def __eq__(self, other):
        return (
            isinstance(other, PhaseSeries)
            and self.order == other.order
            and self.head_log == other.head_log
            and self.head_const == other.head_const
            and self.coeffs[1:] == other.coeffs[1:]
        )

    def first_difference(self, other):
        """Label of the first differing coefficient, or None."""
        if self.head_log != other.head_log:
            return "log(lam2)"
        if self.head_const != other.head_const:
            return "x^0"
        for k in range(1, min(self.order, other.order) + 1):
            if self.coeffs[k] != other.coeffs[k]:
                return f"x^{k}"
        return None

    def __str__(self):
        parts = []
        if self.head_log:
            parts.append(f"({self.head_log})*log(lam2)")
        if self.head_const:
            parts.append(f"({self.head_const})")
        for k in range(1, self.order + 1):
            if self.coeffs[k]:
                parts.append(f"({self.coeffs[k]})*x^{k}")
        return " + ".join(parts) if parts else "0"


def _two_pi_i(n):
    return Scalar.monomial(n, Cyclotomic.root(n, 1, 4) * 2, Pi=1)


def _pair_two_variable(u, v, n):
    """Poincare pairing of PuiseuxLog vectors in lam1 (u) and lam2 (v).

    Returns a dict (r1, e1, r2, e2) -> Scalar.
    """
    from .klattice import _dual_index  # local: private helper shared with klattice

    out = {}
    for k in range(n + 1):
        if not u[k]:
            continue
        kk, w = _dual_index(n, k)
        if not v[kk]:
            continue
        for (r1, e1), c1 in u[k].t.items():
            for (r2, e2), c2 in v[kk].t.items():
                key = (r1, e1, r2, e2)
                c = (c1 * c2).scale(w)
                out[key] = out[key] + c if key in out else c
    return {k: c for k, c in out.items() if c}


def _fold_homogeneous(terms, n, order, shift=0):
    """Map lam1^r1 lam2^r2 with r1 + r2 = -shift to x^(kappa r2)."""
    kappa = field(n).kappa
    head_log = Scalar.zero(n)
    head_const = Scalar.zero(n)
    coeffs = [Scalar.zero(n) for _ in range(order + 1)]
    for (r1, e1, r2, e2), c in terms.items():
        if r1 + r2 != -shift or e1:
            raise ArithmeticError(f"non-homogeneous term lam1^{r1} lam2^{r2} (log powers {e1}, {e2})")
        k = r2 * kappa
        if k.denominator != 1:
            raise ArithmeticError(f"exponent {r2} is not in (1/kappa)Z")
        k = int(k)
        if e2:
            if k:
                raise ArithmeticError("log(lam2) multiplied by a positive power of x")
            head_log = head_log + c
        elif k == 0:
            head_const = head_const + c
        elif 0 < k <= order:
            coeffs[k] = coeffs[k] + c
        elif k < 0:
            raise ArithmeticError(f"negative power x^{k}")
    return head_log, head_const, coeffs


def phase_direct(alpha: KClass, beta: KClass, order: int) -> PhaseSeries:
    """Sum over m >= 0 of (-1)^(m+1) (I^(m)_alpha(lam1), I^(-m-1)_beta(lam2)), to order x^N."""
    if order < 1:
        raise ValueError("order must be at least 1")
    n = alpha.n
    kappa = field(n).kappa
    total = {}
    for m in range(order // kappa + 2):
        u = calibrated_period(alpha, m).value
        v = calibrated_period(beta, -m - 1).value
        sign = -1 if m % 2 == 0 else 1
        for key, c in _pair_two_variable(u, v, n).items():
            c = c if sign > 0 else -c
            total[key] = total[key] + c if key in total else c
    total = {k: c for k, c in total.items() if c}
    head_log, head_const, coeffs = _fold_homogeneous(total, n, order)
    return PhaseSeries(n, order, head_log, head_const, coeffs)


def phase_closed(alpha: KClass, beta: KClass, order: int) -> PhaseSeries:
    """Expansion of the closed product formula for the phase factor."""
    if order < 1:
        raise ValueError("order must be at least 1")
    n = alpha.n
    kappa = field(n).kappa
    ra, rb = rank(alpha), rank(beta)
    head_log = Scalar.const(n, -ra * rb / (n - 2))
    head_const = -_two_pi_i(n).scale(ra * degree(beta)) + Scalar.monomial(n, ra * rb, LQ=1)
    exps = [inter_pair(alpha, sigma_power(beta, s)) for s in range(1, kappa + 1)]
    coeffs = [Scalar.zero(n)]
    for k in range(1, order + 1):
        c = Cyclotomic.rational(n, 0)
        for s, e in enumerate(exps, start=1):
            if e:
                c = c + Cyclotomic.root(n, -s * k, kappa).scale(e)
        coeffs.append(Scalar.const(n, c.scale(mpq(-1, k))))
    return PhaseSeries(n, order, head_log, head_const, coeffs)


# -- b-tilde ------------------------------------------------------------------

def _parse_e(n, label):
    """label = (a, i) or (a, i, sign); returns (a, i, sign)."""
    if len(label) == 2:
        a, i = label
        sign = 1
    else:
        a, i, sign = label
    if sign not in (1, -1) or (a, i) not in [(1, k) for k in range(1, n - 1)] + [(2, 1), (3, 1)]:
        raise NotInE(f"{label} is not in E")
    return a, i, sign


def b_tilde(n: int, label) -> PuiseuxLog:
    a, i, _ = _parse_e(n, label)
    if a == 1:
        coeff = Scalar.monomial(n, Cyclotomic.root(n, -i, n - 2).scale(mpq(1, n - 2)), NQ=1)
        return PuiseuxLog(n, {(mpq(-1, n - 2), 0): coeff})
    return PuiseuxLog(n, {(0, 0): Scalar.const(n, mpq(-1, 4) if a == 2 else mpq(1, 4))})


def _poly_mul(a, b, n):
    out = [Cyclotomic.rational(n, 0) for _ in range(len(a) + len(b) - 1)]
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


def _poly_eval(p, x, n):
    out = Cyclotomic.rational(n, 0)
    for c in reversed(p):
        out = out * x + c
    return out


def _strip_root_one(p, n):
    """Divide out (x - 1) as often as possible; returns (quotient, multiplicity)."""
    mult = 0
    one = Cyclotomic.rational(n, 1)
    while len(p) > 1 and _poly_eval(p, one, n).is_zero():
        # synthetic division by (x - 1)
        q = [Cyclotomic.rational(n, 0)] * (len(p) - 1)
        acc = Cyclotomic.rational(n, 0)
        for k in range(len(p) - 1, 0, -1):
            acc = acc + p[k]
            q[k - 1] = acc
        p = q
        mult += 1
    return p, mult


def b_from_limit(n: int, label) -> PuiseuxLog:
    """lam / b~ from the limit of (mu - lam) e^{phase(eps, -eps)} as mu -> lam.

    Returns the value of lam / b_tilde as a PuiseuxLog in lam.
    """
    a, i, sign = _parse_e(n, label)
    F = field(n)
    kappa = F.kappa
    e = eps(n, a, i) * sign
    minus = -e
    exps = []
    for s in range(1, kappa + 1):
        v = inter_pair(e, sigma_power(minus, s))
        if v.denominator != 1:
            raise ArithmeticError(f"non-integral exponent {v}")
        exps.append(int(v))
    one = Cyclotomic.rational(n, 1)
    num = [one]
    den = [one]
    for s, k in enumerate(exps, start=1):
        factor = [one, -Cyclotomic.root(n, -s, kappa)]  # 1 - eta^{-s} x
        for _ in range(abs(k)):
            if k > 0:
                num = _poly_mul(num, factor, n)
            else:
                den = _poly_mul(den, factor, n)
    # (mu - lam) = lam (x^kappa - 1)
    num = _poly_mul(num, [-one] + [Cyclotomic.rational(n, 0)] * (kappa - 1) + [one], n)
    num, zn = _strip_root_one(num, n)
    den, zd = _strip_root_one(den, n)
    if zn != zd:
        raise PoleMismatch(f"vanishing order {zn - zd} at x = 1 for {label}")
    limit = _poly_eval(num, one, n) / _poly_eval(den, one, n)
    ra, rb = rank(e), rank(minus)
    t = ra * degree(minus)
    phase = Cyclotomic.root(n, -int(t.numerator), int(t.denominator))
    c = ra * rb
    if c.denominator != 1:
        raise ArithmeticError("non-integral rank product")
    c = int(c)
    half = euler_pair(e, eps(n, 3, 1))
    branch = Cyclotomic.root(n, int(half.numerator), int(half.denominator))
    coeff = Scalar.monomial(n, limit * phase * branch, NQ=c)
    return PuiseuxLog(n, {(1 - mpq(c, n - 2), 0): coeff})


def lam_over(b: PuiseuxLog) -> PuiseuxLog:
    """lam / b for a single-term b."""
    if len(b.t) != 1:
        raise ValueError("expected a single term")
    ((r, e), c), = b.t.items()
    if e:
        raise ValueError("log term")
    return PuiseuxLog(b.n, {(1 - r, 0): c.inverse()})


# -- phase-limit identity -----------------------------------------------------

def phase_limit_sides(u: CohVector, v: CohVector, order: int):
    """Both sides of the limit identity as coefficient lists of lam1^-1 x^k, k = 0..order."""
    n = u.n
    kappa = field(n).kappa
    pu = period_operator(u, 0)
    pv = list(period_operator(v, 0))
    # (lam2 - rho) applied to the lam2 side
    shifted = [x * PuiseuxLog(n, {(1, 0): Scalar.const(n, 1)}) for x in pv]
    shifted[1] = shifted[1] - pv[0] * Scalar.const(n, mpq(1, n - 2))
    pairing = _pair_two_variable(pu, shifted, n)
    head_log, head_const, coeffs = _fold_homogeneous(pairing, n, order)
    if head_log:
        raise ArithmeticError("unexpected log term")
    coeffs[0] = head_const
    # multiply by lam1^-1 sum_k x^(kappa k)
    lhs = [Scalar.zero(n) for _ in range(order + 1)]
    for k, c in enumerate(coeffs):
        if not c:
            continue
        for j in range(k, order + 1, kappa):
            lhs[j] = lhs[j] + c
    rhs = [Scalar.zero(n) for _ in range(order + 1)]
    w = v
    for s in range(1, kappa + 1):
        w = h_sigma(w)
        pair = h_inter_pair(u, w).scale(mpq(1, kappa))
        if not pair:
            continue
        for k in range(1, order + 1):
            rhs[k] = rhs[k] + pair * Cyclotomic.root(n, -s * k, kappa)
    return lhs, rhs


def phi_basis(n):
    return [CohVector.basis(n, i, p) for i, p in coh_basis(n)]
