"""Calibrated periods as explicit Puiseux series in lambda with at most one log."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from gmpy2 import mpq

from .klattice import (
    CohVector,
    KClass,
    chi,
    coh_basis,
    degree,
    rank,
    theta_eigen,
    twisted_indices,
)
from .scalars import Cyclotomic, Scalar, as_mpq, field

__all__ = [
    "CalPeriod",
    "PuiseuxLog",
    "calibrated_period",
    "f_tilde",
    "harmonic",
    "period_operator",
]


def harmonic(k: int) -> mpq:
    return sum((mpq(1, j) for j in range(1, k + 1)), mpq(0))


class PuiseuxLog:
    """Finite sum of c * lam^r * log(lam)^e, e in {0, 1}, c a Scalar."""

    __slots__ = ("n", "t")

    def __init__(self, n: int, terms=None):
        self.n = n
        self.t = {}
        for (r, e), c in (terms or {}).items():
            if e not in (0, 1):
                raise ValueError("only (log lam)^0 and (log lam)^1 are supported")
            if not isinstance(c, Scalar):
                c = Scalar.const(n, c)
            if c:
                self.t[(as_mpq(r), e)] = c

    @classmethod
    def monomial(cls, n, coeff, r, e=0):
        return cls(n, {(r, e): coeff})

    def __add__(self, other):
        out = dict(self.t)
        for k, c in other.t.items():
            s = out[k] + c if k in out else c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        res = PuiseuxLog(self.n)
        res.t = out
        return res

    def __neg__(self):
        res = PuiseuxLog(self.n)
        res.t = {k: -c for k, c in self.t.items()}
        return res

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, PuiseuxLog):
            out = PuiseuxLog(self.n)
            for (r1, e1), c1 in self.t.items():
                for (r2, e2), c2 in other.t.items():
                    out = out + PuiseuxLog(self.n, {(r1 + r2, e1 + e2): c1 * c2})
            return out
        res = PuiseuxLog(self.n)
        res.t = {k: c * other for k, c in self.t.items()}
        res.t = {k: c for k, c in res.t.items() if c}
        return res

    __rmul__ = __mul__

    def derivative(self) -> "PuiseuxLog":
        out = {}
        for (r, e), c in self.t.items():
            if r:
                k = (r - 1, e)
                out[k] = out[k] + c.scale(r) if k in out else c.scale(r)
            if e:
                k = (r - 1, 0)
                out[k] = out[k] + c if k in out else c
        return PuiseuxLog(self.n, out)

    def monodromy(self) -> "PuiseuxLog":
        """Formal continuation around lam = 0: lam^r -> e^{2 pi i r} lam^r, log -> log + 2 pi i."""
        n = self.n
        two_pi_i = Scalar.monomial(n, Cyclotomic.root(n, 1, 4) * 2, Pi=1)
        out = PuiseuxLog(n)
        for (r, e), c in self.t.items():
            phase = Cyclotomic.root(n, int(r.numerator), int(r.denominator))
            c = c * phase
            out = out + PuiseuxLog(n, {(r, e): c})
            if e:
                out = out + PuiseuxLog(n, {(r, 0): c * two_pi_i})
        return out

    def is_zero(self):
        return not self.t

    def __bool__(self):
        return bool(self.t)

    def __eq__(self, other):
        return isinstance(other, PuiseuxLog) and self.n == other.n and self.t == other.t

    def __hash__(self):
        return hash(frozenset(self.t.items()))

    def terms(self):
        """Terms in canonical order (increasing exponent, then log power)."""
        return sorted(self.t.items())

    def __str__(self):
        parts = []
        for (r, e), c in self.terms():
            lam = "" if not r else (f"*lam^{r}" if r != 1 else "*lam")
            log = "*log(lam)" if e else ""
            parts.append(f"({c}){lam}{log}")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"PuiseuxLog({self})"


@dataclass(frozen=True)
class CalPeriod:
    alpha: KClass
    m: int
    value: tuple  # PuiseuxLog per H-basis vector

    def component(self, i, p) -> PuiseuxLog:
        return self.value[coh_basis(self.alpha.n).index((i, p))]

    def __str__(self):
        lines = []
        for (i, p), v in zip(coh_basis(self.alpha.n), self.value):
            lines.append(f"phi{i}{p}: {v}")
        return "\n".join(lines)


def _vec_derivative(vec):
    return tuple(v.derivative() for v in vec)


def _negative_period(alpha: KClass, ell: int) -> tuple:
    """Closed form for m = -ell - 1."""
    n = alpha.n
    F = field(n)
    rk, dg = rank(alpha), degree(alpha)
    fact = mpq(1)
    for k in range(1, ell + 1):
        fact *= k
    two_pi_i = Scalar.monomial(n, Cyclotomic.root(n, 1, 4) * 2, Pi=1)
    c_ell = Scalar.monomial(n, n - 2, LQ=1) + harmonic(ell)
    comps = [PuiseuxLog(n, {(ell + 1, 0): Scalar.const(n, rk / (fact * (ell + 1)))})]
    const = -c_ell.scale(rk / (n - 2)) + two_pi_i.scale(dg)
    comps.append(PuiseuxLog(n, {(ell, 1): Scalar.const(n, rk / ((n - 2) * fact)), (ell, 0): const.scale(1 / fact)}))
    for j, p in twisted_indices(n):
        x = mpq(p, F.a[j])
        denom = mpq(1)
        for k in range(ell + 1):
            denom *= k + 1 - x
        comps.append(PuiseuxLog(n, {(ell + 1 - x, 0): Scalar.const(n, chi(j, p, alpha).scale(1 / denom))}))
    return tuple(comps)


@lru_cache(maxsize=4096)
def _period_cached(n, coeffs, m):
    alpha = KClass(n, coeffs)
    if m <= -1:
        return _negative_period(alpha, -m - 1)
    return _vec_derivative(_period_cached(n, coeffs, m - 1))


def calibrated_period(alpha: KClass, m: int) -> CalPeriod:
    return CalPeriod(alpha, m, _period_cached(alpha.n, alpha.c, m))


def f_tilde(alpha: KClass, z_window) -> list:
    """Coefficients of (-z)^m, lo <= m <= hi, of the vertex-operator series."""
    lo, hi = z_window
    if lo > hi:
        raise ValueError("empty window")
    return [(m, calibrated_period(alpha, m)) for m in range(lo, hi + 1)]


def _inv_gamma_shifted(n, k, shift) -> tuple:
    """1/Gamma(theta_k + 1/2 + shift) on basis vector k, as (Scalar, is_zero).

    Uses 1/Gamma(x + s) = 1/(Gamma(x) x (x+1) ... (x+s-1)) and the reflection rule for 1/Gamma(x).
    """
    i, p = coh_basis(n)[k]
    x0 = theta_eigen(n, k) + mpq(1, 2)
    if i == 0:
        # x0 is 1 (phi00) or 0 (phi01); Gamma at nonpositive integers has no finite value
        x = x0 + shift
        if x <= 0:
            return Scalar.zero(n)
        fact = mpq(1)
        for j in range(1, int(x)):
            fact *= j
        return Scalar.const(n, 1 / fact)
    a = field(n).a[i]
    # x0 = 1 - p/a
    base = Scalar.gamma_value(n, i, a - p).inverse()
    prod = mpq(1)
    for j in range(shift):
        prod *= x0 + j
    return base.scale(1 / prod)


def period_operator(v: CohVector, m: int) -> tuple:
    """Apply the operator lam^(theta-m-1/2)/Gamma(theta-m+1/2) + (rho term) to v, m <= 0.

    For m < 0 the rho term is lam^(-m-1)/Gamma(-m) (log lam - digamma(-m)) rho;
    for m = 0 it is rho/lam.
    """
    n = v.n
    if m > 0:
        raise ValueError("period_operator is defined for m <= 0")
    shift = -m
    out = []
    for k in range(n + 1):
        r = theta_eigen(n, k) - m - mpq(1, 2)
        coeff = v.c[k] * _inv_gamma_shifted(n, k, shift)
        out.append(PuiseuxLog(n, {(r, 0): coeff}))
    rho_v = v.c[0].scale(mpq(1, n - 2))
    if m == 0:
        extra = PuiseuxLog(n, {(-1, 0): rho_v})
    else:
        ell = -m - 1
        fact = mpq(1)
        for j in range(1, ell + 1):
            fact *= j
        digamma = Scalar.monomial(n, -1, EG=1) + harmonic(ell)
        extra = PuiseuxLog(n, {(ell, 1): rho_v.scale(1 / fact), (ell, 0): -(rho_v * digamma).scale(1 / fact)})
    out[1] = out[1] + extra
    return tuple(out)
