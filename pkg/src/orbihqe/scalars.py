"""Exact coefficient tower: cyclotomic rationals times formal transcendental monomials.

A :class:`Scalar` is a finite sum of terms ``c * m`` where ``c`` is an element of
Q(zeta_M), M = lcm(4, 2(n-2)), and ``m`` is a monomial in the symbols

    Pi        pi
    EG        Euler's constant (-Gamma'(1))
    LQ        log Q
    NQ        Q
    G{j}_{p}  Gamma(p/a_j)
    R{p}      p**e for a prime p and rational 0 < e < 1 (formal radicals)

Products are normalized by the reflection rule
Gamma(x) Gamma(1-x) = pi / sin(pi x) and by pulling integral powers out of radicals.
"""

from __future__ import annotations

from functools import lru_cache
from math import gcd

from gmpy2 import mpq

__all__ = [
    "Cyclotomic",
    "Field",
    "NonRational",
    "Scalar",
    "as_mpq",
    "assert_rational",
    "field",
]


class NonRational(ArithmeticError):
    """Raised when a scalar expected to be rational still carries symbols."""

    def __init__(self, value, residual):
        self.value = value
        self.residual = residual
        super().__init__(f"not rational: {value} (residual symbols: {sorted(residual)})")


def as_mpq(x) -> mpq:
    if isinstance(x, mpq):
        return x
    if hasattr(x, "numerator") and hasattr(x, "denominator"):
        return mpq(int(x.numerator), int(x.denominator))
    return mpq(x)


def _lcm(a, b):
    return a * b // gcd(a, b)


def _poly_divmod(num, den):
    """Division of dense integer/rational polynomials (low degree first)."""
    num = list(num)
    q = [mpq(0)] * max(len(num) - len(den) + 1, 1)
    lead = den[-1]
    for k in range(len(num) - len(den), -1, -1):
        c = num[k + len(den) - 1] / lead
        q[k] = c
        if c:
            for i, d in enumerate(den):
                num[k + i] -= c * d
    rem = num[: len(den) - 1]
    return q, rem


@lru_cache(maxsize=None)
def cyclotomic_poly(m: int) -> tuple:
    """Coefficients of Phi_m, lowest degree first."""
    poly = [mpq(-1)] + [mpq(0)] * (m - 1) + [mpq(1)]
    for d in range(1, m):
        if m % d == 0:
            poly, rem = _poly_divmod(poly, list(cyclotomic_poly(d)))
            assert not any(rem)
    return tuple(int(c) for c in poly)


def _trim(p):
    p = list(p)
    while p and not p[-1]:
        p.pop()
    return p


def _pmul(a, b):
    if not a or not b:
        return []
    out = [mpq(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def _psub(a, b):
    n = max(len(a), len(b))
    a = list(a) + [mpq(0)] * (n - len(a))
    b = list(b) + [mpq(0)] * (n - len(b))
    return _trim([x - y for x, y in zip(a, b)])


class Field:
    """Static data of Q(zeta_M) for a fixed rank parameter n."""

    def __init__(self, n: int):
        if n < 4:
            raise ValueError(f"n must be at least 4, got {n}")
        self.n = n
        self.kappa = 2 * (n - 2)
        self.a = (1, n - 2, 2, 2)
        self.M = _lcm(4, self.kappa)
        self.phi = cyclotomic_poly(self.M)
        self.d = len(self.phi) - 1
        d = self.d
        # x^k mod Phi_M for 0 <= k < 2d - 1
        self.powers = []
        cur = [mpq(0)] * d
        cur[0] = mpq(1)
        for _ in range(2 * d - 1):
            self.powers.append(tuple(cur))
            top = cur[-1]
            cur = [mpq(0)] + cur[:-1]
            if top:
                for i in range(d):
                    cur[i] -= top * self.phi[i]
        self._zeta = {}

    def zeta_coeffs(self, k: int) -> tuple:
        k %= self.M
        if k not in self._zeta:
            cur = [mpq(0)] * self.d
            cur[0] = mpq(1)
            for _ in range(k):
                top = cur[-1]
                cur = [mpq(0)] + cur[:-1]
                if top:
                    for i in range(self.d):
                        cur[i] -= top * self.phi[i]
            self._zeta[k] = tuple(cur)
        return self._zeta[k]

    def reduce(self, raw) -> tuple:
        d = self.d
        out = [mpq(0)] * d
        for k, c in enumerate(raw):
            if c:
                if k < d:
                    out[k] += c
                else:
                    for i, v in enumerate(self.powers[k]):
                        if v:
                            out[i] += c * v
        return tuple(out)

    def __repr__(self):
        return f"Field(n={self.n}, M={self.M})"


@lru_cache(maxsize=None)
def field(n: int) -> Field:
    return Field(n)


class Cyclotomic:
    """Element of Q[x]/Phi_M(x), x = zeta_M = exp(2 pi i / M)."""

    __slots__ = ("F", "c", "_h")

    def __init__(self, F: Field, coeffs):
        self.F = F
        self.c = coeffs
        self._h = None

    @classmethod
    def make(cls, n: int, coeffs) -> "Cyclotomic":
        F = field(n)
        coeffs = [as_mpq(x) for x in coeffs]
        return cls(F, F.reduce(coeffs))

    @classmethod
    def rational(cls, n: int, q) -> "Cyclotomic":
        F = field(n)
        return cls(F, (as_mpq(q),) + (mpq(0),) * (F.d - 1))

    @classmethod
    def zeta(cls, n: int, k: int = 1) -> "Cyclotomic":
        F = field(n)
        return cls(F, F.zeta_coeffs(k))

    @classmethod
    def root(cls, n: int, num: int, den: int) -> "Cyclotomic":
        """exp(2 pi i num/den); den must divide M."""
        F = field(n)
        if (F.M * num) % den:
            raise ValueError(f"exp(2 pi i {num}/{den}) is not in Q(zeta_{F.M})")
        return cls(F, F.zeta_coeffs(F.M * num // den))

    @property
    def n(self):
        return self.F.n

    def _check(self, other):
        if other.F is not self.F:
            raise ValueError(f"mismatched n: {self.F.n} vs {other.F.n}")

    def __add__(self, other):
        if not isinstance(other, Cyclotomic):
            other = Cyclotomic.rational(self.F.n, other)
        self._check(other)
        return Cyclotomic(self.F, tuple(a + b for a, b in zip(self.c, other.c)))

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.F, tuple(-a for a in self.c))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, q) -> "Cyclotomic":
        if q == 1:
            return self
        return Cyclotomic(self.F, tuple(a * q for a in self.c))

    def __mul__(self, other):
        if not isinstance(other, Cyclotomic):
            return self.scale(as_mpq(other))
        self._check(other)
        a, b = self.c, other.c
        if not any(a[1:]):
            return other.scale(a[0])
        if not any(b[1:]):
            return self.scale(b[0])
        raw = [mpq(0)] * (2 * self.F.d - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        raw[i + j] += x * y
        return Cyclotomic(self.F, self.F.reduce(raw))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = Cyclotomic.rational(self.F.n, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inverse(self) -> "Cyclotomic":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero cyclotomic")
        if self.is_rational():
            return Cyclotomic.rational(self.F.n, 1 / self.c[0])
        # extended Euclid: s*a + t*phi = g (a constant)
        r0, r1 = [mpq(c) for c in self.F.phi], _trim(self.c)
        s0, s1 = [], [mpq(1)]
        while len(r1) > 1:
            q, r = _poly_divmod(r0, r1)
            r0, r1 = r1, _trim(r)
            s0, s1 = s1, _psub(s0, _pmul(q, s1))
        g = r1[0]
        coeffs = [c / g for c in s1]
        return Cyclotomic.make(self.F.n, coeffs)

    def __truediv__(self, other):
        if not isinstance(other, Cyclotomic):
            return self.scale(1 / as_mpq(other))
        return self * other.inverse()

    def is_zero(self) -> bool:
        return not any(self.c)

    def is_rational(self) -> bool:
        return not any(self.c[1:])

    def to_rational(self) -> mpq:
        if not self.is_rational():
            raise NonRational(self, {"zeta"})
        return self.c[0]

    def __eq__(self, other):
        if isinstance(other, Cyclotomic):
            return self.F is other.F and self.c == other.c
        try:
            return self.is_rational() and self.c[0] == as_mpq(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        if self._h is None:
            self._h = hash((self.F.n, self.c))
        return self._h

    def __bool__(self):
        return not self.is_zero()

    def __str__(self):
        parts = []
        for k, c in enumerate(self.c):
            if not c:
                continue
            if k == 0:
                parts.append(str(c))
            elif c == 1:
                parts.append(f"z^{k}")
            else:
                parts.append(f"{c}*z^{k}")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"Cyclotomic({self})"


# -- transcendental monomials -------------------------------------------------

_POLY_ONLY = ("EG", "LQ")


def _gamma_sym(j, p):
    return f"G{j}_{p}"


def _parse_gamma(sym):
    j, p = sym[1:].split("_")
    return int(j), int(p)


def _prime_factors(k: int) -> dict:
    out = {}
    d = 2
    while d * d <= k:
        while k % d == 0:
            out[d] = out.get(d, 0) + 1
            k //= d
        d += 1
    if k > 1:
        out[k] = out.get(k, 0) + 1
    return out


def _sin_cyc(n, p, a):
    """sin(pi p / a) in Q(zeta_M)."""
    zp = Cyclotomic.root(n, p, 2 * a)
    zm = Cyclotomic.root(n, -p, 2 * a)
    two_i = Cyclotomic.root(n, 1, 4) * 2
    return (zp - zm) * two_i.inverse()


@lru_cache(maxsize=None)
def _sin_inv(n, p, a):
    return _sin_cyc(n, p, a).inverse()


@lru_cache(maxsize=200000)
def _normalize(n: int, mono: tuple):
    """Canonical form of a raw monomial: returns (rational or cyclotomic factor, monomial)."""
    F = field(n)
    exps = dict(mono)
    factor = Cyclotomic.rational(n, 1)
    for sym in list(exps):
        if sym[0] == "R":
            p = int(sym[1:])
            e = exps[sym]
            k = e.numerator // e.denominator  # floor
            if k:
                factor = factor * (mpq(p) ** int(k) if k > 0 else 1 / mpq(p) ** int(-k))
                exps[sym] = e - k
    for j in (1, 2, 3):
        a = F.a[j]
        for p in range(1, a // 2 + 1):
            s1, s2 = _gamma_sym(j, p), _gamma_sym(j, a - p)
            if s1 == s2:
                e = exps.get(s1, 0)
                k = e // 2
                if k:
                    exps[s1] = e - 2 * k
                    exps["Pi"] = exps.get("Pi", 0) + k  # Gamma(1/2)^2 = pi
            else:
                e1, e2 = exps.get(s1, 0), exps.get(s2, 0)
                k = min(e1, e2)
                if k > 0:
                    exps[s1] = e1 - k
                    exps[s2] = e2 - k
                    exps["Pi"] = exps.get("Pi", 0) + k
                    factor = factor * _sin_inv(n, p, a) ** k
    for sym, e in exps.items():
        if e < 0 and sym[0] == "G":
            raise ValueError(f"negative exponent for {sym}")
        if e < 0 and sym in _POLY_ONLY:
            raise ValueError(f"negative exponent for {sym}")
    out = tuple(sorted((s, e) for s, e in exps.items() if e))
    return factor, out


@lru_cache(maxsize=400000)
def _mono_mul(n: int, m1: tuple, m2: tuple):
    if not m1:
        return None, m2
    if not m2:
        return None, m1
    exps = dict(m1)
    for s, e in m2:
        exps[s] = exps.get(s, 0) + e
    raw = tuple(sorted(exps.items()))
    needs = any(s[0] in "GR" for s, _ in m1) and any(s[0] in "GR" for s, _ in m2)
    if not needs:
        return None, tuple((s, e) for s, e in raw if e)
    factor, mono = _normalize(n, raw)
    if factor.is_rational() and factor.c[0] == 1:
        factor = None
    return factor, mono


def _fmt_exp(e):
    return str(e)


def _mono_str(mono):
    return "*".join(s if e == 1 else f"{s}^{_fmt_exp(e)}" for s, e in mono)


class Scalar:
    """Finite sum of cyclotomic coefficients times transcendental monomials."""

    __slots__ = ("F", "t", "_h")

    def __init__(self, F: Field, terms: dict):
        self.F = F
        self.t = terms
        self._h = None

    # construction ------------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "Scalar":
        return cls(field(n), {})

    @classmethod
    def const(cls, n: int, q) -> "Scalar":
        F = field(n)
        if isinstance(q, Cyclotomic):
            return cls(F, {(): q} if q else {})
        q = as_mpq(q)
        return cls(F, {(): Cyclotomic.rational(n, q)} if q else {})

    @classmethod
    def monomial(cls, n: int, coeff=1, **syms) -> "Scalar":
        """E.g. Scalar.monomial(n, Pi=1, NQ=-1)."""
        raw = tuple(sorted(syms.items()))
        factor, mono = _normalize(n, raw)
        c = coeff if isinstance(coeff, Cyclotomic) else Cyclotomic.rational(n, coeff)
        c = c * factor
        return cls(field(n), {mono: c} if c else {})

    @classmethod
    def pi(cls, n: int) -> "Scalar":
        return cls.monomial(n, Pi=1)

    @classmethod
    def i(cls, n: int) -> "Scalar":
        return cls.const(n, Cyclotomic.root(n, 1, 4))

    @classmethod
    def gamma_value(cls, n: int, j: int, p: int) -> "Scalar":
        """Gamma(p / a_j)."""
        a = field(n).a[j]
        if not 1 <= p < a:
            raise ValueError(f"Gamma({p}/{a}) is not a stored symbol")
        return cls.monomial(n, **{_gamma_sym(j, p): 1})

    @classmethod
    def radical(cls, n: int, base: int, e) -> "Scalar":
        """base**e for a positive integer base and rational e."""
        e = as_mpq(e)
        syms = {}
        for p, k in _prime_factors(base).items():
            syms[f"R{p}"] = e * k
        return cls.monomial(n, **syms)

    @property
    def n(self):
        return self.F.n

    # arithmetic --------------------------------------------------------
    def _coerce(self, other) -> "Scalar":
        if isinstance(other, Scalar):
            if other.F is not self.F:
                raise ValueError(f"mismatched n: {self.F.n} vs {other.F.n}")
            return other
        return Scalar.const(self.F.n, other)

    def __add__(self, other):
        other = self._coerce(other)
        if not other.t:
            return self
        if not self.t:
            return other
        t = dict(self.t)
        for m, c in other.t.items():
            if m in t:
                s = t[m] + c
                if s.is_zero():
                    del t[m]
                else:
                    t[m] = s
            else:
                t[m] = c
        return Scalar(self.F, t)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(self.F, {m: -c for m, c in self.t.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, q) -> "Scalar":
        q = as_mpq(q)
        if not q:
            return Scalar(self.F, {})
        if q == 1:
            return self
        return Scalar(self.F, {m: c.scale(q) for m, c in self.t.items()})

    def _rational_value(self):
        """The value if self is a nonzero rational constant, else None."""
        if len(self.t) == 1 and () in self.t:
            c = self.t[()].c
            if not any(c[1:]):
                return c[0]
        return None

    def __mul__(self, other):
        if not isinstance(other, Scalar):
            if isinstance(other, Cyclotomic):
                other = Scalar.const(self.F.n, other)
            else:
                return self.scale(other)
        if other.F is not self.F:
            raise ValueError(f"mismatched n: {self.F.n} vs {other.F.n}")
        q = other._rational_value()
        if q is not None:
            return self.scale(q)
        q = self._rational_value()
        if q is not None:
            return other.scale(q)
        n = self.F.n
        t = {}
        for m1, c1 in self.t.items():
            for m2, c2 in other.t.items():
                factor, m = _mono_mul(n, m1, m2)
                c = c1 * c2
                if factor is not None:
                    c = c * factor
                if m in t:
                    s = t[m] + c
                    if s.is_zero():
                        del t[m]
                    else:
                        t[m] = s
                elif not c.is_zero():
                    t[m] = c
        return Scalar(self.F, t)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = Scalar.const(self.F.n, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inverse(self) -> "Scalar":
        """Inverse of a single-term scalar whose symbols are invertible."""
        if len(self.t) != 1:
            raise ZeroDivisionError(f"cannot invert multi-term scalar {self}")
        (mono, c), = self.t.items()
        n = self.F.n
        out = Scalar.const(n, c.inverse())
        for sym, e in mono:
            if sym in _POLY_ONLY:
                raise ZeroDivisionError(f"cannot invert symbol {sym}")
            if sym[0] == "G":
                j, p = _parse_gamma(sym)
                a = self.F.a[j]
                # 1/Gamma(p/a) = Gamma(1-p/a) sin(pi p/a) / pi
                inv = Scalar.monomial(n, _sin_cyc(n, p, a), Pi=-1, **{_gamma_sym(j, a - p): 1})
                out = out * inv ** e
            else:
                out = out * Scalar.monomial(n, **{sym: -e})
        return out

    def __truediv__(self, other):
        if isinstance(other, Scalar):
            return self * other.inverse()
        if isinstance(other, Cyclotomic):
            return self * Scalar.const(self.F.n, other.inverse())
        return self.scale(1 / as_mpq(other))

    # queries -----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.t

    def __bool__(self):
        return bool(self.t)

    def symbols(self) -> set:
        return {s for m in self.t for s, _ in m}

    def to_rational(self) -> mpq:
        """The rational value, or NonRational if anything else survives."""
        if not self.t:
            return mpq(0)
        if len(self.t) == 1 and () in self.t and self.t[()].is_rational():
            return self.t[()].c[0]
        residual = self.symbols()
        if not residual:
            residual = {"zeta"}
        raise NonRational(self, residual)

    def constant_part(self) -> Cyclotomic:
        return self.t.get((), Cyclotomic.rational(self.F.n, 0))

    def coefficient(self, **syms) -> Cyclotomic:
        key = tuple(sorted((s, e) for s, e in syms.items() if e))
        return self.t.get(key, Cyclotomic.rational(self.F.n, 0))

    def substitute_log_q(self, shift: "Scalar") -> "Scalar":
        """Replace LQ by LQ + shift (used for formal monodromy bookkeeping)."""
        out = Scalar.zero(self.F.n)
        for m, c in self.t.items():
            e = dict(m).get("LQ", 0)
            rest = tuple((s, k) for s, k in m if s != "LQ")
            term = Scalar(self.F, {rest: c})
            base = Scalar.monomial(self.F.n, LQ=1) + shift
            out = out + term * base ** e
        return out

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.F is other.F and self.t == other.t
        try:
            other = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.t == other.t

    def __hash__(self):
        if self._h is None:
            self._h = hash(frozenset(self.t.items()))
        return self._h

    def __str__(self):
        if not self.t:
            return "0"
        parts = []
        for m in sorted(self.t):
            c = self.t[m]
            cs = str(c)
            if len([x for x in c.c if x]) > 1:
                cs = f"({cs})"
            if m:
                parts.append(f"{cs}*{_mono_str(m)}" if cs != "1" else _mono_str(m))
            else:
                parts.append(cs)
        return " + ".join(parts)

    def __repr__(self):
        return f"Scalar({self})"


def assert_rational(s) -> mpq:
    """Return the rational value of ``s`` or raise :class:`NonRational`."""
    if isinstance(s, Scalar):
        return s.to_rational()
    if isinstance(s, Cyclotomic):
        return s.to_rational()
    return as_mpq(s)
