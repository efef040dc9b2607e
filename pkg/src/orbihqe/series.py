"""Sparse multivariate Laurent polynomials over Scalars, truncated by a graded degree.

Variables are tuples whose first entry names a kind.  Kinds listed in GRADED
('q', 't', 's') count towards the total degree used for truncation; the others
('x', 'eps', 'z', ...) are bookkeeping variables and may carry negative exponents.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb

from gmpy2 import mpq

from .scalars import Scalar, as_mpq

__all__ = ["DiffOp", "GRADED", "Poly", "WindowError", "EPS", "X", "Z"]

GRADED = frozenset({"q", "t", "s"})
EPS = ("eps",)
X = ("x",)
Z = ("z",)


class WindowError(ArithmeticError):
    """An operation would leave the declared finite window."""


@lru_cache(maxsize=None)
def mono_degree(mono: tuple) -> int:
    return sum(e for v, e in mono if v[0] in GRADED)


@lru_cache(maxsize=500000)
def mono_mul(m1: tuple, m2: tuple) -> tuple:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for v, e in m2:
        s = d.get(v, 0) + e
        if s:
            d[v] = s
        else:
            del d[v]
    return tuple(sorted(d.items()))


def _addto(t, m, c):
    if m in t:
        s = t[m] + c
        if s.t:
            t[m] = s
        else:
            del t[m]
    elif c.t:
        t[m] = c


class Poly:
    __slots__ = ("n", "t", "cap")

    def __init__(self, n: int, terms=None, cap=None):
        self.n = n
        self.t = terms if terms is not None else {}
        self.cap = cap

    # construction ------------------------------------------------------
    @classmethod
    def const(cls, n, c, cap=None):
        if not isinstance(c, Scalar):
            c = Scalar.const(n, c)
        return cls(n, {(): c} if c else {}, cap)

    @classmethod
    def var(cls, n, key, coeff=1, exp=1, cap=None):
        if not isinstance(coeff, Scalar):
            coeff = Scalar.const(n, coeff)
        p = cls(n, {((key, exp),): coeff} if coeff else {}, cap)
        return p._trunc()

    @classmethod
    def monomial(cls, n, mono: dict, coeff=1, cap=None):
        if not isinstance(coeff, Scalar):
            coeff = Scalar.const(n, coeff)
        key = tuple(sorted((v, e) for v, e in mono.items() if e))
        return cls(n, {key: coeff} if coeff else {}, cap)._trunc()

    def with_cap(self, cap):
        return Poly(self.n, dict(self.t), cap)._trunc()

    def _trunc(self):
        if self.cap is not None:
            cap = self.cap
            self.t = {m: c for m, c in self.t.items() if mono_degree(m) <= cap}
        return self

    @staticmethod
    def _cap(a, b):
        if a is None:
            return b
        if b is None:
            return a
        return min(a, b)

    def _coerce(self, other):
        if isinstance(other, Poly):
            return other
        return Poly.const(self.n, other)

    # arithmetic --------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        t = dict(self.t)
        for m, c in other.t.items():
            _addto(t, m, c)
        return Poly(self.n, t, self._cap(self.cap, other.cap))._trunc()

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.n, {m: -c for m, c in self.t.items()}, self.cap)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, s):
        if isinstance(s, Scalar):
            if not s.t:
                return Poly(self.n, {}, self.cap)
            return Poly(self.n, {m: c * s for m, c in self.t.items() if (c * s).t}, self.cap)
        s = as_mpq(s)
        if not s:
            return Poly(self.n, {}, self.cap)
        return Poly(self.n, {m: c.scale(s) for m, c in self.t.items()}, self.cap)

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        cap = self._cap(self.cap, other.cap)
        t = {}
        if cap is None:
            for m1, c1 in self.t.items():
                for m2, c2 in other.t.items():
                    _addto(t, mono_mul(m1, m2), c1 * c2)
            return Poly(self.n, t, cap)
        buckets = {}
        for m2, c2 in other.t.items():
            buckets.setdefault(mono_degree(m2), []).append((m2, c2))
        for m1, c1 in self.t.items():
            room = cap - mono_degree(m1)
            for d, items in buckets.items():
                if d <= room:
                    for m2, c2 in items:
                        _addto(t, mono_mul(m1, m2), c1 * c2)
        return Poly(self.n, t, cap)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        out = Poly.const(self.n, 1, self.cap)
        for _ in range(k):
            out = out * self
        return out

    def exp(self):
        """exp(self); every term must have positive graded degree (nilpotent at cap)."""
        if self.cap is None:
            raise WindowError("exp needs a degree cap")
        for m in self.t:
            if mono_degree(m) < 1:
                raise WindowError(f"exp of a term of degree 0: {m}")
        out = Poly.const(self.n, 1, self.cap)
        term = out
        k = 1
        while True:
            term = (term * self).scale(mpq(1, k))
            if not term.t:
                return out
            out = out + term
            k += 1

    # calculus ----------------------------------------------------------
    def diff(self, var):
        t = {}
        for m, c in self.t.items():
            d = dict(m)
            e = d.get(var, 0)
            if not e:
                continue
            if e == 1:
                del d[var]
            else:
                d[var] = e - 1
            _addto(t, tuple(sorted(d.items())), c.scale(e))
        return Poly(self.n, t, self.cap)

    def subs(self, mapping: dict):
        """Substitute variables by Polys (all at once)."""
        if not mapping:
            return self
        powers = {}

        def power(v, e):
            key = (v, e)
            if key not in powers:
                if e == 0:
                    powers[key] = Poly.const(self.n, 1, self.cap)
                elif e > 0:
                    powers[key] = power(v, e - 1) * mapping[v].with_cap(self.cap)
                else:
                    raise WindowError(f"negative power of substituted variable {v}")
            return powers[key]

        out = Poly(self.n, {}, self.cap)
        acc = {}
        for m, c in self.t.items():
            keep = tuple((v, e) for v, e in m if v not in mapping)
            sub = [(v, e) for v, e in m if v in mapping]
            if not sub:
                _addto(acc, m, c)
                continue
            p = Poly(self.n, {keep: c}, self.cap)
            for v, e in sub:
                p = p * power(v, e)
            for mm, cc in p.t.items():
                _addto(acc, mm, cc)
        out.t = acc
        return out._trunc()

    def coeff(self, var, k):
        """Coefficient of var^k (as a Poly without var)."""
        t = {}
        for m, c in self.t.items():
            e = 0
            rest = []
            for v, x in m:
                if v == var:
                    e = x
                else:
                    rest.append((v, x))
            if e == k:
                t[tuple(rest)] = c
        return Poly(self.n, t, self.cap)

    def map_vars(self, fn):
        """Rename variables by fn (must be injective on the variables present)."""
        t = {}
        for m, c in self.t.items():
            _addto(t, tuple(sorted((fn(v), e) for v, e in m)), c)
        return Poly(self.n, t, self.cap)

    def variables(self):
        return {v for m in self.t for v, _ in m}

    def exponent_range(self, var):
        es = [dict(m).get(var, 0) for m in self.t]
        return (min(es), max(es)) if es else (0, 0)

    def degree(self):
        return max((mono_degree(m) for m in self.t), default=-1)

    def constant(self) -> Scalar:
        return self.t.get((), Scalar.zero(self.n))

    def is_zero(self):
        return not self.t

    def __bool__(self):
        return bool(self.t)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(self.n, other)
        return self.t == other.t

    def __hash__(self):
        return hash(frozenset(self.t.items()))

    def sorted_terms(self):
        return sorted(self.t.items(), key=lambda kv: (mono_degree(kv[0]), _mono_key(kv[0])))

    def __str__(self):
        if not self.t:
            return "0"
        return " + ".join(f"({c})*{_mono_str(m)}" if m else f"({c})" for m, c in self.sorted_terms())

    def __repr__(self):
        return f"Poly({self})"


def _mono_key(m):
    return tuple((tuple(str(x) for x in v), e) for v, e in m)


def var_str(v):
    if len(v) == 1:
        return v[0]
    return v[0] + "[" + ",".join(str(x) for x in v[1:]) + "]"


def _mono_str(m):
    return "*".join(var_str(v) if e == 1 else f"{var_str(v)}^{e}" for v, e in m)


class DiffOp:
    """Normal-ordered differential operator sum_j A_j(x, ...) d_x^j."""

    __slots__ = ("n", "c", "xvar")

    def __init__(self, n, coeffs=None, xvar=X):
        self.n = n
        self.c = {j: p for j, p in (coeffs or {}).items() if p.t}
        self.xvar = xvar

    @classmethod
    def function(cls, p: Poly, xvar=X):
        return cls(p.n, {0: p}, xvar)

    def __add__(self, other):
        c = dict(self.c)
        for j, p in other.c.items():
            c[j] = c[j] + p if j in c else p
        return DiffOp(self.n, c, self.xvar)

    def __neg__(self):
        return DiffOp(self.n, {j: -p for j, p in self.c.items()}, self.xvar)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        return DiffOp(self.n, {j: p.scale(s) if not isinstance(s, Poly) else p * s for j, p in self.c.items()}, self.xvar)

    def left_mul(self, p: Poly):
        return DiffOp(self.n, {j: p * a for j, a in self.c.items()}, self.xvar)

    def compose(self, other: "DiffOp") -> "DiffOp":
        """self o other, with derivatives acting on everything to the right."""
        out = {}
        for i, a in self.c.items():
            for j, b in other.c.items():
                db = b
                for k in range(i + 1):
                    if k:
                        db = db.diff(self.xvar)
                    if not db.t:
                        break
                    term = (a * db).scale(comb(i, k))
                    key = i - k + j
                    out[key] = out[key] + term if key in out else term
        return DiffOp(self.n, out, self.xvar)

    def adjoint(self) -> "DiffOp":
        """Formal adjoint: x -> x, d -> -d, (AB)^# = B^# A^#."""
        out = {}
        for i, a in self.c.items():
            da = a
            for k in range(i + 1):
                if k:
                    da = da.diff(self.xvar)
                if not da.t:
                    break
                term = da.scale(comb(i, k) * (-1) ** i)
                key = i - k
                out[key] = out[key] + term if key in out else term
        return DiffOp(self.n, out, self.xvar)

    def map_coeffs(self, fn):
        return DiffOp(self.n, {j: fn(p) for j, p in self.c.items()}, self.xvar)

    def is_zero(self):
        return not self.c

    def __eq__(self, other):
        return isinstance(other, DiffOp) and self.c == other.c

    def terms(self):
        """(d-power, monomial, Scalar) triples in canonical order."""
        out = []
        for j in sorted(self.c):
            for m, c in self.c[j].sorted_terms():
                out.append((j, m, c))
        return out

    def __str__(self):
        if not self.c:
            return "0"
        return " + ".join(f"[{self.c[j]}]*D^{j}" for j in sorted(self.c))


def exp_shift_operator(u: Poly, xvar=X) -> DiffOp:
    """exp(u d_x) for u independent of x with positive graded degree, truncated at u.cap."""
    if xvar in u.variables():
        raise ValueError("shift amount must not depend on x")
    coeffs = {0: Poly.const(u.n, 1, u.cap)}
    term = coeffs[0]
    j = 1
    while True:
        term = (term * u).scale(mpq(1, j))
        if not term.t:
            break
        coeffs[j] = term
        j += 1
        if j > 10000:
            raise WindowError("shift exponential does not terminate")
    return DiffOp(u.n, coeffs, xvar)
