"""Truncated Fock space: Heisenberg action, vertex operators, quantized quadratic Hamiltonians.

Conventions (eps = hbar^(1/2)):

    (phi_b z^k)^            = -eps d/dq_{b,k}
    (phi^b (-z)^(-k-1))^    = q_{b,k} / eps
    Omega(f, g)             = Res_{z=0} (f(-z), g(z)) dz

Fock polynomials are :class:`Poly` objects in variables ('q', copy, i, p, k) and EPS.
The variable ('s',) is available as a formal deformation parameter: giving it
graded degree 1 makes every operator used here filtration-preserving, so truncation
at a total degree is exact.
"""

from __future__ import annotations

import re
from fractions import Fraction

from gmpy2 import mpq

from .klattice import _dual_index, coh_basis
from .scalars import Scalar, as_mpq
from .series import EPS, Poly, WindowError

__all__ = [
    "HField",
    "MatSeries",
    "NotDivisible",
    "NotInfinitesimallySymplectic",
    "ParseError",
    "SympSeries",
    "apply_quadratic",
    "dumps",
    "heisenberg_apply",
    "loads",
    "omega",
    "qvar",
    "quadratic_hamiltonian",
    "quantize_quadratic",
    "s_conjugation_check",
    "vertex_apply",
    "vertex_apply_full",
    "w_form",
]

S_PARAM = ("s",)


class NotDivisible(ArithmeticError):
    pass


class NotInfinitesimallySymplectic(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, msg, line, col):
        self.msg = msg
        self.line = line
        self.col = col
        super().__init__(f"line {line}, column {col}: {msg}")


def qvar(i, p, k, copy=0):
    return ("q", copy, i, p, k)


def _as_poly(n, c, cap=None):
    if isinstance(c, Poly):
        return c
    return Poly.const(n, c, cap)


class HField:
    """f = sum_k f_k z^k over a finite window; f_k has Poly (or Scalar) components."""

    def __init__(self, n: int, coeffs: dict):
        self.n = n
        self.c = {}
        for k, vec in coeffs.items():
            vec = [_as_poly(n, x) for x in vec]
            if len(vec) != n + 1:
                raise ValueError(f"expected {n + 1} components")
            if any(x.t for x in vec):
                self.c[k] = vec

    @classmethod
    def basis(cls, n, i, p, k, coeff=1):
        vec = [0] * (n + 1)
        vec[coh_basis(n).index((i, p))] = coeff
        return cls(n, {k: vec})

    @classmethod
    def dual(cls, n, i, p, k, coeff=1):
        """coeff * phi^{i,p} (-z)^(-k-1)."""
        j, w = _dual_index(n, coh_basis(n).index((i, p)))
        vec = [0] * (n + 1)
        c = coeff if isinstance(coeff, (Scalar, Poly)) else Scalar.const(n, coeff)
        vec[j] = c * (1 / w) * (-1) ** (k + 1)
        return cls(n, {-k - 1: vec})

    def window(self):
        return (min(self.c), max(self.c)) if self.c else (0, -1)

    def plus(self):
        return HField(self.n, {k: v for k, v in self.c.items() if k >= 0})

    def minus(self):
        return HField(self.n, {k: v for k, v in self.c.items() if k < 0})

    def __add__(self, other):
        c = {k: list(v) for k, v in self.c.items()}
        for k, v in other.c.items():
            c[k] = [a + b for a, b in zip(c[k], v)] if k in c else list(v)
        return HField(self.n, c)

    def __neg__(self):
        return HField(self.n, {k: [-x for x in v] for k, v in self.c.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        return HField(self.n, {k: [x * s for x in v] for k, v in self.c.items()})

    def is_zero(self):
        return not self.c


def _pair_vec(n, u, v):
    """Poincare pairing of component lists (Poly entries)."""
    out = Poly(n, {})
    for k in range(n + 1):
        if u[k].t:
            kk, w = _dual_index(n, k)
            if v[kk].t:
                out = out + (u[k] * v[kk]).scale(w)
    return out


def omega(f: HField, g: HField):
    """Res_{z=0} (f(-z), g(z)) dz; returns a Poly (constant for numeric inputs)."""
    n = f.n
    out = Poly(n, {})
    for a, fa in f.c.items():
        b = -1 - a
        if b in g.c:
            term = _pair_vec(n, fa, g.c[b])
            out = out + (term if a % 2 == 0 else -term)
    return out


def _check_window(k, K):
    if K is not None and k > K:
        raise WindowError(f"index {k} exceeds the variable window K = {K}")


def _linear_parts(f: HField, K=None, copy=0):
    """Split f^ into (creation multiplier, annihilation shifts).

    creation: Poly L with f^- = multiplication by L;
    shifts: dict var -> Poly a with f^+ = sum_var a * d/dvar.
    """
    n = f.n
    eps_inv = Poly.var(n, EPS, exp=-1)
    eps = Poly.var(n, EPS)
    creation = Poly(n, {})
    shifts = {}
    labels = coh_basis(n)
    for k, vec in f.c.items():
        if k >= 0:
            _check_window(k, K)
            for b, c in enumerate(vec):
                if c.t:
                    i, p = labels[b]
                    shifts[qvar(i, p, k, copy)] = -(c * eps)
        else:
            j = -k - 1
            _check_window(j, K)
            sign = -1 if j % 2 == 0 else 1  # (-1)^(j+1)
            for b in range(n + 1):
                bb, w = _dual_index(n, b)
                c = vec[bb]
                if c.t:
                    i, p = labels[b]
                    creation = creation + (c * Poly.var(n, qvar(i, p, j, copy)) * eps_inv).scale(w * sign)
    return creation, shifts


def heisenberg_apply(f: HField, tau: Poly, K=None, copy=0) -> Poly:
    creation, shifts = _linear_parts(f, K, copy)
    out = creation * tau
    for v, a in shifts.items():
        out = out + a * tau.diff(v)
    return out.with_cap(tau.cap) if tau.cap is not None else out


def translate(tau: Poly, shifts: dict) -> Poly:
    """tau(q + a) for the given shift amounts."""
    if not shifts:
        return tau
    mapping = {v: Poly.var(tau.n, v) + a for v, a in shifts.items()}
    return tau.subs(mapping)


def vertex_apply(fplus: HField, fminus: HField, tau: Poly, K=None, copy=0) -> Poly:
    """e^{f-^} e^{f+^} tau at the degree cap of tau."""
    if any(k < 0 for k in fplus.c) or any(k >= 0 for k in fminus.c):
        raise ValueError("fplus must have k >= 0 and fminus k < 0")
    if tau.cap is None:
        raise WindowError("tau needs a degree cap")
    _, shifts = _linear_parts(fplus, K, copy)
    creation, _ = _linear_parts(fminus, K, copy)
    out = translate(tau, shifts)
    if creation.t:
        out = creation.with_cap(tau.cap).exp() * out
    return out


def vertex_apply_full(f: HField, tau: Poly, K=None, copy=0) -> Poly:
    """Normal-ordered vertex operator of f (split into +/- parts)."""
    return vertex_apply(f.plus(), f.minus(), tau, K, copy)


# -- matrix series ------------------------------------------------------------

def _mat_zero(n):
    z = Scalar.zero(n)
    return [[z] * (n + 1) for _ in range(n + 1)]


def _mat_id(n):
    m = _mat_zero(n)
    for i in range(n + 1):
        m[i] = list(m[i])
        m[i][i] = Scalar.const(n, 1)
    return m


def _mat_mul(n, a, b):
    out = []
    for i in range(n + 1):
        row = []
        for j in range(n + 1):
            s = Scalar.zero(n)
            for k in range(n + 1):
                if a[i][k].t and b[k][j].t:
                    s = s + a[i][k] * b[k][j]
            row.append(s)
        out.append(row)
    return out


def _mat_add(n, a, b, sb=1):
    return [[a[i][j] + (b[i][j] if sb == 1 else -b[i][j]) for j in range(n + 1)] for i in range(n + 1)]


def _mat_scale(n, a, s):
    return [[a[i][j] * s for j in range(n + 1)] for i in range(n + 1)]


def _mat_is_zero(a):
    return all(not x.t for row in a for x in row)


def _gram(n):
    g = [[mpq(0)] * (n + 1) for _ in range(n + 1)]
    for k in range(n + 1):
        kk, w = _dual_index(n, k)
        g[k][kk] = w
    return g


def _mat_adjoint(n, a):
    """Transpose with respect to the Poincare pairing: G^-1 a^T G."""
    g = _gram(n)
    ginv = [[mpq(0)] * (n + 1) for _ in range(n + 1)]
    for k in range(n + 1):
        kk, w = _dual_index(n, k)
        ginv[kk][k] = 1 / w
    out = []
    for i in range(n + 1):
        row = []
        for j in range(n + 1):
            s = Scalar.zero(n)
            for k in range(n + 1):
                if not ginv[i][k]:
                    continue
                for l in range(n + 1):
                    if g[l][j] and a[l][k].t:
                        s = s + a[l][k].scale(ginv[i][k] * g[l][j])
            row.append(s)
        out.append(row)
    return out


class MatSeries:
    """sum_e M_e z^e with (n+1)x(n+1) Scalar matrices, truncated below z^(-order)."""

    def __init__(self, n, mats: dict, order: int):
        self.n = n
        self.order = order
        self.m = {e: a for e, a in mats.items() if not _mat_is_zero(a) and e >= -order}

    @classmethod
    def identity(cls, n, order):
        return cls(n, {0: _mat_id(n)}, order)

    def __add__(self, other):
        m = dict(self.m)
        for e, a in other.m.items():
            m[e] = _mat_add(self.n, m[e], a) if e in m else a
        return MatSeries(self.n, m, min(self.order, other.order))

    def __neg__(self):
        return MatSeries(self.n, {e: _mat_scale(self.n, a, -1) for e, a in self.m.items()}, self.order)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        return MatSeries(self.n, {e: _mat_scale(self.n, a, s) for e, a in self.m.items()}, self.order)

    def __mul__(self, other):
        order = min(self.order, other.order)
        m = {}
        for e1, a in self.m.items():
            for e2, b in other.m.items():
                e = e1 + e2
                if e < -order:
                    continue
                p = _mat_mul(self.n, a, b)
                m[e] = _mat_add(self.n, m[e], p) if e in m else p
        return MatSeries(self.n, m, order)

    def adjoint_neg(self):
        """M*(-z)."""
        return MatSeries(self.n, {e: _mat_scale(self.n, _mat_adjoint(self.n, a), (-1) ** (e % 2)) for e, a in self.m.items()}, self.order)

    def adjoint(self):
        return MatSeries(self.n, {e: _mat_adjoint(self.n, a) for e, a in self.m.items()}, self.order)

    def coeff(self, e):
        return self.m.get(e, _mat_zero(self.n))

    def is_zero(self):
        return not self.m

    def __eq__(self, other):
        return isinstance(other, MatSeries) and self.m.keys() == other.m.keys() and all(
            self.m[e] == other.m[e] for e in self.m
        )

    def log(self):
        """Series logarithm of 1 + N, N with only negative powers."""
        n = self.n
        N = self - MatSeries.identity(n, self.order)
        if any(e >= 0 for e in N.m):
            raise ValueError("log needs identity plus negative powers")
        out = MatSeries(n, {}, self.order)
        power = MatSeries.identity(n, self.order)
        for j in range(1, self.order + 1):
            power = power * N
            if power.is_zero():
                break
            out = out + power.scale(mpq((-1) ** (j + 1), j))
        return out

    def exp(self):
        n = self.n
        if any(e >= 0 for e in self.m):
            raise ValueError("exp needs only negative powers")
        out = MatSeries.identity(n, self.order)
        term = out
        for j in range(1, self.order + 1):
            term = (term * self).scale(mpq(1, j))
            if term.is_zero():
                break
            out = out + term
        return out

    def apply(self, f: HField) -> HField:
        n = self.n
        c = {}
        for k, vec in f.c.items():
            for e, a in self.m.items():
                kk = k + e
                out = c.setdefault(kk, [Poly(n, {}) for _ in range(n + 1)])
                for i in range(n + 1):
                    for j in range(n + 1):
                        if a[i][j].t and vec[j].t:
                            out[i] = out[i] + vec[j] * a[i][j]
        return HField(n, c)

    def is_infinitesimally_symplectic(self):
        return (self.adjoint_neg() + self).is_zero()


class SympSeries(MatSeries):
    """S(z) = 1 + S_1 z^-1 + ... + S_d z^-d."""

    @classmethod
    def from_matrices(cls, n, mats: list):
        m = {0: _mat_id(n)}
        for l, a in enumerate(mats, start=1):
            m[-l] = a
        return cls(n, m, len(mats))

    @classmethod
    def from_series(cls, s: MatSeries):
        return cls(s.n, dict(s.m), s.order)

    def is_symplectic(self):
        prod = self.adjoint_neg() * self
        return (prod - MatSeries.identity(self.n, self.order)).is_zero()


# -- quadratic Hamiltonians ---------------------------------------------------

def _darboux_field(n, K, copy=0):
    """Generic f = sum q_{b,k} phi_b z^k + sum p_{b,k} phi^b (-z)^(-k-1), k <= K."""
    labels = coh_basis(n)
    c = {}
    for k in range(K + 1):
        c[k] = [Poly.var(n, qvar(i, p, k, copy)) for i, p in labels]
        vec = [Poly(n, {}) for _ in range(n + 1)]
        for b, (i, p) in enumerate(labels):
            bb, w = _dual_index(n, b)
            vec[bb] = vec[bb] + Poly.var(n, ("P", copy, i, p, k)).scale((-1) ** (k + 1) / w)
        c[-k - 1] = vec
    return HField(n, c)


def _truncate_field(f: HField, K):
    return HField(f.n, {k: v for k, v in f.c.items() if -K - 1 <= k <= K})


def quadratic_hamiltonian(A: MatSeries, K: int, copy=0) -> Poly:
    """h_A = Omega(A f, f)/2 in Darboux coordinates (q, P) with indices <= K."""
    f = _darboux_field(A.n, K, copy)
    af = _truncate_field(A.apply(f), K)
    return omega(af, f).scale(mpq(1, 2))


def quantize_quadratic(A: MatSeries, K: int, copy=0, check=True):
    """Quantized Hamiltonian as a list of (kind, coefficient, vars) terms.

    kind 'qq': coefficient * q_a q_b / hbar; 'qp': coefficient * q_a d_b; 'pp': hbar d_a d_b;
    'c': constant.
    """
    if check and not A.is_infinitesimally_symplectic():
        raise NotInfinitesimallySymplectic("A*(-z) + A(z) != 0")
    h = quadratic_hamiltonian(A, K, copy)
    ops = []
    for mono, c in h.sorted_terms():
        qs = [v for v, e in mono for _ in range(e) if v[0] == "q"]
        ps = [("q",) + v[1:] for v, e in mono for _ in range(e) if v[0] == "P"]
        if len(qs) + len(ps) != 2:
            raise ArithmeticError(f"non-quadratic term {mono}")
        if len(qs) == 2:
            ops.append(("qq", c, tuple(qs)))
        elif len(ps) == 2:
            ops.append(("pp", c, tuple(ps)))
        else:
            ops.append(("qp", c, (qs[0], ps[0])))
    return ops


def apply_quadratic(ops, tau: Poly) -> Poly:
    n = tau.n
    out = Poly(n, {}, tau.cap)
    eps = EPS
    for kind, c, vs in ops:
        if kind == "qq":
            term = Poly.monomial(n, {vs[0]: 1, eps: -2}, c) * Poly.var(n, vs[1]) * tau
        elif kind == "qp":
            term = Poly.var(n, vs[0], c) * tau.diff(vs[1])
        else:
            term = (tau.diff(vs[0]).diff(vs[1]) * Poly.monomial(n, {eps: 2}, c))
        out = out + term
    return out


def exp_quadratic(ops, tau: Poly, sign=1, max_terms=10000) -> Poly:
    """e^{sign * A^} tau at the degree cap of tau (the operator must be locally nilpotent)."""
    if tau.cap is None:
        raise WindowError("tau needs a degree cap")
    if sign == -1:
        ops = [(k, -c, v) for k, c, v in ops]
    out = tau
    term = tau
    for j in range(1, max_terms):
        term = apply_quadratic(ops, term).scale(mpq(1, j))
        if not term.t:
            return out
        out = out + term
    raise WindowError("operator exponential did not terminate")


# -- W form and the conjugation formula ------------------------------------------

def _w_matrices(S: MatSeries):
    """W_{k,l} with k + l + 1 <= order, from (S*(w)S(z) - 1)/(w^-1 + z^-1)."""
    n = S.n
    d = S.order
    Sstar = {-e: _mat_adjoint(n, a) for e, a in S.m.items()}  # keyed by power of w^-1
    Sz = {-e: a for e, a in S.m.items()}
    N = {}
    for k, a in Sstar.items():
        for l, b in Sz.items():
            if k + l > d:
                continue
            p = _mat_mul(n, a, b)
            if k == 0 and l == 0:
                p = _mat_add(n, p, _mat_id(n), sb=-1)
            N[k, l] = _mat_add(n, N[k, l], p) if (k, l) in N else p
    W = {}
    zero = _mat_zero(n)
    for s in range(1, d + 1):
        prev = zero
        for a in range(s):
            cur = _mat_add(n, N.get((a, s - a), zero), prev, sb=-1)
            W[a, s - 1 - a] = cur
            prev = cur
        resid = _mat_add(n, N.get((s, 0), zero), prev, sb=-1)
        if not _mat_is_zero(resid):
            raise NotDivisible(f"numerator not divisible by (w^-1 + z^-1) in total degree {s}")
    if not _mat_is_zero(N.get((0, 0), zero)):
        raise NotDivisible("constant term of S*(w)S(z) - 1 is nonzero")
    return W


def w_form(S: MatSeries, f: HField, g: HField) -> Poly:
    """W(f, g) = sum (W_{k,l} g_l, f_k) over the nonnegative parts of f and g."""
    n = S.n
    W = _w_matrices(S)
    out = Poly(n, {})
    for k, fk in f.c.items():
        if k < 0:
            continue
        for l, gl in g.c.items():
            if l < 0:
                continue
            if k + l + 1 > S.order:
                raise WindowError(f"W_({k},{l}) needs S to order {k + l + 1}")
            mat = W[k, l]
            wg = [Poly(n, {}) for _ in range(n + 1)]
            for i in range(n + 1):
                for j in range(n + 1):
                    if mat[i][j].t and gl[j].t:
                        wg[i] = wg[i] + gl[j] * mat[i][j]
            out = out + _pair_vec(n, wg, fk)
    return out


def s_conjugation_check(S: SympSeries, f: HField, tau: Poly, K: int):
    """(S^ V_f S^-1 tau, e^{W(f+,f+)/2} V_{Sf} tau) with V the normal-ordered vertex operator.

    Variables with index above K are set to zero throughout; the terms containing them
    form an invariant subspace for every operator involved when S has only negative powers.
    """
    A = S.log()
    ops = quantize_quadratic(A, K)
    inner = exp_quadratic(ops, tau, sign=-1)
    inner = vertex_apply_full(_truncate_field(f, K), inner, K)
    lhs = exp_quadratic(ops, inner, sign=1)
    sf = _truncate_field(S.apply(f), K)
    w = w_form(S, f.plus(), f.plus()).scale(mpq(1, 2)).with_cap(tau.cap)
    rhs = vertex_apply_full(sf, tau, K)
    if w.t:
        rhs = w.exp() * rhs
    return lhs, rhs


# -- serialization ------------------------------------------------------------

_TRIPLE = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*:\s*(\d+)")


def dumps(tau: Poly) -> str:
    """One line per term: 'hbar-exponent | [(i,p,k):e,...] | scalar'."""
    lines = []
    for mono, c in tau.sorted_terms():
        h = Fraction(0)
        parts = []
        for v, e in mono:
            if v == EPS:
                h = Fraction(e, 2)
            elif v[0] == "q":
                parts.append(f"({v[2]},{v[3]},{v[4]}):{e}")
            elif v[0] == "x":
                parts.append(f"(0,0,0):{e}")
            else:
                raise ValueError(f"cannot serialize variable {v}")
        lines.append(f"{h} | [{','.join(parts)}] | {_scalar_str(c)}")
    return "\n".join(lines) + ("\n" if lines else "")


def _scalar_str(c: Scalar) -> str:
    try:
        return str(c.to_rational())
    except ArithmeticError:
        raise ValueError(f"only rational coefficients can be serialized, got {c}")


def loads(text: str, n: int, cap=None, merge_x=True) -> Poly:
    """Parse the line format; (0,0,0) is read as the variable x when merge_x is set."""
    labels = set(coh_basis(n))
    terms = Poly(n, {}, cap)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        fields = line.split("|")
        if len(fields) != 3:
            raise ParseError("expected 3 fields separated by '|'", lineno, 1)
        starts = [1, len(fields[0]) + 2, len(fields[0]) + len(fields[1]) + 3]
        col, start, col2 = (b + len(f) - len(f.lstrip()) for b, f in zip(starts, fields))
        try:
            h = Fraction(fields[0].strip())
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad hbar exponent {fields[0].strip()!r}", lineno, col)
        if (2 * h).denominator != 1:
            raise ParseError("hbar exponent must be a half-integer", lineno, col)
        mono_text = fields[1].strip()
        if not (mono_text.startswith("[") and mono_text.endswith("]")):
            raise ParseError("monomial must be enclosed in [ ]", lineno, start)
        body = mono_text[1:-1]
        mono = {EPS: int(2 * h)} if h else {}
        pos = 0
        while pos < len(body):
            if body[pos] in " ,":
                pos += 1
                continue
            mt = _TRIPLE.match(body, pos)
            if not mt:
                raise ParseError("expected '(i,p,k):exponent'", lineno, start + 1 + pos)
            i, p, k, e = (int(g) for g in mt.groups())
            if (i, p) not in labels or k < 0:
                raise ParseError(f"unknown variable ({i},{p},{k})", lineno, start + 1 + pos)
            key = ("x",) if (merge_x and (i, p, k) == (0, 0, 0)) else qvar(i, p, k)
            mono[key] = mono.get(key, 0) + e
            pos = mt.end()
        try:
            c = Fraction(fields[2].strip())
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad coefficient {fields[2].strip()!r}", lineno, col2)
        terms = terms + Poly.monomial(n, mono, as_mpq(c))
    return terms
