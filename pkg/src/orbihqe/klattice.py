"""K-ring of the orbifold line with isotropy orders (n-2, 2, 2), its pairings and roots.

Basis of K:  1, L1, ..., L1^(n-3), L2, L3, L   (index 0 .. n)
Basis of H:  phi00, phi01, phi11, ..., phi1(n-3), phi21, phi31
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product

from gmpy2 import mpq

from .scalars import Cyclotomic, Scalar, as_mpq, field

__all__ = [
    "CohVector",
    "KClass",
    "NotARoot",
    "chi",
    "coh_basis",
    "degree",
    "eps",
    "eps_labels",
    "euler_pair",
    "h_euler_pair",
    "h_inter_pair",
    "h_sigma",
    "inter_pair",
    "k_mul",
    "poincare",
    "psi_map",
    "rank",
    "reflect",
    "reflection_vectors",
    "rho_apply",
    "sigma",
    "sigma_inv",
    "theta_apply",
    "twisted_indices",
]


class NotARoot(ValueError):
    pass


def _check_n(n):
    if n < 4:
        raise ValueError(f"n must be at least 4, got {n}")


class KClass:
    """Rational combination of the K-ring basis."""

    __slots__ = ("n", "c")

    def __init__(self, n: int, coeffs):
        _check_n(n)
        coeffs = tuple(as_mpq(x) for x in coeffs)
        if len(coeffs) != n + 1:
            raise ValueError(f"expected {n + 1} coefficients, got {len(coeffs)}")
        self.n = n
        self.c = coeffs

    @classmethod
    def zero(cls, n):
        return cls(n, [0] * (n + 1))

    @classmethod
    def basis(cls, n, k):
        c = [0] * (n + 1)
        c[k] = 1
        return cls(n, c)

    @classmethod
    def one(cls, n):
        return cls.basis(n, 0)

    @classmethod
    def L1(cls, n, k=1):
        """L1^k for 0 <= k <= n-2 (L1^(n-2) = L)."""
        if k == 0:
            return cls.one(n)
        if k == n - 2:
            return cls.basis(n, n)
        return cls.basis(n, k)

    @classmethod
    def L2(cls, n):
        return cls.basis(n, n - 2)

    @classmethod
    def L3(cls, n):
        return cls.basis(n, n - 1)

    @classmethod
    def L(cls, n):
        return cls.basis(n, n)

    def __add__(self, other):
        if not isinstance(other, KClass):
            other = KClass.one(self.n) * other
        return KClass(self.n, [a + b for a, b in zip(self.c, other.c)])

    __radd__ = __add__

    def __neg__(self):
        return KClass(self.n, [-a for a in self.c])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, KClass):
            return k_mul(self, other)
        q = as_mpq(other)
        return KClass(self.n, [a * q for a in self.c])

    __rmul__ = __mul__

    def __truediv__(self, q):
        q = as_mpq(q)
        return KClass(self.n, [a / q for a in self.c])

    def __eq__(self, other):
        return isinstance(other, KClass) and self.n == other.n and self.c == other.c

    def __hash__(self):
        return hash((self.n, self.c))

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for x in self.c)

    def is_zero(self) -> bool:
        return not any(self.c)

    def mod_kernel(self) -> "KClass":
        """Canonical representative modulo Z(L - 1): L-coefficient in [0, 1)."""
        k = self.c[-1].numerator // self.c[-1].denominator
        if not k:
            return self
        c = list(self.c)
        c[-1] -= k
        c[0] += k
        return KClass(self.n, c)

    def __str__(self):
        names = basis_names(self.n)
        parts = []
        for name, x in zip(names, self.c):
            if x:
                parts.append(f"{x}*{name}" if name != "1" else str(x))
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"KClass({self})"


def basis_names(n):
    return ["1"] + [f"L1^{k}" if k > 1 else "L1" for k in range(1, n - 2)] + ["L2", "L3", "L"]


# -- ring structure -----------------------------------------------------------

def _reduce_monomial(n, e1, e2, e3, eL):
    """Normal form of L1^e1 L2^e2 L3^e3 L^eL as a dict basis-index -> coefficient."""
    a1 = n - 2
    if e1 >= a1:
        return _reduce_monomial(n, e1 - a1, e2, e3, eL + 1)
    if e2 >= 2:
        return _reduce_monomial(n, e1, e2 - 2, e3, eL + 1)
    if e3 >= 2:
        return _reduce_monomial(n, e1, e2, e3 - 2, eL + 1)
    if eL >= 2:  # L^2 = 2L - 1
        out = {}
        _acc(out, _reduce_monomial(n, e1, e2, e3, eL - 1), 2)
        _acc(out, _reduce_monomial(n, e1, e2, e3, eL - 2), -1)
        return out
    present = [k for k, e in ((1, e1), (2, e2), (3, e3)) if e]
    if len(present) >= 2:  # L_i L_j = L_i + L_j - 1
        i, j = present[:2]
        ex = [e1, e2, e3]
        ex[i - 1] -= 1
        ex[j - 1] -= 1
        out = {}
        for k, s in ((i, 1), (j, 1), (None, -1)):
            ey = list(ex)
            if k is not None:
                ey[k - 1] += 1
            _acc(out, _reduce_monomial(n, *ey, eL), s)
        return out
    if eL == 1 and present:  # L L_i = L_i + L - 1
        i = present[0]
        ex = [e1, e2, e3]
        ex[i - 1] -= 1
        out = {}
        ey = list(ex)
        ey[i - 1] += 1
        _acc(out, _reduce_monomial(n, *ey, 0), 1)
        _acc(out, _reduce_monomial(n, *ex, 1), 1)
        _acc(out, _reduce_monomial(n, *ex, 0), -1)
        return out
    if eL == 1:
        return {n: 1}
    if e1:
        return {e1: 1}
    if e2:
        return {n - 2: 1}
    if e3:
        return {n - 1: 1}
    return {0: 1}


def _acc(out, d, s):
    for k, v in d.items():
        out[k] = out.get(k, 0) + s * v
        if not out[k]:
            del out[k]


def _basis_exponents(n, k):
    if k == 0:
        return (0, 0, 0, 0)
    if k <= n - 3:
        return (k, 0, 0, 0)
    if k == n - 2:
        return (0, 1, 0, 0)
    if k == n - 1:
        return (0, 0, 1, 0)
    return (0, 0, 0, 1)


@lru_cache(maxsize=None)
def _mult_table(n):
    table = {}
    for a in range(n + 1):
        ea = _basis_exponents(n, a)
        for b in range(n + 1):
            eb = _basis_exponents(n, b)
            table[a, b] = _reduce_monomial(n, *(x + y for x, y in zip(ea, eb)))
    return table


def k_mul(a: KClass, b: KClass) -> KClass:
    if a.n != b.n:
        raise ValueError(f"mismatched n: {a.n} vs {b.n}")
    n = a.n
    table = _mult_table(n)
    out = [mpq(0)] * (n + 1)
    for i, x in enumerate(a.c):
        if not x:
            continue
        for j, y in enumerate(b.c):
            if not y:
                continue
            for k, v in table[i, j].items():
                out[k] += x * y * v
    return KClass(n, out)


def tangent_class(n) -> KClass:
    return KClass.L1(n) + KClass.L2(n) + KClass.L3(n) - KClass.L(n) - 1


def _solve(matrix, rhs):
    """Gaussian elimination over Q; matrix is a list of rows."""
    size = len(matrix)
    aug = [list(row) + [r] for row, r in zip(matrix, rhs)]
    for col in range(size):
        piv = next(r for r in range(col, size) if aug[r][col])
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(size):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[-1] for row in aug]


@lru_cache(maxsize=None)
def _tangent_inverse(n) -> KClass:
    tp = tangent_class(n)
    cols = [k_mul(tp, KClass.basis(n, k)).c for k in range(n + 1)]
    matrix = [[cols[k][r] for k in range(n + 1)] for r in range(n + 1)]
    rhs = KClass.one(n).c
    return KClass(n, _solve(matrix, rhs))


def sigma(a: KClass) -> KClass:
    """Classical monodromy: multiplication by the tangent class."""
    return k_mul(a, tangent_class(a.n))


def sigma_inv(a: KClass) -> KClass:
    return k_mul(a, _tangent_inverse(a.n))


def sigma_power(a: KClass, s: int) -> KClass:
    step = sigma if s >= 0 else sigma_inv
    for _ in range(abs(s)):
        a = step(a)
    return a


# -- characters ---------------------------------------------------------------

def twisted_indices(n):
    """(j, p) labels of twisted sectors in basis order."""
    return [(1, p) for p in range(1, n - 2)] + [(2, 1), (3, 1)]


def rank(a: KClass) -> mpq:
    return sum(a.c, mpq(0))


def degree(a: KClass) -> mpq:
    n = a.n
    d = mpq(0)
    for k in range(1, n - 2):
        d += a.c[k] * mpq(k, n - 2)
    d += (a.c[n - 2] + a.c[n - 1]) * mpq(1, 2)
    d += a.c[n]
    return d


def chi(j: int, p: int, a: KClass) -> Cyclotomic:
    n = a.n
    aj = field(n).a[j] if 1 <= j <= 3 else 0
    if not (1 <= j <= 3 and 1 <= p <= aj - 1):
        raise ValueError(f"character index out of range: ({j}, {p})")
    vals = [Cyclotomic.rational(n, 1)] * (n + 1)
    if j == 1:
        for k in range(1, n - 2):
            vals[k] = Cyclotomic.root(n, -p * k, n - 2)
    else:
        idx = n - 2 if j == 2 else n - 1
        vals[idx] = Cyclotomic.root(n, -p, 2)
    out = Cyclotomic.rational(n, 0)
    for x, v in zip(a.c, vals):
        if x:
            out = out + v.scale(x)
    return out


# -- epsilon basis ------------------------------------------------------------

def eps_labels(n):
    return [(1, i) for i in range(1, n - 1)] + [(2, 1), (3, 1)]


def eps(n, a, i=1) -> KClass:
    half = mpq(1, 2)
    L2, L3 = KClass.L2(n), KClass.L3(n)
    if a == 1:
        if not 1 <= i <= n - 2:
            raise ValueError(f"eps^1_{i} out of range")
        return KClass.L1(n, i) + (L2 + L3) * half - 1
    if a == 2 and i == 1:
        return (L2 + L3) * half - 1
    if a == 3 and i == 1:
        return (L2 - L3) * half
    raise ValueError(f"no epsilon vector with label ({a}, {i})")


# -- cohomology side ----------------------------------------------------------

def coh_basis(n):
    """(i, p) labels of H in basis order."""
    return [(0, 0), (0, 1)] + twisted_indices(n)


def _sector_order(n, i):
    return 1 if i == 0 else field(n).a[i]


class CohVector:
    """H-valued vector with Scalar coefficients."""

    __slots__ = ("n", "c")

    def __init__(self, n, comps):
        comps = tuple(x if isinstance(x, Scalar) else Scalar.const(n, x) for x in comps)
        if len(comps) != n + 1:
            raise ValueError(f"expected {n + 1} components")
        self.n = n
        self.c = comps

    @classmethod
    def zero(cls, n):
        return cls(n, [0] * (n + 1))

    @classmethod
    def basis(cls, n, i, p):
        k = coh_basis(n).index((i, p))
        c = [0] * (n + 1)
        c[k] = 1
        return cls(n, c)

    def __add__(self, other):
        return CohVector(self.n, [a + b for a, b in zip(self.c, other.c)])

    def __neg__(self):
        return CohVector(self.n, [-a for a in self.c])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, s):
        return CohVector(self.n, [a * s for a in self.c])

    __rmul__ = __mul__

    def __getitem__(self, label):
        return self.c[coh_basis(self.n).index(label)]

    def __eq__(self, other):
        return isinstance(other, CohVector) and self.n == other.n and self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def __str__(self):
        parts = []
        for (i, p), x in zip(coh_basis(self.n), self.c):
            if x:
                parts.append(f"({x})*phi{i}{p}")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"CohVector({self})"


def _dual_index(n, k):
    i, p = coh_basis(n)[k]
    a = _sector_order(n, i)
    q = 1 - p if i == 0 else a - p
    return coh_basis(n).index((i, q)), mpq(1, a)


def poincare(u: CohVector, v: CohVector) -> Scalar:
    n = u.n
    out = Scalar.zero(n)
    for k in range(n + 1):
        if u.c[k]:
            kk, w = _dual_index(n, k)
            if v.c[kk]:
                out = out + (u.c[k] * v.c[kk]).scale(w)
    return out


def theta_eigen(n, k) -> mpq:
    i, p = coh_basis(n)[k]
    return mpq(1, 2) - mpq(p, _sector_order(n, i))


def theta_apply(v: CohVector) -> CohVector:
    return CohVector(v.n, [x.scale(theta_eigen(v.n, k)) for k, x in enumerate(v.c)])


def rho_apply(v: CohVector) -> CohVector:
    n = v.n
    c = [Scalar.zero(n)] * (n + 1)
    c[1] = v.c[0].scale(mpq(1, n - 2))
    return CohVector(n, c)


def exp_pi_i_theta(v: CohVector, sign: int = 1) -> CohVector:
    """e^{sign * pi i theta} v; each eigenvalue is a root of unity in Q(zeta_M)."""
    n = v.n
    out = []
    for k, x in enumerate(v.c):
        t = theta_eigen(n, k) * sign
        out.append(x * Cyclotomic.root(n, int(t.numerator), int(2 * t.denominator)))
    return CohVector(n, out)


def _two_pi_i(n) -> Scalar:
    return Scalar.monomial(n, Cyclotomic.root(n, 1, 4) * 2, Pi=1)


def psi_map(a: KClass) -> CohVector:
    n = a.n
    rk, dg = rank(a), degree(a)
    gamma = Scalar.monomial(n, EG=1) + Scalar.monomial(n, n - 2, LQ=1)
    comps = [Scalar.const(n, rk), -gamma.scale(rk / (n - 2)) + _two_pi_i(n).scale(dg)]
    for j, p in twisted_indices(n):
        aj = field(n).a[j]
        comps.append(Scalar.gamma_value(n, j, aj - p) * chi(j, p, a))
    return CohVector(n, comps)


def h_euler_pair(u: CohVector, v: CohVector) -> Scalar:
    """(1/2pi)(u, e^{pi i theta} e^{pi i rho} v) on H."""
    n = u.n
    pi_i = Scalar.monomial(n, Cyclotomic.root(n, 1, 4), Pi=1)
    w = v + rho_apply(v) * pi_i
    w = exp_pi_i_theta(w)
    return poincare(u, w) * Scalar.monomial(n, mpq(1, 2), Pi=-1)


def h_inter_pair(u: CohVector, v: CohVector) -> Scalar:
    return h_euler_pair(u, v) + h_euler_pair(v, u)


def h_sigma(v: CohVector) -> CohVector:
    """Monodromy on H: phi00 -> phi00 + 2 pi i phi01/(n-2), phi_{j,p} -> eta_j^{-p} phi_{j,p}."""
    n = v.n
    c = list(v.c)
    c[1] = c[1] + c[0] * _two_pi_i(n).scale(mpq(1, n - 2))
    for k, (j, p) in enumerate(twisted_indices(n), start=2):
        c[k] = c[k] * Cyclotomic.root(n, -p, field(n).a[j])
    return CohVector(n, c)


@lru_cache(maxsize=None)
def _psi_basis(n):
    return [psi_map(KClass.basis(n, k)) for k in range(n + 1)]


@lru_cache(maxsize=None)
def _euler_gram(n):
    psis = _psi_basis(n)
    return [[h_euler_pair(psis[a], psis[b]).to_rational() for b in range(n + 1)] for a in range(n + 1)]


def euler_pair(a: KClass, b: KClass) -> mpq:
    """Euler pairing via the Gamma-modified Chern character; raises NonRational on failure."""
    if a.n != b.n:
        raise ValueError("mismatched n")
    gram = _euler_gram(a.n)
    out = mpq(0)
    for i, x in enumerate(a.c):
        if x:
            for j, y in enumerate(b.c):
                if y:
                    out += x * y * gram[i][j]
    return out


def euler_pair_direct(a: KClass, b: KClass) -> mpq:
    """Same value without the cached Gram matrix (evaluates the Scalar expression)."""
    return h_euler_pair(psi_map(a), psi_map(b)).to_rational()


def inter_pair(a: KClass, b: KClass) -> mpq:
    return euler_pair(a, b) + euler_pair(b, a)


# -- roots --------------------------------------------------------------------

def reflect(a: KClass, x: KClass) -> KClass:
    if inter_pair(a, a) != 2:
        raise NotARoot(f"(a|a) = {inter_pair(a, a)} for a = {a}")
    return x - a * inter_pair(a, x)


def reflection_vectors(n: int, m_range: int) -> set:
    if m_range < 0:
        raise ValueError("m_range must be nonnegative")
    vecs = [eps(n, *lab) for lab in eps_labels(n)]
    kernel = KClass.L(n) - 1
    out = set()
    for i, u in enumerate(vecs):
        for v in vecs[i + 1:]:
            for s1, s2 in product((1, -1), repeat=2):
                base = u * s1 + v * s2
                for m in range(-m_range, m_range + 1):
                    out.add(base + kernel * m)
    return out
