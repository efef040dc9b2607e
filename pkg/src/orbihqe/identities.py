"""Identity suites shared by the CLI and the acceptance tests.

Every check yields a :class:`Check` record; suites are deterministic (fixed seeds,
canonical iteration order) so reports are byte-stable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import product

from gmpy2 import mpq

from .fock import (
    HField,
    MatSeries,
    SympSeries,
    _mat_adjoint,
    _truncate_field,
    apply_quadratic,
    heisenberg_apply,
    omega,
    qvar,
    quantize_quadratic,
    s_conjugation_check,
    vertex_apply,
    w_form,
    NotDivisible,
)
from .klattice import (
    KClass,
    chi,
    coh_basis,
    degree,
    eps,
    eps_labels,
    euler_pair,
    euler_pair_direct,
    inter_pair,
    psi_map,
    rank,
    reflect,
    reflection_vectors,
    sigma,
    sigma_inv,
    sigma_power,
    twisted_indices,
)
from .periods import calibrated_period, period_operator
from .phase import b_from_limit, b_tilde, lam_over, phase_closed, phase_direct, phase_limit_sides, phi_basis
from .scalars import Cyclotomic, NonRational, Scalar, field
from .series import EPS, X, Poly

__all__ = ["Check", "SUITES", "run_suite"]


@dataclass
class Check:
    suite: str
    ident: str
    params: str
    ok: bool
    witness: str = ""

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        tail = f"  witness: {self.witness}" if not self.ok and self.witness else ""
        return f"{status}  {self.suite:<9} {self.ident:<26} {self.params}{tail}"

    def record(self) -> dict:
        return {"suite": self.suite, "id": self.ident, "params": self.params,
                "status": "PASS" if self.ok else "FAIL", "witness": self.witness}


def _summary(suite, ident, params, failures):
    return Check(suite, ident, params, not failures, "; ".join(failures[:3]))


def _kc(n):
    return [KClass.basis(n, k) for k in range(n + 1)]


# -- lattice ------------------------------------------------------------------

def euler_table(n):
    """(label, computed, expected) rows of the Euler pairing table."""
    half = mpq(1, 2)
    rows = []
    e = {lab: eps(n, *lab) for lab in eps_labels(n)}
    for i in range(1, n - 2):
        for j in range(1, n - 2):
            rows.append((f"<e1_{i},e1_{j}>", euler_pair(e[1, i], e[1, j]), half if i <= j else -half))
    for i in range(1, n - 2):
        rows.append((f"<e1_{i},e2_1>", euler_pair(e[1, i], e[2, 1]), half))
        rows.append((f"<e2_1,e1_{i}>", euler_pair(e[2, 1], e[1, i]), -half))
        rows.append((f"<e1_{i},e3_1>", euler_pair(e[1, i], e[3, 1]), mpq(0)))
        rows.append((f"<e3_1,e1_{i}>", euler_pair(e[3, 1], e[1, i]), mpq(0)))
    rows.append(("<e2_1,e2_1>", euler_pair(e[2, 1], e[2, 1]), half))
    rows.append(("<e3_1,e3_1>", euler_pair(e[3, 1], e[3, 1]), half))
    rows.append(("<e2_1,e3_1>", euler_pair(e[2, 1], e[3, 1]), mpq(0)))
    rows.append(("<e3_1,e2_1>", euler_pair(e[3, 1], e[2, 1]), mpq(0)))
    return rows


def _line_power(n, i, m):
    if i == 1:
        return KClass.L1(n, m)
    base = KClass.L2(n) if i == 2 else KClass.L3(n)
    return base if m == 1 else KClass.one(n)


def intersection_table(n):
    a = field(n).a
    rows = []
    for i, j in product((1, 2, 3), repeat=2):
        for m in range(1, a[i]):
            for k in range(1, a[j]):
                got = inter_pair(_line_power(n, i, m), _line_power(n, j, k))
                if i != j:
                    want = 0
                else:
                    want = 2 if (m - k) % a[i] == 0 else 1
                rows.append((f"(L{i}^{m}|L{j}^{k})", got, mpq(want)))
    return rows


def suite_lattice(n, order):
    out = []
    fails = [f"{lab}={got}" for lab, got, want in euler_table(n) if got != want]
    out.append(_summary("lattice", "euler-table", f"n={n}", fails))
    fails = [f"{lab}={got}" for lab, got, want in intersection_table(n) if got != want]
    out.append(_summary("lattice", "intersection-table", f"n={n}", fails))
    kernel = KClass.L(n) - 1
    fails = [f"k={k}" for k, b in enumerate(_kc(n)) if inter_pair(kernel, b) != 0]
    out.append(_summary("lattice", "kernel-L-1", f"n={n}", fails))
    fails = []
    for a, b in product(_kc(n), repeat=2):
        if euler_pair(a, b) != euler_pair_direct(a, b):
            fails.append(f"{a},{b}")
    out.append(_summary("lattice", "euler-gram-vs-direct", f"n={n}", fails))
    return out


# -- roots --------------------------------------------------------------------

def sigma_expected(n, label):
    a, i = label
    L1 = KClass.L(n) - 1
    if a == 1:
        return eps(n, 1, i + 1) if i <= n - 3 else eps(n, 1, 1) + L1
    if a == 2:
        return -eps(n, 2, 1) + L1
    return -eps(n, 3, 1)


def suite_roots(n, order, m_range=3):
    out = []
    roots = reflection_vectors(n, m_range)
    fails = [str(r) for r in sorted(roots, key=str) if inter_pair(r, r) != 2]
    out.append(_summary("roots", "self-intersection-2", f"n={n} m_range={m_range}", fails))
    reduced = sorted({r.mod_kernel() for r in roots}, key=lambda k: tuple(k.c))
    count = len(reduced)
    ok = count == 2 * n * (n - 1)
    out.append(Check("roots", "count-mod-kernel", f"n={n}", ok, "" if ok else f"{count} != {2 * n * (n - 1)}"))
    rset = set(reduced)
    fails = []
    for a in reduced:
        for b in reduced:
            if reflect(a, b).mod_kernel() not in rset:
                fails.append(f"s_{a}({b})")
                break
    out.append(_summary("roots", "closure-under-reflection", f"n={n}", fails))
    fails = [f"{lab}" for lab in eps_labels(n) if sigma(eps(n, *lab)) != sigma_expected(n, lab)]
    out.append(_summary("roots", "sigma-on-eps", f"n={n}", fails))
    epsset = {(eps(n, *lab) * s).mod_kernel() for lab in eps_labels(n) for s in (1, -1)}
    fails = [str(v) for v in sorted(epsset, key=str) if sigma(v).mod_kernel() not in epsset]
    out.append(_summary("roots", "sigma-permutes-pm-eps", f"n={n}", fails))
    return out


# -- lemmas -------------------------------------------------------------------

def beta_zero(b: KClass) -> KClass:
    kappa = field(b.n).kappa
    total = KClass.zero(b.n)
    w = b
    for _ in range(kappa):
        total = total + w
        w = sigma(w)
    return total / kappa


def lemma_a_euler_b0(a, b):
    n = a.n
    b0 = beta_zero(b)
    ra, rb, da, db = rank(a), rank(b), degree(a), degree(b)
    first = euler_pair(a, b0) == ra * db - rb * da + ra * rb
    second = euler_pair(b0, a) == rb * da - ra * db + ra * rb * (mpq(1, n - 2) - 1)
    return first, second


def lemma_ab_tw(a, b, s):
    n = a.n
    F = field(n)
    btw = b - beta_zero(b)
    lhs = inter_pair(a, sigma_power(btw, s))
    rhs = Cyclotomic.rational(n, 0)
    for j, p in twisted_indices(n):
        aj = F.a[j]
        rhs = rhs + Cyclotomic.root(n, p * s, aj) * chi(j, p, a) * chi(j, aj - p, b) * mpq(1, aj)
    return rhs.is_rational() and rhs.to_rational() == lhs


def lemma_aux_id(a, b):
    kappa = field(a.n).kappa
    lhs = mpq(0)
    w = b
    for s in range(1, kappa + 1):
        w = sigma(w)
        lhs += (mpq(1, 2) - mpq(s, kappa)) * inter_pair(a, w)
    return lhs == -euler_pair(a, b) + rank(a) * degree(b) - rank(b) * degree(a)


def suite_lemmas(n, order):
    out = []
    basis = _kc(n)
    kappa = field(n).kappa
    f1, f2, ftw, faux, fserre, fsig, frat = [], [], [], [], [], [], []
    for (i, a), (j, b) in product(enumerate(basis), repeat=2):
        tag = f"({i},{j})"
        try:
            c1, c2 = lemma_a_euler_b0(a, b)
            if not c1:
                f1.append(tag)
            if not c2:
                f2.append(tag)
            for s in range(kappa):
                if not lemma_ab_tw(a, b, s):
                    ftw.append(f"{tag} s={s}")
            if not lemma_aux_id(a, b):
                faux.append(tag)
            if euler_pair(b, a) != -euler_pair(a, sigma_inv(b)):
                fserre.append(tag)
            if inter_pair(sigma(a), sigma(b)) != inter_pair(a, b):
                fsig.append(tag)
            euler_pair_direct(a, b)
        except NonRational as exc:
            frat.append(f"{tag}: {exc}")
    p = f"n={n}"
    out.append(_summary("lemmas", "a-euler-b0 (first)", p, f1))
    out.append(_summary("lemmas", "a-euler-b0 (second)", p, f2))
    out.append(_summary("lemmas", "ab-tw", p, ftw))
    out.append(_summary("lemmas", "aux-id", p, faux))
    out.append(_summary("lemmas", "serre-duality", p, fserre))
    out.append(_summary("lemmas", "sigma-isometry", p, fsig))
    out.append(_summary("lemmas", "symbols-cancel", p, frat))
    return out


# -- periods ------------------------------------------------------------------

def suite_periods(n, order):
    out = []
    fmat, fmon = [], []
    for k, a in enumerate(_kc(n)):
        for m in range(-4, 1):
            if calibrated_period(a, m).value != period_operator(psi_map(a), m):
                fmat.append(f"basis {k} m={m}")
        sa = sigma(a)
        for m in range(-4, 3):
            mono = tuple(v.monodromy() for v in calibrated_period(a, m).value)
            if mono != calibrated_period(sa, m).value:
                fmon.append(f"basis {k} m={m}")
    out.append(_summary("periods", "closed-vs-matrix-form", f"n={n} m=-4..0", fmat))
    out.append(_summary("periods", "monodromy-is-sigma", f"n={n} m=-4..2", fmon))
    return out


# -- phase --------------------------------------------------------------------

def suite_phase(n, order):
    out = []
    basis = _kc(n)
    fails = []
    for (i, a), (j, b) in product(enumerate(basis), repeat=2):
        d, c = phase_direct(a, b, order), phase_closed(a, b, order)
        if d != c:
            fails.append(f"({i},{j}) first diff {d.first_difference(c)}")
    out.append(_summary("phase", "direct-vs-closed", f"n={n} N={order}", fails))
    fails = []
    for lab in eps_labels(n):
        e = eps(n, *lab)
        d, c = phase_direct(e, -e, order), phase_closed(e, -e, order)
        if d != c:
            fails.append(f"{lab} first diff {d.first_difference(c)}")
    out.append(_summary("phase", "direct-vs-closed (e,-e)", f"n={n} N={order}", fails))
    fails = []
    phis = phi_basis(n)
    for (i, u), (j, v) in product(enumerate(phis), repeat=2):
        lhs, rhs = phase_limit_sides(u, v, order)
        if lhs != rhs:
            k = next(k for k in range(order + 1) if lhs[k] != rhs[k])
            fails.append(f"({i},{j}) x^{k}")
    out.append(_summary("phase", "phase-limit-identity", f"n={n} N={order}", fails))
    return out


def suite_btilde(n, order):
    from .hqe import pullback_b

    fails = []
    for lab in eps_labels(n):
        for sign in (1, -1):
            label = lab + (sign,)
            bt = b_tilde(n, label)
            if lam_over(bt) != b_from_limit(n, label) or pullback_b(n, label) != bt:
                fails.append(str(label))
    return [_summary("btilde", "three-way-agreement", f"n={n}", fails)]


# -- fock ---------------------------------------------------------------------

def _rs(rng, n):
    return Scalar.const(n, mpq(rng.randint(-3, 3), rng.randint(1, 3)))


def random_field(rng, n, lo, hi, deform=False):
    s = Poly.var(n, ("s",)) if deform else Poly.const(n, 1)
    return HField(n, {k: [s * _rs(rng, n) for _ in range(n + 1)] for k in range(lo, hi + 1)})


def random_fock_tau(rng, n, K, cap, terms=5, with_x=False):
    labels = coh_basis(n)
    t = Poly.const(n, 1, cap)
    for _ in range(terms):
        mono = {}
        for _ in range(rng.randint(1, 2)):
            i, p = labels[rng.randrange(len(labels))]
            k = rng.randint(0, K)
            if with_x and (i, p, k) == (0, 0, 0):
                continue
            v = qvar(i, p, k)
            mono[v] = mono.get(v, 0) + 1
        if with_x and rng.random() < 0.3:
            mono[X] = 1
        if rng.random() < 0.3:
            mono[EPS] = rng.choice((-1, 1))
        if not any(v[0] == "q" for v in mono):
            # keep the degree-0 part equal to 1 so that tau stays invertible
            continue
        t = t + Poly.monomial(n, mono, mpq(rng.randint(-3, 3), rng.randint(1, 2)), cap)
    return t


def random_inf_symplectic(rng, n, l):
    """A_l with A_l* = -(-1)^l A_l (the z^-l coefficient of an infinitesimally symplectic series)."""
    c = -((-1) ** l)
    B = [[_rs(rng, n) for _ in range(n + 1)] for _ in range(n + 1)]
    Bs = _mat_adjoint(n, B)
    return [[(B[i][j] + Bs[i][j].scale(c)).scale(mpq(1, 2)) for j in range(n + 1)] for i in range(n + 1)]


def random_symplectic(rng, n, order):
    A = MatSeries(n, {-1: random_inf_symplectic(rng, n, 1), -2: random_inf_symplectic(rng, n, 2)}, order)
    return SympSeries.from_series(A.exp()), A


def fock_instance(n, seed, K=1, cap=3):
    """One randomized instance of every Fock identity; returns {identity: ok}."""
    rng = random.Random(seed)
    res = {}
    f, g = random_field(rng, n, -K - 1, K), random_field(rng, n, -K - 1, K)
    tau = random_fock_tau(rng, n, K, None)
    lhs = heisenberg_apply(f, heisenberg_apply(g, tau, K), K) - heisenberg_apply(g, heisenberg_apply(f, tau, K), K)
    res["heisenberg-commutator"] = lhs == tau * omega(f, g)
    zero = HField(n, {})
    fp, gm = random_field(rng, n, 0, K, True), random_field(rng, n, -K - 1, -1, True)
    t = random_fock_tau(rng, n, K, cap + 1)
    left = vertex_apply(fp, zero, vertex_apply(zero, gm, t, K), K)
    right = omega(fp, gm).with_cap(cap + 1).exp() * vertex_apply(fp, gm, t, K)
    res["normal-ordering"] = left == right
    S, A = random_symplectic(rng, n, 2 * K + 3)
    ops = quantize_quadratic(A, K)
    one = Poly.const(n, 1, cap)
    qq = [o for o in ops if o[0] == "qq"]
    expect = Poly(n, {}, cap)
    for _, c, (u, v) in qq:
        expect = expect + Poly.monomial(n, {u: 1, EPS: -2}, c, cap) * Poly.var(n, v)
    # on 1 only the qq part survives and the q-p ordering adds no constant
    res["quantization-rules"] = apply_quadratic(ops, one) == expect
    mixed = MatSeries(n, {-1: random_inf_symplectic(rng, n, 1), 1: random_inf_symplectic(rng, n, -1)}, 2 * K + 3)
    mops = quantize_quadratic(mixed, K + 1)
    h = random_field(rng, n, -K - 1, K)
    t = random_fock_tau(rng, n, K + 1, None)
    comm = apply_quadratic(mops, heisenberg_apply(h, t, K + 1)) - heisenberg_apply(h, apply_quadratic(mops, t), K + 1)
    ah = _truncate_field(mixed.apply(h), K + 1)
    res["quantized-commutator"] = {o[0] for o in mops} == {"qq", "qp", "pp"} and comm == heisenberg_apply(ah, t, K + 1)
    res["w-divisible-iff-symplectic"] = S.is_symplectic() and _w_ok(S) and not _w_ok(_perturb(S, rng))
    fs = random_field(rng, n, -K - 1, K, True)
    lhs, rhs = s_conjugation_check(S, fs, random_fock_tau(rng, n, K, cap), K)
    res["s-conjugation"] = lhs == rhs
    return res


def _w_ok(S):
    n = S.n
    f = HField.basis(n, 0, 0, 0)
    try:
        w_form(S, f, f)
        return True
    except NotDivisible:
        return False


def _perturb(S, rng):
    n = S.n
    m = dict(S.m)
    bump = [[Scalar.zero(n)] * (n + 1) for _ in range(n + 1)]
    bump = [list(r) for r in bump]
    bump[0][1] = Scalar.const(n, 1)
    m[-1] = [[m[-1][i][j] + bump[i][j] for j in range(n + 1)] for i in range(n + 1)]
    return SympSeries(n, m, S.order)


def suite_fock(n, order, instances=3, seed=0):
    out = []
    agg = {}
    for k in range(instances):
        for ident, ok in fock_instance(n, seed + k).items():
            agg.setdefault(ident, []).append(None if ok else f"seed {seed + k}")
    for ident, res in agg.items():
        out.append(_summary("fock", ident, f"n={n} instances={instances} cap=3", [r for r in res if r]))
    return out


# -- hqe / dtoda --------------------------------------------------------------

def hqe_dtoda_instance(n, seed, K=1, cap=3, ms=range(-2, 3), rs=(0, 1, 2)):
    """Compare the HQE residuals with the cleared D-Toda defects for one random tau pair."""
    from .dtoda import dressed_defects
    from .hqe import change_vars, hqe_residuals

    rng = random.Random(seed)
    tau1 = random_fock_tau(rng, n, K, cap, with_x=True)
    tau2 = random_fock_tau(rng, n, K, cap, with_x=True)
    T1, T2 = change_vars("q->t", tau1, K), change_vars("q->t", tau2, K)
    fails = []
    for m in ms:
        h = hqe_residuals(tau1, tau2, m, list(rs), K)
        d = dressed_defects(T1, -m, list(rs), K, T2)
        for r in rs:
            if h[r] != change_vars("t->q", d[r], K).scale((-1) ** (m + 1)):
                fails.append(f"seed {seed} m={m} r={r}")
    return fails


def suite_hqe(n, order, instances=1, seed=0):
    fails = []
    for k in range(instances):
        fails += hqe_dtoda_instance(n, seed + k)
    return [_summary("hqe", "hqe-equals-dtoda", f"n={n} pairs={instances} cap=3 |m|<=2 r<=2", fails)]


SUITES = {
    "lattice": suite_lattice,
    "roots": suite_roots,
    "lemmas": suite_lemmas,
    "periods": suite_periods,
    "phase": suite_phase,
    "btilde": suite_btilde,
    "fock": suite_fock,
    "hqe": suite_hqe,
}


def run_suite(args):
    """Picklable entry point: (suite name, n, order) -> list of Check."""
    name, n, order = args
    return SUITES[name](n, order)
