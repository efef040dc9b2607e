import random

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from orbihqe.dtoda import bilinear_sides, tvar
from orbihqe.fock import qvar
from orbihqe.hqe import change_vars, hqe_residuals, one_form, pullback_b, q_window, sector_residual
from orbihqe.identities import hqe_dtoda_instance, random_fock_tau
from orbihqe.klattice import coh_basis, eps_labels
from orbihqe.phase import b_tilde
from orbihqe.scalars import Scalar
from orbihqe.series import EPS, X, Poly


def test_change_vars_examples():
    for n in (4, 5, 6):
        sqrt2 = Scalar.radical(n, 2, mpq(1, 2))
        t21 = change_vars("t->q", Poly.var(n, tvar(2, 1)), 1)
        want = (Poly.monomial(n, {qvar(2, 1, 0): 1, EPS: -1}) + Poly.monomial(n, {qvar(3, 1, 0): 1, EPS: -1}))
        assert t21 == want.scale(1) * Poly.const(n, sqrt2.inverse())
        t1 = change_vars("t->q", Poly.var(n, tvar(1, n - 2)), 1)
        assert t1 == Poly.monomial(n, {qvar(0, 1, 0): 1, EPS: -1}, mpq(1, n - 2))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from((4, 5, 6)), st.integers(1, 2))
def test_change_vars_round_trip(seed, n, K):
    tau = random_fock_tau(random.Random(seed), n, K, 3, with_x=True)
    assert change_vars("t->q", change_vars("q->t", tau, K), K) == tau
    for v in q_window(n, K):
        p = Poly.var(n, v)
        assert change_vars("t->q", change_vars("q->t", p, K), K) == p


def test_sector_three_is_even_in_z():
    n, K = 4, 1
    tau = random_fock_tau(random.Random(1), n, K, 3, with_x=True)
    from orbihqe.hqe import _sector_operators

    op = _sector_operators(3, tau, tau, 0, K)
    same = op.map_coeffs(lambda p: p.map_vars(lambda v: ("q", 1) + v[2:] if v[0] == "q" else v))
    for p in same.c.values():
        assert all(dict(m).get(("z",), 0) % 2 == 0 for m in p.t)


def _flip_q31(p: Poly) -> Poly:
    return p.subs({v: Poly.var(p.n, v, -1) for v in p.variables() if v[0] == "q" and v[2:4] == (3, 1)})


@pytest.mark.parametrize("m", [-1, 0, 1, 2])
def test_sectors_two_and_three_swap_under_t2_t3(m):
    n, K = 4, 1
    tau = random_fock_tau(random.Random(1), n, K, 3, with_x=True)
    sym = tau + _flip_q31(tau)
    r2 = sector_residual(2, sym, sym, m, 1, K).value
    r3 = sector_residual(3, sym, sym, m, 1, K).value
    assert r3 == r2.map_coeffs(_flip_q31).scale(-((-1) ** (m % 2)))


@pytest.mark.parametrize("n", [4, 5])
def test_vacuum_sectors_match_wave_function_sides(n):
    K = 1
    one = Poly.const(n, 1, 3)
    for m in range(-2, 3):
        sign = (-1) ** ((m + 1) % 2)
        for r in (0, 1, 2):
            s1, s2, s3 = (sector_residual(k, one, one, m, r, K).value for k in (1, 2, 3))
            lhs, rhs = bilinear_sides(one, -m, [r], K)[r]
            assert s1 == change_vars("t->q", lhs, K).scale(sign)
            assert s2 + s3 == change_vars("t->q", rhs, K).scale(-sign)


def _weight(n, v):
    a = (1, n - 2, 2, 2)
    if v in (EPS, X):
        return mpq(-1)
    _, _, i, p, k = v
    return k + mpq(p, a[i]) - 1


def _graded_tau(rng, n, K):
    labels = [(i, p, k) for i, p in coh_basis(n) for k in range(K + 1) if (i, p, k) != (0, 0, 0)]
    tau = Poly.const(n, 1, 3)
    while len(tau.t) < 5:
        mono = {}
        for _ in range(rng.randint(1, 2)):
            v = qvar(*rng.choice(labels))
            mono[v] = mono.get(v, 0) + 1
        if rng.random() < 0.3:
            mono[X] = 1
        w = sum((_weight(n, v) * e for v, e in mono.items()), mpq(0))
        if w.denominator != 1:
            continue
        mono[EPS] = int(w)
        tau = tau + Poly.monomial(n, mono, rng.randint(1, 3), 3)
    return tau


@settings(max_examples=4, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_residual_is_homogeneous(seed):
    n, K = 4, 1
    rng = random.Random(seed)
    t1, t2 = _graded_tau(rng, n, K), _graded_tau(rng, n, K)
    for m in (-1, 0, 1):
        for r, op in hqe_residuals(t1, t2, m, [0, 1], K).items():
            for j, p in op.c.items():
                for mono, c in p.t.items():
                    base = sum((_weight(n, v) * e for v, e in mono), mpq(0)) + j
                    for smono in c.t:
                        assert base - mpq(dict(smono).get("NQ", 0), n - 2) == -r


def test_hqe_equals_dtoda_one_pair():
    assert hqe_dtoda_instance(4, 0, ms=range(-1, 2), rs=(0, 1)) == []


@pytest.mark.parametrize("n", [4, 5, 6, 7, 8])
def test_one_form_pullbacks(n):
    for a, i in eps_labels(n):
        for sign in (1, -1):
            assert pullback_b(n, (a, i, sign)) == b_tilde(n, (a, i, sign))
    assert one_form(n, (2, 1, 1)) == (Scalar.const(n, mpq(-1, 2)), -1)
    assert one_form(n, (3, 1, 1)) == (Scalar.const(n, mpq(1, 2)), -1)
