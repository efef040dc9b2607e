import random

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from orbihqe.fock import (
    HField,
    MatSeries,
    NotInfinitesimallySymplectic,
    ParseError,
    SympSeries,
    apply_quadratic,
    dumps,
    heisenberg_apply,
    loads,
    omega,
    qvar,
    quantize_quadratic,
    s_conjugation_check,
    translate,
    vertex_apply,
    w_form,
)
from orbihqe.identities import fock_instance, random_field, random_fock_tau, random_inf_symplectic, random_symplectic
from orbihqe.klattice import CohVector, coh_basis, poincare
from orbihqe.scalars import Scalar
from orbihqe.series import EPS, X, Poly

N = 4


def field_vec(f: HField, k):
    return CohVector(f.n, [x.constant() for x in f.c[k]]) if k in f.c else CohVector.zero(f.n)


def omega_oracle(f, g):
    """Res_{z=0} (f(-z), g(z)) by collecting the z^-1 coefficient pairwise."""
    out = Scalar.zero(f.n)
    for a in f.c:
        for b in g.c:
            if a + b == -1:
                out = out + poincare(field_vec(f, a), field_vec(g, b)).scale((-1) ** (a % 2))
    return out


def test_omega_example():
    for n in (4, 5, 6):
        f = HField.basis(n, 0, 0, 0)
        g = HField.dual(n, 0, 0, 0)
        assert omega(f, g) == -1
        assert omega(g, f) == 1


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from((4, 5)))
def test_omega_antisymmetric_bilinear_and_matches_oracle(seed, n):
    rng = random.Random(seed)
    f, g, h = (random_field(rng, n, -2, 1) for _ in range(3))
    assert omega(f, f).is_zero()
    assert omega(f, g) == -omega(g, f)
    assert omega(f + h, g) == omega(f, g) + omega(h, g)
    assert omega(f, g).constant() == omega_oracle(f, g)


def test_creation_and_annihilation_on_constants():
    n = N
    one = Poly.const(n, 1)
    for i, p in coh_basis(n):
        assert heisenberg_apply(HField.basis(n, i, p, 1), one).is_zero()
        got = heisenberg_apply(HField.dual(n, i, p, 1), one)
        assert got == Poly.monomial(n, {qvar(i, p, 1): 1, EPS: -1})


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_heisenberg_commutator(seed):
    rng = random.Random(seed)
    f, g = random_field(rng, N, -2, 1), random_field(rng, N, -2, 1)
    tau = random_fock_tau(rng, N, 1, None)
    lhs = heisenberg_apply(f, heisenberg_apply(g, tau, 1), 1) - heisenberg_apply(g, heisenberg_apply(f, tau, 1), 1)
    assert lhs == tau * omega(f, g)


def test_vertex_without_creation_is_translation():
    rng = random.Random(3)
    fp = random_field(rng, N, 0, 1)
    tau = random_fock_tau(rng, N, 1, 3)
    shifts = {}
    for k, vec in fp.c.items():
        for (i, p), c in zip(coh_basis(N), vec):
            if c.t:
                shifts[qvar(i, p, k)] = -(c * Poly.var(N, EPS))
    assert vertex_apply(fp, HField(N, {}), tau, 1) == translate(tau, shifts)


def test_vertex_creation_matches_power_sum():
    rng = random.Random(4)
    fm = random_field(rng, N, -2, -1, deform=True)
    one = Poly.const(N, 1, 3)
    lin = heisenberg_apply(fm, one)
    want, term = one, one
    for k in range(1, 4):
        term = (term * lin).scale(mpq(1, k))
        want = want + term
    assert vertex_apply(HField(N, {}), fm, one, 1) == want


@pytest.mark.parametrize("seed", range(4))
def test_fock_identities(seed):
    assert all(fock_instance(N, seed).values())


def test_quantization_of_zero_and_check():
    n = N
    zero = MatSeries(n, {}, 3)
    assert quantize_quadratic(zero, 1) == []
    # phi00 -> phi00 at order z^-1 is not self-adjoint for the Poincare pairing
    mat = [[Scalar.const(n, 1 if (i, j) == (0, 0) else 0) for j in range(n + 1)] for i in range(n + 1)]
    bad = MatSeries(n, {-1: mat}, 3)
    with pytest.raises(NotInfinitesimallySymplectic):
        quantize_quadratic(bad, 1)


def test_qq_part_multiplies():
    rng = random.Random(7)
    A = MatSeries(N, {-1: random_inf_symplectic(rng, N, 1)}, 3)
    ops = quantize_quadratic(A, 1)
    one = Poly.const(N, 1, 4)
    quad = Poly(N, {}, 4)
    for kind, c, vs in ops:
        if kind == "qq":
            quad = quad + Poly.monomial(N, {vs[0]: 1, EPS: -2}, c) * Poly.var(N, vs[1])
    assert apply_quadratic(ops, one) == quad


def test_identity_s_and_zero_f():
    rng = random.Random(11)
    S = SympSeries(N, dict(MatSeries.identity(N, 3).m), 3)
    f = random_field(rng, N, -2, 1, deform=True)
    tau = random_fock_tau(rng, N, 1, 3)
    lhs, rhs = s_conjugation_check(S, f, tau, 1)
    assert lhs == rhs == vertex_apply(f.plus(), f.minus(), tau, 1)
    S2, _ = random_symplectic(rng, N, 5)
    lhs, rhs = s_conjugation_check(S2, HField(N, {}), tau, 1)
    assert lhs == rhs == tau


def test_w_form_identity_symmetry_and_first_coefficient():
    rng = random.Random(5)
    f, g = random_field(rng, N, 0, 1), random_field(rng, N, 0, 1)
    ident = SympSeries(N, dict(MatSeries.identity(N, 4).m), 4)
    assert w_form(ident, f, g).is_zero()
    S, _ = random_symplectic(rng, N, 4)
    assert w_form(S, f, g) == w_form(S, g, f)
    # W_00 = S_1 for symplectic S
    for a in range(N + 1):
        for b in range(N + 1):
            fa = HField(N, {0: [1 if k == a else 0 for k in range(N + 1)]})
            gb = HField(N, {0: [1 if k == b else 0 for k in range(N + 1)]})
            s1b = CohVector(N, [S.m[-1][i][b] for i in range(N + 1)])
            ea = CohVector(N, [1 if k == a else 0 for k in range(N + 1)])
            assert w_form(S, fa, gb).constant() == poincare(s1b, ea)


# -- serialization -----------------------------------------------------------------

def test_round_trip():
    rng = random.Random(2)
    tau = random_fock_tau(rng, N, 2, 4, terms=8, with_x=True)
    text = dumps(tau)
    assert loads(text, N, 4) == tau
    assert dumps(loads(text, N, 4)) == text


@pytest.mark.parametrize(
    "text,line,col",
    [
        ("0 | [] | 1\n0 | [] \n", 2, 1),
        ("0 | [] | 1\nx | [] | 1\n", 2, 1),
        ("1/3 | [] | 1\n", 1, 1),
        ("0 | (1,1,0):1 | 1\n", 1, 5),
        ("0 | [(1,1,0):1, (9,9,0):1] | 1\n", 1, 17),
        ("0 | [(0,1,0)] | 1\n", 1, 6),
        ("0 | [] | one\n", 1, 10),
        ("  x | [] | 1\n", 1, 3),
    ],
)
def test_parse_errors_carry_position(text, line, col):
    with pytest.raises(ParseError) as exc:
        loads(text, N)
    assert (exc.value.line, exc.value.col) == (line, col)


def test_comments_and_x():
    tau = loads("# header\n0 | [(0,0,0):1] | 2  # x\n-1/2 | [(2,1,0):2] | 1/3\n", N)
    assert tau == Poly.var(N, X, 2) + Poly.monomial(N, {qvar(2, 1, 0): 2, EPS: -1}, mpq(1, 3))
