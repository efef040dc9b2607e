import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from orbihqe.series import EPS, X, DiffOp, Poly, WindowError, exp_shift_operator

N = 4
Q = [("q", 0, 0, 0, k) for k in range(3)]


@st.composite
def polys(draw, cap=3, with_x=True, min_degree=0):
    p = Poly(N, {}, cap)
    for _ in range(draw(st.integers(0, 4))):
        mono = {}
        for v in draw(st.lists(st.sampled_from(Q), min_size=min_degree, max_size=2)):
            mono[v] = mono.get(v, 0) + 1
        if with_x:
            mono[X] = draw(st.integers(0, 2))
        mono[EPS] = draw(st.integers(-1, 1))
        c = mpq(draw(st.integers(-3, 3)), draw(st.integers(1, 3)))
        p = p + Poly.monomial(N, mono, c, cap)
    return p


@st.composite
def diffops(draw):
    return DiffOp(N, {j: draw(polys()) for j in range(draw(st.integers(0, 2)) + 1)})


def apply(op: DiffOp, f: Poly) -> Poly:
    out = Poly(N, {}, f.cap)
    for j, a in op.c.items():
        g = f
        for _ in range(j):
            g = g.diff(X)
        out = out + a * g
    return out


@settings(max_examples=30, deadline=None)
@given(diffops(), diffops(), polys())
def test_compose_acts_like_composition(a, b, f):
    assert apply(a.compose(b), f) == apply(a, apply(b, f))


@settings(max_examples=30, deadline=None)
@given(diffops(), diffops())
def test_adjoint_is_antihomomorphic_involution(a, b):
    assert a.adjoint().adjoint() == a
    assert a.compose(b).adjoint() == b.adjoint().compose(a.adjoint())
    d = DiffOp(N, {1: Poly.const(N, 1)})
    assert d.adjoint() == d.scale(-1)


@settings(max_examples=30, deadline=None)
@given(polys(with_x=False, min_degree=1), polys())
def test_shift_operator_is_translation(u, f):
    shifted = f.subs({X: Poly.var(N, X) + u})
    assert apply(exp_shift_operator(u.with_cap(3)), f) == shifted.with_cap(3)


@settings(max_examples=30, deadline=None)
@given(polys(with_x=False, min_degree=1), polys(with_x=False, min_degree=1))
def test_exp_is_a_homomorphism(a, b):
    assert (a + b).exp() == a.exp() * b.exp()


def test_truncation_and_exp_errors():
    p = Poly.var(N, Q[0], cap=2)
    assert (p * p * p).is_zero()
    with pytest.raises(WindowError):
        Poly.const(N, 1, 3).exp()
    with pytest.raises(WindowError):
        Poly.var(N, Q[0]).exp()


def test_coeff_extraction():
    z = ("z",)
    p = Poly.monomial(N, {z: -2, Q[1]: 1}, 3) + Poly.monomial(N, {z: 1}, 5)
    assert p.coeff(z, -2) == Poly.var(N, Q[1], 3)
    assert p.coeff(z, 1) == 5
    assert p.coeff(z, 0).is_zero()
