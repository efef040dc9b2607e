import random
from math import factorial

import pytest
from gmpy2 import mpq

from orbihqe.dtoda import (
    NonInvertibleTau,
    TVars,
    admissible_tau,
    bilinear_defects,
    bilinear_sides,
    c_constant,
    make_psi,
    shift_x,
    tau_inverse,
    tvar,
)
from orbihqe.fock import qvar
from orbihqe.hqe import change_vars
from orbihqe.identities import random_fock_tau
from orbihqe.scalars import Scalar
from orbihqe.series import EPS, GRADED, X, DiffOp, Poly


def t_free(p: Poly) -> Poly:
    """The part of p of degree 0 in the times."""
    return Poly(p.n, {m: c for m, c in p.t.items() if not any(v[0] in GRADED for v, _ in m)})


def random_t_tau(seed, n=4, K=1):
    return change_vars("q->t", random_fock_tau(random.Random(seed), n, K, 3, with_x=True), K)


def test_vacuum_wave_functions_are_one():
    for n in (4, 5):
        one = Poly.const(n, 1, 3)
        for fam in (1, 2, 3):
            for side in (1, -1):
                assert make_psi(one, side, fam, 1).psi == 1


@pytest.mark.parametrize("seed", (0, 1, 3))
def test_family_one_head_is_x_shift(seed):
    tau = random_t_tau(seed)
    for side in (1, -1):
        w = make_psi(tau, side, 1, 1)
        assert w.coefficients()[0] == shift_x(tau, -side) * tau_inverse(tau)


def test_psi_two_hand_expansion():
    n = 4
    c = 3
    lin = Poly.monomial(n, {tvar(2, 1): 1, EPS: -1}, c, 3)
    tau = lin.exp()
    w = make_psi(tau, 1, 2, 1)
    coeffs = w.coefficients()
    for k in range(3):
        want = Poly.monomial(n, {EPS: -k}, mpq((-2 * c) ** k, factorial(k)))
        assert t_free(coeffs[k]) == want


def test_tau_inverse():
    tau = random_t_tau(5)
    assert (tau * tau_inverse(tau)).with_cap(3) == 1
    with pytest.raises(NonInvertibleTau):
        tau_inverse(Poly.var(4, tvar(0, 1), cap=3) + Poly.var(4, X, cap=3))


def test_time_window():
    tv = TVars(5, 1)
    assert tv.family(0) == [1]
    assert tv.family(1) == list(range(1, 7))
    assert tv.family(2) == tv.family(3) == [1, 3]


def test_m_parity_of_the_second_sector():
    # without family-3 times the third product is 1, so only the (-1)^m weight moves
    n, K = 4, 1
    rng = random.Random(9)
    tau = Poly.const(n, 1, 3)
    for _ in range(4):
        v = tvar(rng.choice((0, 1, 2)), 1)
        tau = tau + Poly.monomial(n, {v: 1, tvar(2, 1): 1, EPS: -2}, rng.randint(1, 3), 3)
    sides = {m: bilinear_sides(tau, m, [0, 1], K) for m in (-1, 0, 1, 2)}
    for r in (0, 1):
        assert sides[0][r][1] == sides[2][r][1]
        assert sides[1][r][1] == sides[-1][r][1]
        diff = sides[1][r][1] - sides[0][r][1]
        assert diff == (DiffOp.function(Poly.const(n, 1)) if r == 0 else DiffOp(n, {}))


@pytest.mark.parametrize("n", [4, 5, 6])
def test_vacuum_defect_closed_form(n):
    one = Poly.const(n, 1, 3)
    nq = Scalar.monomial(n, NQ=1)
    for m in range(-3, 4):
        res = bilinear_defects(one, m, [0, 1, 2], 1)
        for r, op in res.items():
            hits = (m + 1 == (n - 2) * r) + (1 - m == (n - 2) * r)
            lhs = (nq ** ((n - 2) * r)).scale(mpq(hits, factorial(r)))
            rhs = mpq(1 - (-1) ** (m % 2), 2) if r == 0 else 0
            got = op.map_coeffs(t_free)
            want = lhs - rhs
            assert got.c.get(0, Poly(n, {})) == Poly.const(n, want)
            assert set(got.c) <= {0}


def test_c_constant():
    n = 6
    c = c_constant(n)
    assert c ** 4 == Scalar.monomial(n, 4, NQ=4)


def test_admissible_tau():
    n = 4
    ok = Poly.monomial(n, {qvar(0, 1, 0): 1, qvar(0, 0, 0): 2, EPS: -2}, 1)
    assert admissible_tau(ok, n)
    bad = Poly.monomial(n, {qvar(0, 1, 0): 2, EPS: -2}, 1)
    assert not admissible_tau(bad, n)
    q_term = Poly.monomial(n, {qvar(1, 1, 0): 2, EPS: -2}, Scalar.monomial(n, NQ=2))
    assert admissible_tau(q_term, n)
    assert not admissible_tau(q_term.scale(Scalar.monomial(n, NQ=1)), n)
