from itertools import product

import pytest
import sympy
from gmpy2 import mpq

from orbihqe.klattice import KClass, eps, eps_labels, inter_pair, sigma_power
from orbihqe.periods import PuiseuxLog
from orbihqe.phase import b_from_limit, b_tilde, lam_over, phase_closed, phase_direct, phase_limit_sides, phi_basis
from orbihqe.scalars import Cyclotomic, Scalar, field


def sym_to_mpq(c):
    return mpq(int(c.p), int(c.q))


@pytest.mark.parametrize("n", (4, 5, 6))
def test_eps3_phase_is_log_ratio(n):
    kappa = field(n).kappa
    N = 3 * kappa
    x = sympy.Symbol("x")
    ref = sympy.series(sympy.log((1 - x ** kappa) / (1 - x ** (kappa // 2)) ** 2), x, 0, N + 1).removeO()
    e = eps(n, 3, 1)
    d = phase_direct(e, -e, N)
    assert d.head_log.is_zero() and d.head_const.is_zero()
    for k in range(1, N + 1):
        assert d.coeffs[k] == sym_to_mpq(ref.coeff(x, k))


@pytest.mark.parametrize("n", (4, 5))
def test_direct_matches_closed_on_basis(n):
    basis = [KClass.basis(n, k) for k in range(n + 1)]
    for a, b in product(basis, repeat=2):
        assert phase_direct(a, b, 8) == phase_closed(a, b, 8)


def test_zero_and_rank_zero():
    n = 5
    z = phase_closed(eps(n, 1, 1), KClass.zero(n), 6)
    assert z.head_log.is_zero() and z.head_const.is_zero() and all(c.is_zero() for c in z.coeffs)
    e2, e3 = eps(n, 3, 1), KClass.L2(n) - KClass.L3(n)
    d = phase_direct(e2, e3, 6)
    assert d.head_log.is_zero()


def test_sigma_exponent_pattern():
    for n in (4, 5, 6):
        kappa = field(n).kappa
        for i in range(1, n - 1):
            e = eps(n, 1, i)
            for s in range(1, kappa + 1):
                want = 1 if s % (n - 2) == 0 else 0
                assert inter_pair(e, sigma_power(e, s)) == want


@pytest.mark.parametrize("n", (4, 5, 6, 7, 8))
def test_b_tilde_values(n):
    assert b_tilde(n, (2, 1, 1)) == PuiseuxLog(n, {(0, 0): Scalar.const(n, mpq(-1, 4))})
    assert b_tilde(n, (3, 1, 1)) == PuiseuxLog(n, {(0, 0): Scalar.const(n, mpq(1, 4))})
    for i in range(1, n - 1):
        coeff = Scalar.monomial(n, Cyclotomic.root(n, -i, n - 2).scale(mpq(1, n - 2)), NQ=1)
        want = PuiseuxLog(n, {(mpq(-1, n - 2), 0): coeff})
        assert b_tilde(n, (1, i, 1)) == want
        assert b_tilde(n, (1, i, -1)) == want


@pytest.mark.parametrize("n", (4, 5, 6, 7, 8))
def test_b_from_limit_values(n):
    assert b_from_limit(n, (3, 1, 1)) == PuiseuxLog(n, {(1, 0): Scalar.const(n, 4)})
    assert b_from_limit(n, (2, 1, 1)) == PuiseuxLog(n, {(1, 0): Scalar.const(n, -4)})
    for i in range(1, n - 1):
        c = Scalar.monomial(n, Cyclotomic.root(n, i, n - 2).scale(n - 2), NQ=-1)
        assert b_from_limit(n, (1, i, 1)) == PuiseuxLog(n, {(1 + mpq(1, n - 2), 0): c})
    for a, i in eps_labels(n):
        for sign in (1, -1):
            assert lam_over(b_tilde(n, (a, i, sign))) == b_from_limit(n, (a, i, sign))


@pytest.mark.parametrize("n", (4, 5))
def test_phase_limit_identity(n):
    for u, v in product(phi_basis(n), repeat=2):
        lhs, rhs = phase_limit_sides(u, v, 10)
        assert lhs == rhs
