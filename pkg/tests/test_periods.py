from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from orbihqe.klattice import KClass, chi, eps, psi_map, rank, sigma, twisted_indices
from orbihqe.periods import PuiseuxLog, calibrated_period, f_tilde, harmonic, period_operator
from orbihqe.scalars import Cyclotomic, Scalar


def lam(n, r, c=1, e=0):
    return PuiseuxLog(n, {(r, e): Scalar.const(n, c) if not isinstance(c, Scalar) else c})


@st.composite
def kclasses(draw, n):
    return KClass(n, draw(st.lists(st.integers(-2, 2), min_size=n + 1, max_size=n + 1)))


def test_unit_class_period():
    for n in (4, 5, 6):
        cp = calibrated_period(KClass.one(n), -1)
        assert cp.component(0, 0) == lam(n, 1)


def test_m_zero_matches_gamma_normalized_form():
    for n in (4, 5, 6):
        for k in range(n + 1):
            a = KClass.basis(n, k)
            cp = calibrated_period(a, 0)
            assert cp.value == period_operator(psi_map(a), 0)
            assert cp.component(0, 0) == lam(n, 0, rank(a))
            assert cp.component(0, 1).t.get((mpq(-1), 0)) == Scalar.const(n, rank(a) / (n - 2))
            for j, p in twisted_indices(n):
                x = mpq(p, (1, n - 2, 2, 2)[j])
                assert cp.component(j, p) == lam(n, -x, Scalar.const(n, chi(j, p, a)))


def test_log_constant_uses_harmonic_numbers():
    n = 5
    a = KClass.one(n)
    two = calibrated_period(a, -3).component(0, 1)
    # lam^2/2 ((log lam - 3 LQ - h_2)/3)
    const = -(Scalar.monomial(n, n - 2, LQ=1) + harmonic(2)).scale(mpq(1, 2 * (n - 2)))
    assert two == lam(n, 2, mpq(1, 2 * (n - 2)), 1) + lam(n, 2, const)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from((4, 5, 6)), st.data())
def test_derivative_steps_m(n, data):
    a = data.draw(kclasses(n))
    for m in range(-5, 5):
        lo, hi = calibrated_period(a, m).value, calibrated_period(a, m + 1).value
        assert tuple(v.derivative() for v in lo) == hi


@settings(max_examples=15, deadline=None)
@given(st.sampled_from((4, 5, 6)), st.data(), st.integers(-4, 2))
def test_linearity(n, data, m):
    a, b = data.draw(kclasses(n)), data.draw(kclasses(n))
    pa, pb = calibrated_period(a, m).value, calibrated_period(b, m).value
    assert calibrated_period(a + b, m).value == tuple(x + y for x, y in zip(pa, pb))


@settings(max_examples=15, deadline=None)
@given(st.sampled_from((4, 5, 6)), st.data(), st.integers(-4, 2))
def test_monodromy_is_sigma(n, data, m):
    a = data.draw(kclasses(n))
    mono = tuple(v.monodromy() for v in calibrated_period(a, m).value)
    assert mono == calibrated_period(sigma(a), m).value


def test_f_tilde_window():
    n = 4
    e3 = eps(n, 3, 1)
    window = f_tilde(e3, (-2, 2))
    assert [m for m, _ in window] == [-2, -1, 0, 1, 2]
    for _, cp in window:
        assert cp.component(0, 0).is_zero()
        assert cp.component(0, 1).is_zero()
    plus = [m for m, _ in f_tilde(e3, (-3, 3)) if m >= 0]
    minus = [m for m, _ in f_tilde(e3, (-3, 3)) if m < 0]
    assert plus == [0, 1, 2, 3] and minus == [-3, -2, -1]


def test_monodromy_of_log():
    n = 4
    two_pi_i = Scalar.monomial(n, Cyclotomic.root(n, 1, 4) * 2, Pi=1)
    assert lam(n, 0, 1, 1).monodromy() == lam(n, 0, 1, 1) + lam(n, 0, two_pi_i)
    assert lam(n, mpq(1, 2)).monodromy() == lam(n, mpq(1, 2), -1)
