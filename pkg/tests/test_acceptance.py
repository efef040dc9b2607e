import io
import random
import time

from gmpy2 import mpq

from orbihqe.cli import main
from orbihqe.dtoda import dressed_defects
from orbihqe.hqe import change_vars, hqe_residuals, pullback_b
from orbihqe.identities import (
    fock_instance,
    random_fock_tau,
    suite_btilde,
    suite_lattice,
    suite_lemmas,
    suite_phase,
    suite_roots,
)
from orbihqe.periods import PuiseuxLog
from orbihqe.phase import b_from_limit, b_tilde
from orbihqe.scalars import Cyclotomic, Scalar


def report(capsys, k, title, ok, elapsed, limit, detail=""):
    status = "PASS" if ok and elapsed < limit else "FAIL"
    extra = f"  {detail}" if detail else ""
    with capsys.disabled():
        print(f"\ncriterion {k}: {status}  {title}  ({elapsed:.1f} s, limit {limit} s){extra}")
    assert ok, detail
    assert elapsed < limit


def failures(checks):
    return [f"{c.ident} {c.params}: {c.witness}" for c in checks if not c.ok]


def test_1_pairing_tables(capsys):
    t0 = time.perf_counter()
    bad = [f for n in range(4, 9) for f in failures(suite_lattice(n, 0))]
    report(capsys, 1, "Euler and intersection tables, n=4..8", not bad, time.perf_counter() - t0, 10, "; ".join(bad[:3]))


def test_2_root_system(capsys):
    t0 = time.perf_counter()
    bad = [f for n in range(4, 9) for f in failures(suite_roots(n, 0, m_range=3))]
    report(capsys, 2, "reflection vectors, n=4..8, m_range=3", not bad, time.perf_counter() - t0, 30, "; ".join(bad[:3]))


def test_3_lemmas(capsys):
    t0 = time.perf_counter()
    bad = [f for n in (4, 5, 6) for f in failures(suite_lemmas(n, 0))]
    report(capsys, 3, "pairing lemmas on all basis pairs, n=4..6", not bad, time.perf_counter() - t0, 60, "; ".join(bad[:3]))


def test_4_phase(capsys):
    t0 = time.perf_counter()
    bad = [f for n in (4, 5, 6) for f in failures(suite_phase(n, 20))]
    report(capsys, 4, "phase factors to order 20, n=4..6", not bad, time.perf_counter() - t0, 300, "; ".join(bad[:3]))


def test_5_btilde(capsys):
    t0 = time.perf_counter()
    bad = [f for n in range(4, 9) for f in failures(suite_btilde(n, 0))]
    for n in range(4, 9):
        if b_tilde(n, (2, 1, 1)) != PuiseuxLog(n, {(0, 0): Scalar.const(n, mpq(-1, 4))}):
            bad.append(f"n={n} e2_1")
        if b_tilde(n, (3, 1, 1)) != PuiseuxLog(n, {(0, 0): Scalar.const(n, mpq(1, 4))}):
            bad.append(f"n={n} e3_1")
        if b_from_limit(n, (3, 1, 1)) != PuiseuxLog(n, {(1, 0): Scalar.const(n, 4)}):
            bad.append(f"n={n} limit e3_1")
        for i in range(1, n - 1):
            c = Scalar.monomial(n, Cyclotomic.root(n, -i, n - 2).scale(mpq(1, n - 2)), NQ=1)
            want = PuiseuxLog(n, {(mpq(-1, n - 2), 0): c})
            if b_tilde(n, (1, i, 1)) != want or pullback_b(n, (1, i, 1)) != want:
                bad.append(f"n={n} e1_{i}")
    report(capsys, 5, "b three-way agreement, n=4..8", not bad, time.perf_counter() - t0, 10, "; ".join(bad[:3]))


def test_6_fock(capsys):
    t0 = time.perf_counter()
    count, bad = 0, []
    for k in range(51):
        n = 4 + k % 3
        res = fock_instance(n, k)
        bad += [f"n={n} seed={k} {ident}" for ident, ok in res.items() if not ok]
        count += 1
    report(capsys, 6, f"Fock identities on {count} instances, cap 3", not bad and count >= 50,
            time.perf_counter() - t0, 300, "; ".join(bad[:3]))


def test_7_hqe_equals_dtoda(capsys):
    n, K, cap, pairs = 4, 1, 3, 20
    rs = [0, 1, 2]
    t0 = time.perf_counter()
    bad, nonzero, total = [], 0, 0
    for seed in range(pairs):
        rng = random.Random(seed)
        tau1 = random_fock_tau(rng, n, K, cap, with_x=True)
        tau2 = random_fock_tau(rng, n, K, cap, with_x=True)
        T1, T2 = change_vars("q->t", tau1, K), change_vars("q->t", tau2, K)
        for m in range(-2, 3):
            h = hqe_residuals(tau1, tau2, m, rs, K)
            d = dressed_defects(T1, -m, rs, K, T2)
            for r in rs:
                total += 1
                nonzero += not h[r].is_zero()
                if h[r] != change_vars("t->q", d[r], K).scale((-1) ** (m + 1)):
                    bad.append(f"seed {seed} m={m} r={r}")
    detail = f"{total - len(bad)}/{total} residuals agree, {nonzero} nonzero"
    if bad:
        detail += "; " + "; ".join(bad[:3])
    report(capsys, 7, f"HQE residual = D-Toda defect on {pairs} pairs, n=4", not bad and nonzero > 0,
           time.perf_counter() - t0, 600, detail)


def _identities_all():
    out = io.StringIO()
    code = main(["identities", "all", "--n", "4", "--order", "12"], out=out)
    return code, out.getvalue()


def test_8_regression(capsys, monkeypatch):
    t0 = time.perf_counter()
    monkeypatch.setenv("ORBIHQE_THREADS", "1")
    a = _identities_all()
    b = _identities_all()
    monkeypatch.setenv("ORBIHQE_THREADS", "2")
    c = _identities_all()
    ok = a == b == c and a[0] == 0
    detail = f"{len(a[1].splitlines())} lines, exit {a[0]}"
    report(capsys, 8, "identities all byte-stable across runs and thread counts", ok,
           time.perf_counter() - t0, float("inf"), detail)
