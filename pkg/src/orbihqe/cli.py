"""Command-line interface: ``orbihqe <group> <action> [options]``.

Exit codes: 0 all checks pass, 1 some check fails, 2 usage error, 3 tau file parse error.
The environment variable ORBIHQE_THREADS sets the number of worker processes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .fock import ParseError, loads
from .identities import Check, euler_table, intersection_table, run_suite, suite_phase, suite_roots
from .klattice import KClass, basis_names, coh_basis, eps
from .periods import calibrated_period
from .series import var_str

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PARSE = 0, 1, 2, 3

SUITE_ORDER = ["lattice", "roots", "lemmas", "periods", "phase", "btilde", "fock", "hqe"]


class UsageError(Exception):
    pass


def _threads() -> int:
    raw = os.environ.get("ORBIHQE_THREADS", "1")
    try:
        k = int(raw)
    except ValueError:
        raise UsageError(f"ORBIHQE_THREADS must be an integer, got {raw!r}")
    if k < 1:
        raise UsageError("ORBIHQE_THREADS must be at least 1")
    return k


def _ordered_map(fn, items):
    k = _threads()
    if k == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))


def _window(text: str, name: str):
    """'lo..hi' or a single integer."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"--{name} expects 'lo..hi' or an integer, got {text!r}")
    if lo > hi:
        raise UsageError(f"--{name} window {text!r} is empty")
    return list(range(lo, hi + 1))


def _emit(checks, as_json, out):
    if as_json:
        for c in checks:
            out.write(json.dumps(c.record(), sort_keys=True) + "\n")
    else:
        for c in checks:
            out.write(c.line() + "\n")
        passed = sum(c.ok for c in checks)
        out.write(f"{passed}/{len(checks)} checks passed\n")
    return EXIT_OK if all(c.ok for c in checks) else EXIT_FAIL


# -- commands -----------------------------------------------------------------

def cmd_lattice_table(args, out):
    n = args.n
    checks = []
    if not args.json:
        out.write(f"Euler pairing, n = {n}\n")
    for lab, got, want in euler_table(n) + intersection_table(n):
        checks.append(Check("lattice", lab, f"value={got} expected={want}", got == want, f"{got} != {want}"))
    return _emit(checks, args.json, out)


def cmd_roots_verify(args, out):
    return _emit(suite_roots(args.n, 0, args.m_range), args.json, out)


def _parse_alpha(n, text):
    if text.startswith("e"):
        try:
            a, i = text[1:].split("_")
            return eps(n, int(a), int(i))
        except ValueError:
            raise UsageError(f"bad class {text!r}; use e<a>_<i> or a basis name")
    names = basis_names(n)
    if text in names:
        return KClass.basis(n, names.index(text))
    raise UsageError(f"unknown class {text!r}; basis names are {', '.join(names)}")


def cmd_periods_dump(args, out):
    n = args.n
    alpha = _parse_alpha(n, args.alpha)
    records = []
    for m in _window(args.m, "m"):
        cp = calibrated_period(alpha, m)
        for (i, p), v in zip(coh_basis(n), cp.value):
            records.append({"m": m, "component": f"phi{i}{p}", "value": str(v)})
    if args.json:
        for r in records:
            out.write(json.dumps(r, sort_keys=True) + "\n")
    else:
        out.write(f"calibrated periods of {alpha}\n")
        for r in records:
            out.write(f"m={r['m']:>3} {r['component']}: {r['value']}\n")
    return EXIT_OK


def cmd_phase_check(args, out):
    return _emit(suite_phase(args.n, args.order), args.json, out)


def cmd_identities_all(args, out):
    names = SUITE_ORDER if args.suite == "all" else [args.suite]
    results = _ordered_map(run_suite, [(name, args.n, args.order) for name in names])
    checks = [c for res in results for c in res]
    return _emit(checks, args.json, out)


def _read_tau(path, n, cap):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")
    try:
        return loads(text, n, cap)
    except ParseError as exc:
        exc.path = path
        raise


def _window_k(*taus):
    k = 1
    for t in taus:
        for v in t.variables():
            if v[0] == "q":
                k = max(k, v[4])
    return k


def _first_term(op):
    terms = op.terms()
    if not terms:
        return ""
    j, mono, c = terms[0]
    factors = [f"({c})"] + [var_str(v) if e == 1 else f"{var_str(v)}^{e}" for v, e in mono]
    if j:
        factors.append(f"D^{j}")
    return "*".join(factors)


def _residual_report(kind, params, results, as_json, out):
    checks = []
    for (m, r), op in results:
        checks.append(Check(kind, f"m={m} r={r}", params, op.is_zero(), _first_term(op)))
    return _emit(checks, as_json, out)


def cmd_hqe_check(args, out):
    from .hqe import dilaton_shift, hqe_residuals

    n = args.n
    tau1 = _read_tau(args.tau, n, args.deg)
    tau2 = _read_tau(args.tau2, n, args.deg) if args.tau2 else tau1
    if args.plain_dilaton:
        tau1, tau2 = dilaton_shift(tau1), dilaton_shift(tau2)
    K = _window_k(tau1, tau2)
    rs = _window(args.r, "r")
    results = []
    for m in _window(args.m, "m"):
        res = hqe_residuals(tau1, tau2, m, rs, K)
        results += [((m, r), res[r]) for r in rs]
    return _residual_report("hqe", f"n={n} K={K} deg={args.deg}", results, args.json, out)


def cmd_dtoda_check(args, out):
    from .dtoda import bilinear_defects
    from .hqe import change_vars, dilaton_shift

    n = args.n
    tau = _read_tau(args.tau, n, args.deg)
    if args.plain_dilaton:
        tau = dilaton_shift(tau)
    K = _window_k(tau)
    T = change_vars("q->t", tau, K)
    rs = _window(args.r, "r")
    results = []
    for m in _window(args.m, "m"):
        res = bilinear_defects(T, m, rs, K)
        results += [((m, r), res[r]) for r in rs]
    return _residual_report("dtoda", f"n={n} K={K} deg={args.deg}", results, args.json, out)


# -- parser -------------------------------------------------------------------

def _add_common(p, order=False):
    p.add_argument("--n", type=int, required=True, help="rank parameter, n >= 4")
    p.add_argument("--json", action="store_true", help="one JSON record per check")
    if order:
        p.add_argument("--order", type=int, default=12, help="series truncation order N")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="orbihqe",
        description="Exact checks for the Hirota quadratic equations of P^1_{n-2,2,2}.",
        epilog="exit codes: 0 pass, 1 fail, 2 usage error, 3 tau parse error",
    )
    groups = parser.add_subparsers(dest="group", required=True)

    g = groups.add_parser("lattice").add_subparsers(dest="action", required=True)
    p = g.add_parser("table", help="Euler and intersection pairing tables")
    _add_common(p)
    p.set_defaults(func=cmd_lattice_table)

    g = groups.add_parser("roots").add_subparsers(dest="action", required=True)
    p = g.add_parser("verify", help="reflection vectors and monodromy")
    _add_common(p)
    p.add_argument("--m-range", type=int, default=3)
    p.set_defaults(func=cmd_roots_verify)

    g = groups.add_parser("periods").add_subparsers(dest="action", required=True)
    p = g.add_parser("dump", help="calibrated periods of a K-class")
    _add_common(p)
    p.add_argument("--alpha", default="e1_1", help="e<a>_<i> or a basis name such as L1^2")
    p.add_argument("--m", default="-2..1", help="window of m")
    p.set_defaults(func=cmd_periods_dump)

    g = groups.add_parser("phase").add_subparsers(dest="action", required=True)
    p = g.add_parser("check", help="phase factors computed two ways")
    _add_common(p, order=True)
    p.set_defaults(func=cmd_phase_check)

    g = groups.add_parser("identities").add_subparsers(dest="action", required=True)
    p = g.add_parser("all", help="run every identity suite")
    _add_common(p, order=True)
    p.add_argument("--suite", default="all", choices=["all"] + SUITE_ORDER)
    p.set_defaults(func=cmd_identities_all)

    for name, func in (("hqe", cmd_hqe_check), ("dtoda", cmd_dtoda_check)):
        g = groups.add_parser(name).add_subparsers(dest="action", required=True)
        p = g.add_parser("check", help=f"{name} residuals of a tau file")
        _add_common(p)
        p.add_argument("--tau", required=True)
        if name == "hqe":
            p.add_argument("--tau2")
        p.add_argument("--m", default="0")
        p.add_argument("--r", default="0")
        p.add_argument("--deg", type=int, default=3, help="degree cap D")
        p.add_argument("--plain-dilaton", action="store_true",
                       help="the file uses the plain q_{0,0,1} instead of the shifted coordinate")
        p.set_defaults(func=func)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.n < 4:
            raise UsageError(f"n must be at least 4, got {args.n}")
        if getattr(args, "order", 1) < 1:
            raise UsageError("--order must be positive")
        return args.func(args, out)
    except UsageError as exc:
        sys.stderr.write(f"orbihqe: error: {exc}\n")
        return EXIT_USAGE
    except ParseError as exc:
        sys.stderr.write(f"orbihqe: {exc.path}:{exc.line}:{exc.col}: parse error: {exc.msg}\n")
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
