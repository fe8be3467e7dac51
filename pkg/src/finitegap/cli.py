"""Command-line front end: ``finitegap <command> [flags]``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import mpmath

from .elliptic import ExactRoots, lattice_from_periods, lattice_from_roots
from .errors import FiniteGapError
from .report import emit_report

PRECISION_ENV = "FINITEGAP_PRECISION"
FALLBACK_PRECISION = 30
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_couplings(text: str) -> tuple:
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("couplings must be non-negative integers") from None
    if len(vals) != 4 or any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError("couplings must be non-negative integers")
    return vals


def parse_complex(text: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(parts[0].replace("i", "j"))
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected 're,im' or a complex literal, got {text!r}")


def parse_roots(text: str) -> ExactRoots:
    try:
        return ExactRoots.parse(text)
    except (ValueError, ZeroDivisionError, FiniteGapError) as exc:
        raise argparse.ArgumentTypeError(f"bad roots: {exc}") from None


def parse_periods(text: str) -> tuple:
    try:
        v = [float(x) for x in text.split(",")]
    except ValueError:
        v = []
    if len(v) != 4:
        raise argparse.ArgumentTypeError("expected w1_re,w1_im,w3_re,w3_im")
    return complex(v[0], v[1]), complex(v[2], v[3])


def parse_gauge(text: str) -> tuple:
    try:
        vals = tuple(Fraction(v) for v in text.split(","))
    except ValueError:
        vals = ()
    if len(vals) != 5:
        raise argparse.ArgumentTypeError("expected a,b0,b1,b2,b3")
    return vals


def _common(p: argparse.ArgumentParser, couplings: bool = True):
    if couplings:
        p.add_argument("--couplings", type=parse_couplings, help="l0,l1,l2,l3 (non-negative integers)")
    lat = p.add_mutually_exclusive_group()
    lat.add_argument("--roots", type=parse_roots, help="exact roots e1,e2,e3 (rationals summing to 0)")
    lat.add_argument("--periods", type=parse_periods, help="half-periods w1_re,w1_im,w3_re,w3_im")
    p.add_argument("--precision", type=int, help=f"working digits (default ${PRECISION_ENV} or {FALLBACK_PRECISION})")
    p.add_argument("--tol", type=float, help="pass/fail tolerance for verification commands")
    p.add_argument("--out", help="write the report here instead of standard output")
    p.add_argument("--format", choices=("json", "csv"), help="report format (default json)")
    p.add_argument("--config", help="JSON file whose keys mirror the flags; flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finitegap",
        description="Finite-gap data, monodromy and Bethe roots for the elliptic Heun operator.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("spectral", help="Xi, Q, a, c and genus for a coupling vector")
    _common(p)
    p.add_argument("--operator", action="store_true", help="include the commuting operator A")

    p = sub.add_parser("bands", help="band edges on a real rectangular lattice")
    _common(p)

    p = sub.add_parser("monodromy", help="Floquet multipliers by the integral, Bethe and ODE routes")
    _common(p)
    p.add_argument("--E", type=parse_complex, action="append", help="energy (repeatable)")
    p.add_argument("--sweep", help="start,stop,n along Re E (CSV friendly)")
    p.add_argument("--imag", type=float, default=0.0, help="imaginary part for --sweep")
    p.add_argument("--k", type=int, choices=(1, 3), action="append", help="period index (default 1 and 3)")
    p.add_argument("--route", choices=("ode", "integral", "bethe", "all"), default="all")
    p.add_argument("--E0", type=parse_complex, help="root of Q used as the integral base point")

    p = sub.add_parser("bethe", help="solve the Bethe Ansatz system")
    _common(p)
    p.add_argument("--E", type=parse_complex, help="target eigenvalue")
    p.add_argument("--seed", help="initial roots 're,im;re,im;...'")
    p.add_argument("--c", type=parse_complex, default=0j, help="initial c")

    p = sub.add_parser("hk", help="closed-form alpha and kappa for l = (2,0,0,0)")
    _common(p)
    p.add_argument("--E", type=parse_complex, required=True)
    p.add_argument("--branch", type=int, choices=(1, -1), default=1, help="sign of sqrt(-Q(E))")

    p = sub.add_parser("bcn", help="quasi-solvable BC_N sector: basis, matrix, spectrum")
    _common(p)
    p.add_argument("--N", type=int, default=1, help="particle number")
    p.add_argument("--l", type=int, default=0, help="pair coupling")
    p.add_argument("--gauge", type=parse_gauge, help="a,b0,b1,b2,b3 (default: every admissible gauge)")
    p.add_argument("--crosscheck", action="store_true", help="N = 1 comparison with Q(E)")

    p = sub.add_parser("verify-a3", help="commutators of the three-particle operators")
    _common(p, couplings=False)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("selftest", help="run the acceptance checks")
    p.add_argument("--out")
    p.add_argument("--format", choices=("json",))
    p.add_argument("--config")
    return parser


def _apply_config(args, argv):
    if not getattr(args, "config", None):
        return
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"--config: {exc}") from None
    converters = {"couplings": parse_couplings, "roots": parse_roots, "periods": parse_periods,
                  "gauge": parse_gauge}
    given = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    for key, val in cfg.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise UsageError(f"--config: unknown key {key!r}")
        if attr in given:
            continue
        if attr in converters and isinstance(val, str):
            try:
                val = converters[attr](val)
            except argparse.ArgumentTypeError as exc:
                raise UsageError(f"--config {key}: {exc}") from None
        setattr(args, attr, val)


def _precision(args) -> int:
    if getattr(args, "precision", None):
        return int(args.precision)
    env = os.environ.get(PRECISION_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"${PRECISION_ENV} must be an integer") from None
    return FALLBACK_PRECISION


def _need(args, flag):
    if getattr(args, flag, None) is None:
        raise UsageError(f"--{flag} is required for '{args.command}'")
    return getattr(args, flag)


def _lattice(args, exact: bool = False):
    prec = _precision(args)
    if args.roots is not None:
        return lattice_from_roots(args.roots, prec)
    if exact:
        raise UsageError(f"--roots is required for '{args.command}'")
    if args.periods is not None:
        return lattice_from_periods(args.periods[0], args.periods[1], prec)
    raise UsageError(f"--roots or --periods is required for '{args.command}'")


# ---------------------------------------------------------------------------
# commands


def cmd_spectral(args):
    from .spectral import build_A, spectral_data

    roots = _need(args, "roots")
    S = spectral_data(_need(args, "couplings"), roots)
    out = S.to_json()
    out["roots"] = [str(e) for e in roots.e]
    out["Xi_text"] = S.Xi.to_text()
    if args.operator:
        out["A"] = build_A(S.l, roots).to_text()
    return out


def cmd_bands(args):
    from .monodromy import transfer_matrix
    from .spectral import band_edges

    l = _need(args, "couplings")
    L = _lattice(args, exact=True)
    edges = band_edges(l, L)
    with mpmath.workdps(L.precision):
        vals = [mpmath.mpf(e.numerator) / e.denominator if isinstance(e, Fraction) else e for e in edges]
        intervals = []
        for i in range(len(vals) - 1):
            mid = (vals[i] + vals[i + 1]) / 2
            tr = complex(transfer_matrix(complex(mid), 1, l, L)[0].trace())
            intervals.append({"lo": vals[i], "hi": vals[i + 1],
                              "kind": "band" if abs(tr.real) <= 2 else "gap", "half_trace": tr / 2})
    return {"couplings": list(l), "edges": edges, "intervals": intervals, "top_band_from": vals[-1]}


def _energies(args):
    Es = list(args.E or [])
    if args.sweep:
        try:
            a, b, n = args.sweep.split(",")
            a, b, n = float(a), float(b), int(n)
        except ValueError:
            raise UsageError("--sweep expects start,stop,n") from None
        if n < 1:
            raise UsageError("--sweep needs n >= 1")
        step = (b - a) / (n - 1) if n > 1 else 0.0
        Es += [complex(a + i * step, args.imag) for i in range(n)]
    if not Es:
        raise UsageError(f"--E or --sweep is required for '{args.command}'")
    return Es


def cmd_monodromy(args):
    from .monodromy import MonodromyResult, bethe_multiplier, bethe_solve_at, monodromy_integral, monodromy_ode
    from .spectral import polynomial_roots, spectral_data

    l = _need(args, "couplings")
    routes = ("ode", "integral", "bethe") if args.route == "all" else (args.route,)
    L = _lattice(args, exact="integral" in routes)
    ks = sorted(set(args.k or [1, 3]))
    out = []
    S = E0 = None
    if "integral" in routes:
        S = spectral_data(l, args.roots)
        if args.E0 is not None:
            E0 = args.E0
        else:
            rts = polynomial_roots(S.Q, 20)
            E0 = complex(min(rts, key=lambda r: (abs(complex(r).imag) > 1e-12, complex(r).real)))
    for E in _energies(args):
        B = bethe_solve_at(l, L, E) if "bethe" in routes else None
        for k in ks:
            for route in routes:
                if route == "ode":
                    out.append(monodromy_ode(E, k, l, L))
                elif route == "integral":
                    out.append(monodromy_integral(E, k, S, L, E0))
                else:
                    out.append(MonodromyResult(k, complex(bethe_multiplier(B, k, L)), "bethe", E,
                                               residuals={"bethe_system": B.max_residual}))
    return out


def cmd_bethe(args):
    from .monodromy import bethe_multiplier, bethe_solve, bethe_solve_at

    l = _need(args, "couplings")
    L = _lattice(args)
    if args.seed:
        try:
            t0 = [parse_complex(s) for s in args.seed.split(";") if s.strip()]
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"--seed: {exc}") from None
        B = bethe_solve(l, L, t0, args.c, E_target=args.E)
    elif args.E is not None:
        B = bethe_solve_at(l, L, args.E)
    else:
        raise UsageError("--E or --seed is required for 'bethe'")
    out = B.to_json()
    out["multipliers"] = {str(k): bethe_multiplier(B, k, L) for k in (1, 2, 3)}
    return out


def cmd_hk(args):
    from .monodromy import hk_example_params
    from .spectral import spectral_data

    l = args.couplings or (2, 0, 0, 0)
    if tuple(l) != (2, 0, 0, 0):
        raise UsageError("--couplings must be 2,0,0,0 for 'hk'")
    L = _lattice(args, exact=True)
    S = spectral_data(l, args.roots)
    h = hk_example_params(args.E, S, L, branch=args.branch)
    return {"E": args.E, "alpha": h.alpha, "kappa": h.kappa, "wp_alpha": h.wp_alpha,
            "multipliers": {str(k): v for k, v in h.multipliers.items()}, "ansatz_residual": h.ansatz_residual}


def cmd_bcn(args):
    from .bcn import GaugeChoice, admissible_gauges, bcn_matrix, bcn_spectra, crosscheck_n1

    roots = _need(args, "roots")
    li = args.couplings or (0, 0, 0, 0)
    if args.N < 1:
        raise UsageError("--N must be at least 1")
    if args.l < 0:
        raise UsageError("--l must be a non-negative integer")
    prec = _precision(args)
    gauges = [GaugeChoice.of(*args.gauge)] if args.gauge else admissible_gauges(args.N, args.l, li)
    out = {"sectors": [bcn_spectra(bcn_matrix(args.N, args.l, li, g, roots), precision=prec) for g in gauges]}
    if args.crosscheck:
        out["crosscheck"] = crosscheck_n1(li, roots)
    return out


def cmd_verify_a3(args):
    from .a3 import build_a3_operators, residual_report

    L = _lattice(args, exact=True)
    ops = build_a3_operators(args.roots)
    tol = args.tol if args.tol is not None else 1e-8
    reports = [residual_report("H", y, ops, L, args.samples, args.seed) for y in ("P1", "P3", "I12", "I23", "I31")]
    ok = all(r["max_residual"] < tol for r in reports)
    return {"tol": tol, "reports": reports, "passed": ok}, ok


def cmd_selftest(args):
    from .selftest import CHECKS

    results = []
    for fn in CHECKS:
        r = fn()
        print(f"criterion {r.get('criterion', '?')}: {'PASS' if r['passed'] else 'FAIL'} [{r['seconds']} s]",
              file=sys.stderr)
        results.append({"check": fn.__name__, "passed": r["passed"], "seconds": r["seconds"]})
    ok = all(r["passed"] for r in results)
    return {"passed": ok, "results": results}, ok


COMMANDS = {
    "spectral": cmd_spectral,
    "bands": cmd_bands,
    "monodromy": cmd_monodromy,
    "bethe": cmd_bethe,
    "hk": cmd_hk,
    "bcn": cmd_bcn,
    "verify-a3": cmd_verify_a3,
    "selftest": cmd_selftest,
}


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        _apply_config(args, argv)
        fmt = getattr(args, "format", None) or "json"
        if fmt == "csv" and args.command != "monodromy":
            raise UsageError("--format csv is only available for 'monodromy'")
        result = COMMANDS[args.command](args)
        ok = True
        if isinstance(result, tuple):
            result, ok = result
        digits = _precision(args) if hasattr(args, "precision") else 20
        data = emit_report(result, fmt, digits=digits)
    except UsageError as exc:
        print(f"finitegap {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FiniteGapError, ValueError, ZeroDivisionError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        return EXIT_FAIL
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return EXIT_OK if ok else EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
