"""Command-line front end.

Every command writes one JSON report (or a plain table) that embeds the
configuration and package version, so identical invocations produce
byte-identical output.

Exit codes: 0 success, 1 verification mismatch or non-convergence,
2 invalid input, 3 resource guard.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from . import __version__
from .certify import enumeration_certificate, latticefree_certificate
from .construct import build_simplex, make_params, project
from .continuum import closure_lambda, continuum_report, discretize_to_a, exponential_solution
from .errors import ConvergenceError, ResourceGuardError, VerificationError
from .extremal import (
    OptimizerConfig,
    build_delta4,
    build_delta5,
    optimize_a,
    perturbation_probe,
    verify_extremal,
)
from .scalar import mpf_to_fraction, to_json
from .width import alpha_formula, lattice_width, width_bound_certified

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INVALID = 2
EXIT_GUARD = 3

COMMANDS = ("construct", "certify", "width", "extremal", "optimize", "continuum", "reproduce")


class InvalidInput(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidInput(message)


# ---------------------------------------------------------------------------
# number rendering


def _decimal_bound(q, digits, upward):
    scaled = q * 10**digits
    n = math.ceil(scaled) if upward else math.floor(scaled)
    sign = "-" if n < 0 else ""
    whole, frac = divmod(abs(n), 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def number(x, precision):
    """Exact encoding, 50-digit decimal and an outward-rounded enclosure."""
    iv = x.to_interval(precision)
    digits = max(1, int(precision * math.log10(2)))
    return {
        "exact": to_json(x),
        "decimal": x.decimal(50),
        "enclosure": [
            _decimal_bound(mpf_to_fraction(iv.lower), digits, upward=False),
            _decimal_bound(mpf_to_fraction(iv.upper), digits, upward=True),
        ],
    }


# ---------------------------------------------------------------------------
# commands


def _require_d(args, low=2):
    if args.d is None:
        raise InvalidInput(f"{args.command} needs --d")
    if args.d < low:
        raise InvalidInput(f"--d must be >= {low}")
    return args.d


def cmd_construct(args):
    d = _require_d(args)
    params = make_params(d)
    spec = build_simplex(params, solver=args.solver)
    cert = latticefree_certificate(spec.a)
    p = args.precision
    return EXIT_OK, {
        "d": d,
        "delta": number(params.delta, p),
        "a": [number(x, p) for x in spec.a],
        "a_normalization": spec.a.normalization,
        "v": [number(x, p) for x in spec.vertices[0]],
        "vertices": "cyclic shifts of v: vertex i is v shifted right by i",
        "certificate": cert.to_json(),
    }


def cmd_certify(args):
    d = _require_d(args)
    spec = build_simplex(make_params(d))
    report = {"d": d, "certificate": latticefree_certificate(spec.a).to_json()}
    if args.brute_force:
        enum = enumeration_certificate(project(spec), workers=args.workers)
        report["enumeration"] = enum.to_json()
        if not enum.payload["empty_interior"]:
            return EXIT_MISMATCH, report
    return EXIT_OK, report


def cmd_width(args):
    d = _require_d(args)
    params = make_params(d)
    w = lattice_width(project(build_simplex(params)), workers=args.workers)
    alpha = alpha_formula(params).alpha
    report = {
        "d": d,
        "width": w.to_json(),
        "value": number(w.value, args.precision),
        "alpha": number(alpha, args.precision),
        "equals_alpha": w.value == alpha,
    }
    return (EXIT_OK if report["equals_alpha"] else EXIT_MISMATCH), report


def cmd_extremal(args):
    d = _require_d(args)
    builders = {4: build_delta4, 5: build_delta5}
    if d not in builders:
        raise InvalidInput("extremal supports --d 4 or --d 5")
    s = builders[d]()
    ver = verify_extremal(s, workers=args.workers)
    report = {
        "d": d,
        "v": [number(x, args.precision) for x in s.v],
        "claimed_width": number(s.claimed_width, args.precision),
        "verification": ver.to_json(),
        "exceeds_family_alpha": ver.width.value > ver.alpha,
    }
    if args.samples:
        if args.epsilon is None or args.epsilon <= 0:
            raise InvalidInput("--samples needs a positive --epsilon")
        probe = perturbation_probe(s, args.epsilon, args.samples, args.seed, workers=args.workers)
        report["probe"] = probe.to_json()
    return EXIT_OK, report


def cmd_optimize(args):
    d = _require_d(args)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            config = OptimizerConfig.from_json(fh.read())
    else:
        config = OptimizerConfig(seed=args.seed)
    report = {"d": d, "optimizer": config.to_json()}
    try:
        result = optimize_a(d, config)
    except ConvergenceError as exc:
        report["error"] = {"type": "ConvergenceError", "message": str(exc), "best": exc.best, "trace": exc.trace}
        return EXIT_MISMATCH, report
    report["result"] = result.to_json()
    report["family_alpha"] = float(alpha_formula(make_params(d)).alpha)
    return EXIT_OK, report


def cmd_continuum(args):
    if args.gamma is None or args.gamma == 0:
        raise InvalidInput("continuum needs a nonzero --gamma")
    if args.n < 2:
        raise InvalidInput("--n must be >= 2")
    rep = continuum_report(args.gamma, args.n)
    report = {"continuum": rep.to_json()}
    if args.d is not None:
        d = _require_d(args)
        y, _, _ = exponential_solution(args.gamma, d * max(1, args.n // d))
        lam_d = closure_lambda(discretize_to_a(y, d))
        report["closure"] = {"d": d, "lambda_d": lam_d, "difference": lam_d - rep.lam}
    return EXIT_OK, report


def _reproduce_rows(args):
    rows = []

    def row(name, ok, detail):
        rows.append({"check": name, "pass": bool(ok), "detail": detail})

    failures = [d for d in range(2, args.max_chain + 1) if not width_bound_certified(make_params(d))[0]]
    row(f"width bound chain d=2..{args.max_chain}", not failures, f"failures: {failures}")
    for d in (2, 3, 4, 5):
        params = make_params(d)
        w = lattice_width(project(build_simplex(params)), workers=args.workers)
        row(f"family width d={d}", w.value == alpha_formula(params).alpha, w.value.decimal(12))
    for d, build in ((4, build_delta4), (5, build_delta5)):
        try:
            ver = verify_extremal(build(), workers=args.workers)
            row(f"flt({d}) >= {ver.width.value.decimal(8)}", ver.exact_match, ver.width.path)
        except VerificationError as exc:
            row(f"flt({d}) extremal simplex", False, str(exc))
    try:
        res = optimize_a(6, OptimizerConfig(seed=args.seed))
        row("optimizer d=6 non-monotone", not res.monotone, f"objective {res.objective:.10f}")
    except ConvergenceError as exc:
        row("optimizer d=6 non-monotone", False, str(exc))
    return rows


def cmd_reproduce(args):
    rows = _reproduce_rows(args)
    ok = all(r["pass"] for r in rows)
    return (EXIT_OK if ok else EXIT_MISMATCH), {"checks": rows, "all_pass": ok}


HANDLERS = {
    "construct": cmd_construct,
    "certify": cmd_certify,
    "width": cmd_width,
    "extremal": cmd_extremal,
    "optimize": cmd_optimize,
    "continuum": cmd_continuum,
    "reproduce": cmd_reproduce,
}


# ---------------------------------------------------------------------------
# plumbing


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--d", type=int, help="dimension")
    common.add_argument("--precision", type=int, default=64, help="enclosure precision in bits (>= 53)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "table"), default="json")

    parser = _Parser(prog="latfree", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    p = sub.add_parser("construct", parents=[common], help="exact vertices and certificate")
    p.add_argument("--solver", choices=("closed_form", "circulant"), default="closed_form")
    p = sub.add_parser("certify", parents=[common], help="lattice-freeness certificate")
    p.add_argument("--brute-force", action="store_true", help="also scan all integer points (d <= 6)")
    sub.add_parser("width", parents=[common], help="exact lattice width (d <= 5)")
    p = sub.add_parser("extremal", parents=[common], help="verify the d=4 or d=5 local maximizer")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--samples", type=int, default=0, help="perturbation probe samples")
    p = sub.add_parser("optimize", parents=[common], help="local maximization over a")
    p.add_argument("--config", help="optimizer settings as a JSON file")
    p = sub.add_parser("continuum", parents=[common], help="exponential solution of the continuous model")
    p.add_argument("--gamma", type=float)
    p.add_argument("--n", type=int, default=1000)
    p = sub.add_parser("reproduce", parents=[common], help="run the headline checks")
    p.add_argument("--max-chain", type=int, default=1000)
    return parser


def _config(args):
    cfg = {k: v for k, v in vars(args).items() if k not in ("output", "format")}
    return dict(sorted(cfg.items()))


def _table(report):
    if "checks" in report:
        width = max(len(r["check"]) for r in report["checks"])
        lines = [f"{'check':<{width}}  result  detail"]
        for r in report["checks"]:
            lines.append(f"{r['check']:<{width}}  {'PASS' if r['pass'] else 'FAIL':<6}  {r['detail']}")
        return "\n".join(lines) + "\n"
    lines = []
    for key, val in report.items():
        if isinstance(val, dict) and "decimal" in val:
            val = val["decimal"]
        elif isinstance(val, (dict, list)):
            val = json.dumps(val, sort_keys=True)
            if len(val) > 100:
                val = val[:97] + "..."
        lines.append(f"{key:<20} {val}")
    return "\n".join(lines) + "\n"


def render(report, fmt):
    if fmt == "table":
        return _table(report)
    return json.dumps(report, indent=2) + "\n"


def _execute(argv):
    parser = build_parser()
    output = None
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise InvalidInput(f"choose a command: {', '.join(COMMANDS)}")
        output = args.output
        if args.precision < 53:
            raise InvalidInput("--precision must be >= 53")
        if args.workers < 1:
            raise InvalidInput("--workers must be >= 1")
        code, body = HANDLERS[args.command](args)
    except InvalidInput as exc:
        return EXIT_INVALID, _error("invalid_input", str(exc)), output
    except ResourceGuardError as exc:
        return EXIT_GUARD, _error("resource_guard", str(exc)), output
    except VerificationError as exc:
        return EXIT_MISMATCH, _error("verification_failed", str(exc), exc.details), output
    except (ValueError, OSError) as exc:
        return EXIT_INVALID, _error("invalid_input", str(exc)), output
    report = {"version": __version__, "config": _config(args), "report": body}
    return code, render(report if args.format == "json" else body, args.format), output


def run(argv=None):
    """Parse ``argv``, run the command and return ``(exit_code, text)``."""
    code, text, _ = _execute(argv)
    return code, text


def _error(kind, message, details=None):
    obj = {"error": kind, "message": message}
    if details:
        obj["details"] = details
    return json.dumps(obj, indent=2, default=str) + "\n"


def main(argv=None):
    code, text, output = _execute(argv)
    if output and code != EXIT_INVALID:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        (sys.stdout if code in (EXIT_OK, EXIT_MISMATCH) else sys.stderr).write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
