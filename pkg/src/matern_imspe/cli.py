"""Command-line interface: ``matern-imspe <subcommand> ...``.

Exit codes: 0 success, 1 a validation or conjecture check failed (or the
design matrix was refused as singular), 2 usage or input error.  Errors are
written to stderr as a one-line JSON object.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__
from .coefficients import (
    as_order,
    check_bessel_conjecture,
    coefficient_table_csv,
    make_coefficients,
)
from .errors import MaternImspeError, SingularDesignError
from .imspe import assemble, load_design
from .product_integral import METHODS, evaluate_product
from .result import NEAR_LIMIT_THETA
from .single_integral import evaluate_single
from .validation import DEFAULT_THETAS, sweep


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def to_json(obj) -> str:
    """Compact JSON with every float printed as ``%.17g`` (round-trippable)."""
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        text = format(obj, ".17g")
        # keep floats recognisable as floats
        if all(ch not in text for ch in ".en"):
            text += ".0"
        return text
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return to_json(obj.item())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _real(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"number must be finite, got {text!r}")
    return value


def _theta_list(text: str) -> list[float]:
    return [_real(t.strip()) for t in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--seed", type=_seed, default=0, help="unsigned 64-bit seed (default 0)")

    parser = _Parser(prog="matern-imspe", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("coeffs", parents=[common], help="single-integral coefficient rows")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--max", action="store_true", help="emit every order 1..p")

    p = sub.add_parser("single", parents=[common], help="integral of one kernel over [-1, 1]")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--theta", type=_real, required=True)
    p.add_argument("--a", type=_real, required=True)

    p = sub.add_parser("product", parents=[common], help="integral of a product of two kernels")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--theta", type=_real, required=True)
    p.add_argument("--a", type=_real, required=True)
    p.add_argument("--b", type=_real, required=True)
    p.add_argument("--method", choices=METHODS, default="auto")

    p = sub.add_parser("imspe", parents=[common], help="IMSPE of a design CSV")
    p.add_argument("--design", required=True)
    p.add_argument("--theta", type=_theta_list, required=True, help="comma-separated, one per dimension")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--matrices", action="store_true", help="include C, R0 and R")

    p = sub.add_parser("validate", parents=[common], help="closed forms vs quadrature sweep")
    p.add_argument("--p-max", type=int, required=True)
    p.add_argument("--rtol", type=_real, default=1e-9)
    p.add_argument("--nodes", type=int, default=128, help="Gauss-Legendre nodes per panel")
    p.add_argument("--random-pairs", type=int, default=16,
                   help="extra seeded (a, b) pairs per cell on top of the 11x11 grid")

    p = sub.add_parser("bessel-check", parents=[common], help="Bessel-number conjecture check")
    p.add_argument("--p-max", type=int, required=True)
    return parser


# ---------------------------------------------------------------------------
# subcommands; each returns (exit code, stdout text)


def _coeffs(args):
    top = as_order(args.p)
    orders = list(range(1, top + 1)) if args.max else [top]
    if args.format == "csv":
        return 0, coefficient_table_csv(orders)
    sets = [make_coefficients(p) for p in orders]
    if args.format == "json":
        rows = [
            {"p": s.p, "a0": s.a0, "b": list(s.b), "c": list(s.c),
             "prefactor_denominator": s.prefactor_denominator}
            for s in sets
        ]
        return 0, to_json(rows) + "\n"
    lines = []
    for s in sets:
        lines.append(",".join(map(str, s.b_row())))
        lines.append(",".join(map(str, s.c)))
    return 0, "\n".join(lines) + "\n"


def _emit_result(res, fmt, names):
    if res.near_limit:
        print(f"note: theta={res.theta:g} < {NEAR_LIMIT_THETA:g}, small-theta limit regime "
              f"(method={res.method})", file=sys.stderr)
    if fmt == "json":
        return 0, to_json(res.to_dict()) + "\n"
    if fmt == "csv":
        header = ["p", "theta", *names, "value", "method", "near_limit"]
        row = [str(res.p), _g17(res.theta), *map(_g17, res.args), _g17(res.value),
               res.method, str(res.near_limit).lower()]
        return 0, ",".join(header) + "\n" + ",".join(row) + "\n"
    return 0, _g17(res.value) + "\n"


def _single(args):
    return _emit_result(evaluate_single(args.p, args.theta, args.a), args.format, ["a"])


def _product(args):
    res = evaluate_product(args.p, args.theta, args.a, args.b, method=args.method)
    return _emit_result(res, args.format, ["a", "b"])


def _imspe(args):
    p = as_order(args.p)
    try:
        design = load_design(args.design)
    except OSError as exc:
        raise UsageError(f"cannot read design file: {exc}") from None
    out = assemble(p, args.theta, design).to_dict(p, args.theta, include_matrices=args.matrices)
    if args.format == "csv":
        keys = ["p", "n", "d", "imspe", "condition_estimate"]
        vals = [str(out[k]) if isinstance(out[k], int) else _g17(out[k]) for k in keys]
        return 0, ",".join(keys) + "\n" + ",".join(vals) + "\n"
    return 0, to_json(out) + "\n"


def _validate(args):
    top = as_order(args.p_max)
    if args.nodes < 2:
        raise UsageError("--nodes must be >= 2")
    if args.random_pairs < 0:
        raise UsageError("--random-pairs must be >= 0")
    if not args.rtol > 0:
        raise UsageError("--rtol must be > 0")
    report = sweep(range(top + 1), DEFAULT_THETAS, rtol=args.rtol, nodes=args.nodes,
                   seed=args.seed, extra_pairs=args.random_pairs)
    data = report.to_dict()
    if args.format == "csv":
        lines = ["p,theta,single_max_rel_err,product_max_rel_err,ok"]
        for c in data["cells"]:
            lines.append(f"{c['p']},{_g17(c['theta'])},{_g17(c['single_max_rel_err'])},"
                         f"{_g17(c['product_max_rel_err'])},{str(c['ok']).lower()}")
        text = "\n".join(lines) + "\n"
    else:
        text = to_json(data) + "\n"
    if not report.ok:
        print(to_json({"error": "validation", "message":
                       f"max relative error {report.max_rel_err:.3g} exceeds rtol {args.rtol:g}"}),
              file=sys.stderr)
    return (0 if report.ok else 1), text


def _bessel(args):
    checks = check_bessel_conjecture(as_order(args.p_max))
    ok = all(c.ok for c in checks)
    if args.format == "csv":
        lines = ["p,computed_reversed,bessel,matches_bessel,matches_fixture"]
        for c in checks:
            t4 = "" if c.matches_fixture is None else str(c.matches_fixture).lower()
            lines.append(f"{c.p},{' '.join(map(str, reversed(c.computed)))},"
                         f"{' '.join(map(str, c.bessel))},{str(c.matches_bessel).lower()},{t4}")
        text = "\n".join(lines) + "\n"
    else:
        text = to_json({
            "p_max": args.p_max,
            "ok": ok,
            "rows": [
                {"p": c.p, "computed_reversed": list(reversed(c.computed)), "bessel": list(c.bessel),
                 "matches_bessel": c.matches_bessel, "matches_fixture": c.matches_fixture}
                for c in checks
            ],
        }) + "\n"
    if not ok:
        bad = [c.p for c in checks if not c.ok]
        print(to_json({"error": "conjecture", "message": f"mismatch at p={bad}"}), file=sys.stderr)
    return (0 if ok else 1), text


_COMMANDS = {
    "coeffs": _coeffs,
    "single": _single,
    "product": _product,
    "imspe": _imspe,
    "validate": _validate,
    "bessel-check": _bessel,
}


def _fail(kind: str, message: str, code: int, **extra) -> int:
    print(to_json({"error": kind, "message": message, **extra}), file=sys.stderr)
    return code


def run(argv=None) -> int:
    """Parse ``argv``, run one subcommand and return its exit code."""
    try:
        args = build_parser().parse_args(argv)
        code, text = _COMMANDS[args.command](args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        return _fail("usage", str(exc), 2)
    except SingularDesignError as exc:
        return _fail(type(exc).__name__, str(exc), 1, rcond=exc.rcond)
    except MaternImspeError as exc:
        extra = {}
        for attr in ("line", "column"):
            if getattr(exc, attr, None) is not None:
                extra[attr] = getattr(exc, attr)
        return _fail(type(exc).__name__, str(exc), 2, **extra)
    sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
