"""Command-line front end.

Exit codes: 0 verified, 1 violation found, 2 usage or input error,
3 internal assertion (e.g. a failed exact division).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import random
import re
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .coeffalgo import (appendix_A, closed_form_t, columns_of, format_matrix,
                        monomial_coefficient_in_S, parse_matrix, replicate)
from .cubicgen import (DegreeSpec, SpecError, build_product_cubic, cubic_from_text, cubic_to_text,
                       generic_cubic, hesse_cubic, load_spec, nondegeneracy_check,
                       random_integer_cubic)
from .invariants import CubicInvariants, DivisibilityError, verify_all_identities
from .polycore import VariableTable, parse_polynomial

log = logging.getLogger("cubicinv")

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3
WORKERS_ENV = "CUBICINV_WORKERS"
LONG_THRESHOLD = 4


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    spec_file: Optional[str] = None
    no_fourth_powers: bool = False
    workers: int = 1
    checkpoint_dir: Optional[str] = None
    seed: Optional[int] = None
    output: Optional[str] = None
    format: str = "json"


@dataclass
class RunRecord:
    config: dict
    version: str
    wall_time: float
    digest: str
    checkpoint_lineage: List[dict] = field(default_factory=list)


# -- input helpers -------------------------------------------------------------

def _parse_d(text: str) -> DegreeSpec:
    try:
        parts = [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--d expects three comma-separated integers, got {text!r}") from None
    if len(parts) != 3:
        raise UsageError("--d expects three comma-separated integers")
    try:
        return DegreeSpec.of(*parts)
    except SpecError as exc:
        raise UsageError(str(exc)) from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _spec_from_args(args):
    if getattr(args, "spec", None):
        spec, factors = load_spec(_read(args.spec))
        return spec, factors
    if getattr(args, "d", None):
        spec = _parse_d(args.d)
        return spec, None
    raise UsageError("give --spec FILE or --d d1,d2,d3")


def _require_long(spec: DegreeSpec, args):
    if max(spec.d) >= LONG_THRESHOLD and not getattr(args, "long", False):
        raise UsageError(f"spec {spec.label()} has d >= {LONG_THRESHOLD}; pass --long to run it")


def _expr_cubic(text: str):
    names = sorted(set(re.findall(r"[A-Za-z_]\w*", text)) - {"x1", "x2", "x3"})
    table = VariableTable.standard(0, aux=names)
    try:
        poly = parse_polynomial(text, table)
    except (SyntaxError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot parse expression: {exc}") from None
    from .cubicgen import CubicForm
    try:
        return CubicForm.from_polynomial(poly)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load_cubic(args):
    if getattr(args, "expr", None):
        return _expr_cubic(args.expr)
    if getattr(args, "hesse", False):
        return hesse_cubic()
    if getattr(args, "generic", False):
        return generic_cubic()
    path = getattr(args, "cubic", None)
    if not path:
        raise UsageError("give a cubic file, --expr, --hesse or --generic")
    text = _read(path)
    if text.lstrip().startswith("{"):
        spec, factors = load_spec(text)
        return build_product_cubic(spec, factors)
    try:
        return cubic_from_text(text)
    except (ValueError, KeyError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _assignment(items: Optional[Sequence[str]]) -> dict:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--assign expects name=value, got {item!r}")
        try:
            out[name.strip()] = Fraction(value.strip())
        except ValueError:
            raise UsageError(f"--assign value {value!r} is not a rational number") from None
    return out


def _point(text: str):
    try:
        x = tuple(Fraction(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--x expects three comma-separated rationals, got {text!r}") from None
    if len(x) != 3:
        raise UsageError("--x expects three coordinates")
    return x


def _workers(args) -> int:
    if getattr(args, "workers", None):
        return args.workers
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"{WORKERS_ENV} must be an integer") from None
    return 1


# -- output --------------------------------------------------------------------

def _dumps(report: dict) -> str:
    return json.dumps(report, indent=2, default=str) + "\n"


def _csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    table = None
    for key in ("coefficients", "points", "rows", "cubics"):
        if isinstance(report.get(key), list) and report[key]:
            table = report[key]
            break
    if table is not None:
        cols = list(table[0])
        w.writerow(cols)
        for row in table:
            w.writerow([json.dumps(row[c]) if isinstance(row[c], (dict, list)) else row[c]
                        for c in cols])
    else:
        w.writerow(["key", "value"])
        for k, v in report.items():
            w.writerow([k, json.dumps(v, default=str) if isinstance(v, (dict, list)) else v])
    return buf.getvalue()


def _emit(report: dict, args) -> str:
    text = _csv(report) if args.format == "csv" else _dumps(report)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return text


def _poly_text(p) -> str:
    return str(p)


# -- subcommands -----------------------------------------------------------------

def cmd_build(args) -> int:
    spec, factors = load_spec(_read(args.spec_file))
    F = build_product_cubic(spec, factors)
    nondegeneracy_check(F)
    text = cubic_to_text(F)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    args._report_text = text
    return EXIT_OK


def cmd_invariants(args) -> int:
    F = _load_cubic(args)
    inv = CubicInvariants(F)
    degenerate = inv.H.is_zero()
    if degenerate:
        log.warning("cubic is degenerate: Hessian determinant vanishes identically")
    report = {
        "F": _poly_text(inv.F),
        "S": _poly_text(inv.S),
        "H": _poly_text(inv.H),
        "B": {f"B{p + 1}{q + 1}": _poly_text(inv.B[p, q]) for p in range(3) for q in range(p, 3)},
        "nondegenerate": not degenerate,
        "warnings": ["Hessian determinant vanishes identically"] if degenerate else [],
    }
    args._report_text = _emit(report, args)
    return EXIT_OK


def cmd_verify(args) -> int:
    from . import positivity

    if args.kind == "identities":
        rng = random.Random(args.seed)
        rows, failures = [], []
        cubics = []
        if args.spec or args.d:
            spec, factors = _spec_from_args(args)
            cubics.append(("spec " + spec.label(), build_product_cubic(spec, factors)))
        else:
            for n in range(args.count):
                cubics.append((f"random #{n}", random_integer_cubic(rng, args.bound)))
        for name, F in cubics:
            res = verify_all_identities(F)
            rows.append({"cubic": name, **res})
            if not all(res.values()):
                failures.append({"cubic": name, "F": _poly_text(F.polynomial()),
                                 "failed": [k for k, v in res.items() if not v]})
        report = {"kind": "identities", "seed": args.seed, "n_cubics": len(cubics),
                  "violations": failures, "cubics": rows}
        args._report_text = _emit(report, args)
        return EXIT_VIOLATION if failures else EXIT_OK

    spec, factors = _spec_from_args(args)
    if factors is not None and any(not f.symbolic for f in factors):
        raise UsageError("positivity checks need a symbolic spec")
    _require_long(spec, args)
    if args.kind == "positivity":
        rep = positivity.check_conjecture_2_1(
            spec, no_fourth_powers=args.no_fourth_powers, workers=_workers(args),
            checkpoint_dir=args.checkpoint, cross_check=args.cross_check)
        report = rep.to_dict(include_coefficients=args.include_coefficients or args.format == "csv")
        ok = rep.ok
    elif args.kind == "bound":
        rep = positivity.check_conjecture_2_2(spec)
        report = rep.to_dict()
        ok = rep.ok
    else:
        inv = CubicInvariants(build_product_cubic(spec))
        r1 = positivity.check_theorem_3_1(spec, inv)
        r2 = positivity.check_theorem_3_2(spec, inv)
        report = {"spec": list(spec.d), "theorem_3_1": r1.to_dict(), "theorem_3_2": r2.to_dict(),
                  "runtime_seconds": round((r1.runtime_seconds or 0) + (r2.runtime_seconds or 0), 3)}
        ok = r1.ok and r2.ok
    if not args.timing:
        _strip_timing(report)
    args._report_text = _emit(report, args)
    args._checkpoint = args.checkpoint if args.kind == "positivity" else None
    return EXIT_OK if ok else EXIT_VIOLATION


def _strip_timing(obj):
    if isinstance(obj, dict):
        for k in obj:
            if k == "runtime_seconds":
                obj[k] = None
            else:
                _strip_timing(obj[k])
    elif isinstance(obj, list):
        for v in obj:
            _strip_timing(v)


def cmd_coeff(args) -> int:
    try:
        rows = parse_matrix(args.matrix)
    except ValueError as exc:
        raise UsageError(f"--matrix: {exc}") from None
    if args.replicate < 1:
        raise UsageError("--replicate must be at least 1")
    rows = replicate(rows, args.replicate)
    cols = columns_of(rows)
    if any(sum(c) != 4 for c in cols):
        raise UsageError("every column of an S-monomial sums to 4")
    rs = [sum(r) for r in rows]
    if args.d:
        spec = _parse_d(args.d)
        if spec.r != len(cols):
            raise UsageError(f"matrix has {len(cols)} columns but spec {spec.label()} has r = {spec.r}")
        if any(rs[p] != 4 * spec.d[p] - 4 for p in range(3)):
            raise UsageError("row sums must equal 4 d_p - 4")
    else:
        if any(v % 4 for v in rs):
            raise UsageError("row sums must be of the form 4 d_p - 4")
        spec = DegreeSpec.of(*(v // 4 + 1 for v in rs))
    value = monomial_coefficient_in_S(cols, spec.d)
    report = {"matrix": format_matrix(rows), "spec": list(spec.d), "coefficient": value,
              "method": "factorization"}
    if args.cross_check:
        from .positivity import expanded_s_by_type, canonicalize
        _require_long(spec, args)
        grouped, _ = expanded_s_by_type(spec)
        expanded = grouped.get(canonicalize(rows, spec.d).matrix, (0, 0))[0]
        report["cross_check"] = {"method": "full expansion", "coefficient": expanded,
                                 "agree": expanded == value}
        if expanded != value:
            args._report_text = _emit(report, args)
            return EXIT_INTERNAL
    args._report_text = _emit(report, args)
    return EXIT_VIOLATION if value < 0 else EXIT_OK


def cmd_curvature(args) -> int:
    from . import curvature

    F = _load_cubic(args)
    assignment = _assignment(args.assign)
    try:
        coeffs = curvature.numeric_form(F, assignment)
    except ValueError as exc:
        raise UsageError(f"{exc}; supply --assign for symbolic coefficients") from None
    if args.mode == "at":
        x = _point(args.x)
        if not any(x):
            raise UsageError("x must be nonzero")
        report = curvature.point_report(coeffs, x)
        pt = curvature.CurvaturePoint(coeffs, x)
        if pt.H:
            ric = curvature.ricci_tensor(pt, x)
            report["ricci"] = [[str(v) for v in row] for row in ric]
        else:
            report["warnings"] = ["H vanishes at x: the metric is degenerate"]
    else:
        points = curvature.scan(coeffs, args.resolution)
        report = {"resolution": args.resolution, "points": points}
    args._report_text = _emit(report, args)
    return EXIT_OK


def cmd_appendix(args) -> int:
    if args.closed_form is not None:
        if args.closed_form < 0:
            raise UsageError("t must be non-negative")
        report = {"t": args.closed_form, "s": 3 * args.closed_form,
                  "closed_form": closed_form_t(args.closed_form)}
        args._report_text = _emit(report, args)
        return EXIT_OK
    lo, hi = (args.s, args.s) if args.s is not None else tuple(args.range)
    if lo < 1 or hi < lo:
        raise UsageError("s must be at least 1")
    rows = []
    for s in range(lo, hi + 1):
        av = appendix_A(s)
        row = {"s": s}
        row.update({f"A{i + 1}": v for i, v in enumerate(av.parts)})
        row["A"] = av.total
        rows.append(row)
    report = rows[0] if len(rows) == 1 else {"rows": rows}
    args._report_text = _emit(report, args)
    return EXIT_VIOLATION if any(r["A"] <= 0 for r in rows) else EXIT_OK


# -- parser ---------------------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    p.add_argument("-o", "--output", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--run-log", help="append a run record (JSON line) to this file")
    p.add_argument("--timing", action="store_true", help="include wall-clock timings in reports")


def _spec_args(p: argparse.ArgumentParser):
    p.add_argument("--spec", help="spec JSON file")
    p.add_argument("--d", help="degrees d1,d2,d3 (symbolic factors)")
    p.add_argument("--long", action="store_true", help=f"allow runs with some d_p >= {LONG_THRESHOLD}")


def _cubic_args(p: argparse.ArgumentParser):
    p.add_argument("cubic", nargs="?", help="cubic text file or spec JSON")
    p.add_argument("--expr", help="cubic as an expression, e.g. 'x1^3+x2^3+x3^3+6*lam*x1*x2*x3'")
    p.add_argument("--hesse", action="store_true", help="the Hesse family with parameter lam")
    p.add_argument("--generic", action="store_true", help="the generic cubic a300..a111")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cubicinv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build the cubic of a spec file")
    p.add_argument("spec_file")
    _common(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("invariants", help="S, H and the cofactors of a cubic")
    _cubic_args(p)
    _common(p)
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("verify", help="identity, positivity, bound and sign checks")
    p.add_argument("kind", choices=("identities", "positivity", "bound", "signs"))
    _spec_args(p)
    p.add_argument("--no-fourth-powers", action="store_true")
    p.add_argument("--workers", type=int, help=f"worker processes (default ${WORKERS_ENV} or 1)")
    p.add_argument("--checkpoint", help="checkpoint directory for resumable runs")
    p.add_argument("--cross-check", action="store_true", default=None,
                   help="compare against the full expansion (default when r <= 3)")
    p.add_argument("--include-coefficients", action="store_true")
    p.add_argument("--seed", type=int, default=0, help="seed for random identity checks")
    p.add_argument("--count", type=int, default=100, help="number of random cubics")
    p.add_argument("--bound", type=int, default=9, help="coefficient range [-bound, bound]")
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("coeff", help="one coefficient of S by factorization")
    p.add_argument("--matrix", required=True, help="exponent matrix, rows ';'-separated")
    p.add_argument("--replicate", type=int, default=1)
    p.add_argument("--d", help="degrees d1,d2,d3 (inferred from row sums when omitted)")
    p.add_argument("--cross-check", action="store_true", help="also expand S in full")
    p.add_argument("--long", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_coeff)

    p = sub.add_parser("curvature", help="curvature of the Hessian metric")
    p.add_argument("mode", choices=("at", "scan"))
    _cubic_args(p)
    p.add_argument("--x", default="1,1,1", help="point for 'at', e.g. 1,2,1/3")
    p.add_argument("--resolution", type=int, default=5, help="grid points per axis for 'scan'")
    p.add_argument("--assign", action="append", help="name=value for symbolic coefficients")
    _common(p)
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("appendix", help="closed-form family coefficients")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--s", type=int)
    g.add_argument("--range", type=int, nargs=2, metavar=("LO", "HI"))
    g.add_argument("--closed-form", type=int, metavar="T")
    _common(p)
    p.set_defaults(func=cmd_appendix)
    return parser


def _config(args) -> RunConfig:
    return RunConfig(
        subcommand=args.command + (f" {args.kind}" if hasattr(args, "kind") else "")
        + (f" {args.mode}" if hasattr(args, "mode") else ""),
        spec_file=getattr(args, "spec", None) or getattr(args, "spec_file", None),
        no_fourth_powers=getattr(args, "no_fourth_powers", False),
        workers=getattr(args, "workers", None) or 1,
        checkpoint_dir=getattr(args, "checkpoint", None),
        seed=getattr(args, "seed", None),
        output=args.output,
        format=args.format,
    )


def _lineage(directory: Optional[str]) -> List[dict]:
    if not directory or not Path(directory).is_dir():
        return []
    out = []
    for path in sorted(Path(directory).glob("shard_*.json")):
        out.append({"file": path.name,
                    "sha256": hashlib.sha256(path.read_bytes()).hexdigest()})
    return out


def _write_run_record(args, wall: float):
    text = getattr(args, "_report_text", "") or ""
    record = RunRecord(config=asdict(_config(args)), version=__version__,
                       wall_time=round(wall, 3),
                       digest=hashlib.sha256(text.encode()).hexdigest(),
                       checkpoint_lineage=_lineage(getattr(args, "_checkpoint", None)))
    with open(args.run_log, "a") as fh:
        fh.write(json.dumps(asdict(record), sort_keys=True) + "\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    t0 = time.perf_counter()
    try:
        code = args.func(args)
    except (UsageError, SpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DivisibilityError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    if args.run_log:
        _write_run_record(args, time.perf_counter() - t0)
    return code


if __name__ == "__main__":
    sys.exit(main())
