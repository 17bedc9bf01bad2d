"""Command-line interface.

Exit codes: 0 all checks pass, 1 at least one check failed, 2 infeasible
solve, 3 input or usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .document import parse_document, serialize_document
from .errors import BundleError
from .fuzzing import fuzz
from .hermitian import HermitianSolveResult, Infeasible
from .numutil import DEFAULT_TOL
from .runner import CHECK_NAMES, run_check, solve_hermitian_doc, synthesize

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INFEASIBLE = 2
EXIT_INPUT = 3


def _default_tol() -> float:
    raw = os.environ.get("BTK_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        value = float(raw)
    except ValueError:
        raise SystemExit(f"btk: BTK_TOL is not a number: {raw!r}")
    if value <= 0:
        raise SystemExit(f"btk: BTK_TOL must be positive, got {raw!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="btk",
        description="Checks, synthesis and fuzzing for transports along paths.",
    )
    parser.add_argument("--tol", type=float, default=None, help="residual tolerance")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument(
        "--parallel", action="store_true", help="parallel fuzz trial execution"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="run a named check on a document")
    p_check.add_argument("check_name", choices=CHECK_NAMES)
    p_check.add_argument("document")
    for flag in ("factor", "morphism", "t1", "t2", "field", "metric", "section"):
        p_check.add_argument(f"--{flag}")
    p_check.add_argument("--seed", type=int, default=0)

    p_syn = sub.add_parser("synthesize", help="add derived entries to a document")
    p_syn.add_argument("kind", choices=("morphism", "hermitian", "transport"))
    p_syn.add_argument("document")
    p_syn.add_argument("--out", help="output path (default: overwrite input)")
    p_syn.add_argument("--name")
    for flag in ("f1", "f2", "c0", "c", "factor", "field", "metric", "y"):
        p_syn.add_argument(f"--{flag}")

    p_solve = sub.add_parser("solve", help="solve for a consistent transport")
    p_solve.add_argument("kind", choices=("hermitian",))
    p_solve.add_argument("document")
    p_solve.add_argument("--field", required=True)
    p_solve.add_argument("--metric", required=True)
    p_solve.add_argument("--y")
    p_solve.add_argument("--seed", type=int, default=0)

    p_fuzz = sub.add_parser("fuzz", help="seeded randomized property suite")
    p_fuzz.add_argument("--seed", type=int, required=True)
    p_fuzz.add_argument("--dim", type=int, default=2)
    p_fuzz.add_argument("--samples", type=int, default=6)
    p_fuzz.add_argument("--trials", type=int, default=100)
    p_fuzz.add_argument("--corrupt", help=argparse.SUPPRESS)

    return parser


def _load(path: str):
    try:
        with open(path, "rb") as fh:
            return parse_document(fh.read())
    except OSError as exc:
        raise BundleError(f"cannot read {path}: {exc}") from exc


def _cmd_check(args, tol: float) -> int:
    doc = _load(args.document)
    flags = {
        k: getattr(args, k)
        for k in ("factor", "morphism", "t1", "t2", "field", "metric", "section")
        if getattr(args, k) is not None
    }
    flags["seed"] = args.seed
    verdicts = run_check(doc, args.check_name, flags, tol)
    if args.json:
        print(json.dumps([v.as_dict() for v in verdicts], indent=2))
    else:
        for v in verdicts:
            status = "pass" if v.passed else "FAIL"
            line = f"{status}  {v.check}  {v.entity}  residual {v.max_residual:.6e}"
            if v.worst_location is not None:
                line += f"  worst at {v.worst_location}"
            print(line)
    return EXIT_PASS if all(v.passed for v in verdicts) else EXIT_FAIL


def _cmd_synthesize(args, tol: float) -> int:
    doc = _load(args.document)
    flags = {
        k: getattr(args, k)
        for k in ("f1", "f2", "c0", "c", "factor", "field", "metric", "y", "name")
        if getattr(args, k) is not None
    }
    result = synthesize(doc, args.kind, flags)
    if isinstance(result, Infeasible):
        print(
            f"infeasible: {result.reason} (certificate residual "
            f"{result.residual:.6e} over {result.starts} starts)"
        )
        return EXIT_INFEASIBLE
    out_path = args.out or args.document
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(serialize_document(doc))
    if args.json:
        print(json.dumps({"written": result, "path": out_path}))
    else:
        print(f"wrote {', '.join(result)} to {out_path}")
    return EXIT_PASS


def _cmd_solve(args, tol: float) -> int:
    doc = _load(args.document)
    flags = {"field": args.field, "metric": args.metric, "seed": args.seed}
    if args.y is not None:
        flags["y"] = args.y
    result = solve_hermitian_doc(doc, flags)
    if isinstance(result, Infeasible):
        if args.json:
            print(
                json.dumps(
                    {
                        "feasible": False,
                        "reason": result.reason,
                        "certificate_residual": result.residual,
                        "starts": result.starts,
                    }
                )
            )
        else:
            print(
                f"infeasible: {result.reason} (certificate residual "
                f"{result.residual:.6e} over {result.starts} starts)"
            )
        return EXIT_INFEASIBLE
    assert isinstance(result, HermitianSolveResult)
    if args.json:
        print(
            json.dumps(
                {
                    "feasible": True,
                    "signature": [result.sig.p, result.sig.q],
                    "factor": [m.tolist() for m in result.factor.matrices],
                }
            )
        )
    else:
        print(f"feasible, signature ({result.sig.p}, {result.sig.q})")
    return EXIT_PASS


def _cmd_fuzz(args, parallel: bool) -> int:
    corrupt = args.corrupt or os.environ.get("BTK_FUZZ_CORRUPT") or None
    report = fuzz(
        args.seed,
        args.dim,
        args.samples,
        args.trials,
        parallel=parallel,
        corrupt=corrupt,
    )
    sys.stdout.write(report.render())
    return EXIT_PASS if report.passed else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    tol = args.tol if args.tol is not None else _default_tol()
    if tol <= 0:
        print("btk: --tol must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        if args.command == "check":
            return _cmd_check(args, tol)
        if args.command == "synthesize":
            return _cmd_synthesize(args, tol)
        if args.command == "solve":
            return _cmd_solve(args, tol)
        if args.command == "fuzz":
            return _cmd_fuzz(args, args.parallel)
    except BundleError as exc:
        print(f"btk: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, OSError) as exc:
        print(f"btk: {exc}", file=sys.stderr)
        return EXIT_INPUT
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
