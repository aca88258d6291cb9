"""Command-line front end: tensor I/O, solves, norms, deflation, case checks.

Subcommands
-----------
approx    best rank-r approximation under a chosen orthogonality class
oracle    certified bracket on the best objective (small shapes only)
norms     Frobenius/spectral/class norms with the monotonicity chain check
deflate   greedy rank-one deflation, optionally constrained
gen       emit a named or random tensor as JSON
paper     `paper verify [--case ID]` reruns the worked examples

Tensors travel as the JSON wire format of ``tensor_to_json``; input comes
from --input or stdin, output goes to stdout or --out. Exit codes: 0 on
success, 1 when a verification fails, 2 on usage or input errors. Reports
carry no timestamps or timings, so identical (argv, seed) runs are
byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from .exceptions import SymorthoError, BudgetError
from .orthogonality import Notion, decomposition_check
from .oracle import grid_oracle
from .solvers import ApproxProblem, SolverConfig, solve
from .norms import chain_check
from .deflation import deflate
from .cases import CASE_IDS, build_case, verify_all
from .tensor import (
    DenseTensor,
    random_symmetric,
    random_tensor,
    tensor_from_json,
    tensor_to_json,
)

MAX_MODE_DIM = 16
MAX_ORDER = 6

_EXIT_OK = 0
_EXIT_FAIL = 1
_EXIT_USAGE = 2


class _UsageError(Exception):
    pass


def _apply_thread_cap() -> None:
    """Best-effort cap on BLAS worker threads via SYMORTHO_THREADS."""
    cap = os.environ.get("SYMORTHO_THREADS")
    if not cap:
        return
    try:
        n = max(1, int(cap))
    except ValueError:
        raise _UsageError(f"SYMORTHO_THREADS must be an integer, got {cap!r}")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(n))


def _parse_notion(tag: str, modes: str | None) -> Notion:
    tag = tag.lower()
    if tag == "con":
        return Notion.con()
    if tag == "son":
        return Notion.son()
    if tag == "on":
        return Notion.on()
    if tag == "pcon":
        if not modes:
            raise _UsageError("--notion pcon needs --modes, e.g. --modes 1,2")
        try:
            parsed = tuple(int(x) for x in modes.split(","))
        except ValueError:
            raise _UsageError(f"--modes must be comma-separated integers, got {modes!r}")
        return Notion.pcon(parsed)
    raise _UsageError(f"unknown notion {tag!r} (expected con, son, on, or pcon)")


def _read_tensor(path: str | None) -> DenseTensor:
    if path is None or path == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise _UsageError(f"cannot read {path}: {exc}")
    t = tensor_from_json(text)
    if t.order > MAX_ORDER:
        raise _UsageError(
            f"order {t.order} exceeds the CLI limit of {MAX_ORDER} "
            "(the library itself has no such limit)"
        )
    if max(t.dims) > MAX_MODE_DIM:
        raise _UsageError(
            f"mode dimension {max(t.dims)} exceeds the CLI limit of {MAX_MODE_DIM} "
            "(the library itself has no such limit)"
        )
    return t


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _csv_text(rows: list) -> str:
    """Scalar summary rows only; nested structures stay in the JSON format."""
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return buf.getvalue()


def _markdown_table(header: list, rows: list) -> str:
    lines = [
        "| " + " | ".join(header) + " |",
        "| " + " | ".join("---" for _ in header) + " |",
    ]
    for row in rows:
        lines.append("| " + " | ".join(str(x) for x in row) + " |")
    return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    return f"{x:.10g}"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_approx(args) -> int:
    t = _read_tensor(args.input)
    notion = _parse_notion(args.notion, args.modes)
    config = SolverConfig(starts=args.starts, seed=args.seed)
    problem = ApproxProblem(
        t,
        notion,
        args.rank,
        symmetric_constraint=args.symmetric,
        structured=args.structured,
        config=config,
    )
    result = solve(problem)
    cert = decomposition_check(result.decomposition, notion)
    payload = result.to_dict()
    payload["feasible"] = cert.ok
    payload["notion"] = str(notion)
    payload["rank"] = args.rank
    if args.format == "json":
        _emit(_json_text(payload), args.out)
    elif args.format == "csv":
        _emit(
            _csv_text(
                [
                    {
                        "notion": str(notion),
                        "rank": args.rank,
                        "objective": _fmt(result.objective),
                        "residual": _fmt(result.residual),
                        "relative_residual": _fmt(result.relative_residual),
                        "feasible": cert.ok,
                        "seed": args.seed,
                    }
                ]
            ),
            args.out,
        )
    else:
        rows = [
            ["objective", _fmt(result.objective)],
            ["residual", _fmt(result.residual)],
            ["relative residual", _fmt(result.relative_residual)],
            ["feasible", str(cert.ok)],
            ["seed", str(args.seed)],
        ]
        _emit(_markdown_table([f"{notion} rank {args.rank}", "value"], rows), args.out)
    return _EXIT_OK if cert.ok else _EXIT_FAIL


def _cmd_oracle(args) -> int:
    t = _read_tensor(args.input)
    notion = _parse_notion(args.notion, args.modes)
    config = SolverConfig(starts=args.starts, seed=args.seed)
    problem = ApproxProblem(
        t,
        notion,
        args.rank,
        symmetric_constraint=args.symmetric,
        structured=args.structured,
        config=config,
    )
    report = grid_oracle(problem, certification_tol=args.certification_tol)
    payload = report.to_dict()
    payload["notion"] = str(notion)
    payload["rank"] = args.rank
    if args.format == "json":
        _emit(_json_text(payload), args.out)
    elif args.format == "csv":
        _emit(
            _csv_text(
                [
                    {
                        "notion": str(notion),
                        "rank": args.rank,
                        "lo": _fmt(report.lo),
                        "hi": _fmt(report.hi),
                        "width": _fmt(report.width),
                        "evaluations": report.evaluations,
                    }
                ]
            ),
            args.out,
        )
    else:
        rows = [
            ["objective lower bound", _fmt(report.lo)],
            ["objective upper bound", _fmt(report.hi)],
            ["bracket width", _fmt(report.width)],
            ["evaluations", str(report.evaluations)],
            ["chart", report.shape],
        ]
        _emit(_markdown_table(["certified bracket", "value"], rows), args.out)
    return _EXIT_OK


def _cmd_norms(args) -> int:
    t = _read_tensor(args.input)
    config = SolverConfig(starts=args.starts, seed=args.seed)
    chain = chain_check(t, args.rank_max, config=config, certify=not args.no_certify)
    report = chain.report
    if args.format == "json":
        payload = report.to_dict()
        payload["violations"] = list(chain.violations)
        _emit(_json_text(payload), args.out)
    elif args.format == "csv":
        rows = [
            {"norm": "frobenius", "rank": "", "value": _fmt(report.frobenius), "status": "exact"},
            {"norm": "spectral", "rank": 1, "value": _fmt(report.spectral), "status": "multi-start"},
        ]
        for e in report.entries:
            rows.append(
                {
                    "norm": str(e.notion),
                    "rank": e.rank,
                    "value": _fmt(e.value),
                    "status": e.status,
                }
            )
        _emit(_csv_text(rows), args.out)
    else:
        rows = [["frobenius", "", _fmt(report.frobenius), "exact"]]
        rows.append(["spectral", "1", _fmt(report.spectral), "multi-start"])
        for e in report.entries:
            rows.append([str(e.notion), str(e.rank), _fmt(e.value), e.status])
        text = _markdown_table(["norm", "rank", "value", "status"], rows)
        if chain.violations:
            text += "\nviolations:\n" + "\n".join(f"- {v}" for v in chain.violations) + "\n"
        _emit(text, args.out)
    return _EXIT_OK if chain.ok else _EXIT_FAIL


def _cmd_deflate(args) -> int:
    t = _read_tensor(args.input)
    config = SolverConfig(starts=args.starts, seed=args.seed)
    result = deflate(t, args.rank, constrained=args.constrained, config=config)
    payload = {
        "objective": result.objective,
        "residual": result.residual,
        "trace": result.trace.to_dict(),
        "decomposition": {
            "terms": [
                {
                    "sigma": float(np.real(term.sigma)),
                    "factors": [[float(x) for x in np.real(f)] for f in term.factors],
                }
                for term in result.decomposition.terms
            ]
        },
    }
    if args.format == "json":
        _emit(_json_text(payload), args.out)
    elif args.format == "csv":
        rows = [
            {
                "step": i + 1,
                "sigma": _fmt(s.sigma),
                "residual_norm": _fmt(s.residual_norm),
                "zero": s.zero,
            }
            for i, s in enumerate(result.trace.steps)
        ]
        _emit(_csv_text(rows), args.out)
    else:
        rows = [
            [str(i + 1), _fmt(s.sigma), _fmt(s.residual_norm), "yes" if s.zero else ""]
            for i, s in enumerate(result.trace.steps)
        ]
        text = _markdown_table(["step", "sigma", "residual norm", "zero"], rows)
        text += f"\nfinal residual: {_fmt(result.residual)}\n"
        if result.trace.stopped_early:
            text += f"stopped early: {result.trace.reason}\n"
        _emit(text, args.out)
    return _EXIT_OK


def _cmd_gen(args) -> int:
    if (args.case is None) == (args.dims is None):
        raise _UsageError("gen needs exactly one of --case or --dims")
    if args.case is not None:
        if args.case not in CASE_IDS:
            raise _UsageError(
                f"unknown case {args.case!r}; choose from {', '.join(CASE_IDS)}"
            )
        t = build_case(args.case).tensor
    else:
        try:
            dims = tuple(int(x) for x in args.dims.split(","))
        except ValueError:
            raise _UsageError(f"--dims must be comma-separated integers, got {args.dims!r}")
        if not dims or any(n < 1 for n in dims):
            raise _UsageError("--dims entries must be positive")
        if len(dims) > MAX_ORDER or max(dims) > MAX_MODE_DIM:
            raise _UsageError(
                f"generated tensors are capped at order {MAX_ORDER} and mode dimension {MAX_MODE_DIM}"
            )
        rng = np.random.default_rng(args.seed)
        if args.symmetric:
            if len(set(dims)) != 1:
                raise _UsageError("--symmetric needs equal dims, e.g. --dims 3,3,3")
            t = random_symmetric(dims[0], len(dims), rng)
        else:
            t = random_tensor(dims, rng)
    _emit(tensor_to_json(t) + "\n", args.out)
    return _EXIT_OK


def _cmd_paper_verify(args) -> int:
    ids = [args.case] if args.case else None
    if args.case and args.case not in CASE_IDS:
        raise _UsageError(
            f"unknown case {args.case!r}; choose from {', '.join(CASE_IDS)}"
        )
    config = SolverConfig(seed=args.seed)
    reports = verify_all(config=config, case_ids=ids, count=args.count)
    rows = []
    for rep in reports:
        for c in rep.checks:
            rows.append(
                {
                    "case": rep.case_id,
                    "check": c.name,
                    "expected": _fmt(c.expected),
                    "measured": _fmt(c.measured),
                    "tolerance": _fmt(c.tolerance),
                    "kind": c.kind,
                    "pass": c.passed,
                }
            )
    all_pass = all(rep.passed for rep in reports)
    if args.format == "json":
        payload = {
            "all_pass": all_pass,
            "cases": [
                {
                    "case": rep.case_id,
                    "passed": rep.passed,
                    "checks": [c.to_dict() for c in rep.checks],
                }
                for rep in reports
            ],
        }
        _emit(_json_text(payload), args.out)
    elif args.format == "csv":
        _emit(_csv_text(rows), args.out)
    else:
        table_rows = [
            [
                r["case"],
                r["check"],
                r["expected"],
                r["measured"],
                r["tolerance"],
                "pass" if r["pass"] else "FAIL",
            ]
            for r in rows
        ]
        text = _markdown_table(
            ["case", "check", "expected", "measured", "tolerance", "status"],
            table_rows,
        )
        text += f"\noverall: {'pass' if all_pass else 'FAIL'}\n"
        _emit(text, args.out)
    return _EXIT_OK if all_pass else _EXIT_FAIL


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_io_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", default=None, help="tensor JSON path (default: stdin)")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument(
        "--format", choices=("json", "csv", "markdown"), default="json",
        help="output format (default: json)",
    )
    p.add_argument("--starts", type=int, default=64, help="multi-start count")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symortho",
        description="low-rank tensor approximation under orthogonality constraints",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("approx", help="best rank-r approximation")
    _add_io_flags(p)
    p.add_argument("--notion", required=True, help="con | son | on | pcon")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--modes", default=None, help="pcon modes, e.g. 1,2 (1-based)")
    p.add_argument("--symmetric", action="store_true", help="force symmetric terms")
    p.add_argument(
        "--structured", action="store_true",
        help="pcon: repeat one vector across the constrained modes",
    )
    p.set_defaults(func=_cmd_approx)

    p = sub.add_parser("oracle", help="certified objective bracket")
    _add_io_flags(p)
    p.add_argument("--notion", required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--modes", default=None)
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--structured", action="store_true")
    p.add_argument("--certification-tol", type=float, default=1e-6)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("norms", help="norm table with chain check")
    _add_io_flags(p)
    p.add_argument("--rank-max", type=int, default=3)
    p.add_argument("--no-certify", action="store_true")
    p.set_defaults(func=_cmd_norms)

    p = sub.add_parser("deflate", help="greedy rank-one deflation")
    _add_io_flags(p)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--constrained", action="store_true")
    p.set_defaults(func=_cmd_deflate)

    p = sub.add_parser("gen", help="emit a named or random tensor")
    p.add_argument("--case", default=None, help=f"one of: {', '.join(CASE_IDS)}")
    p.add_argument("--dims", default=None, help="random tensor dims, e.g. 3,3,3")
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("paper", help="worked-example verification")
    paper_sub = p.add_subparsers(dest="paper_command", required=True)
    pv = paper_sub.add_parser("verify", help="rerun the named cases")
    pv.add_argument("--case", default=None, help="single case id (default: all)")
    pv.add_argument("--count", type=int, default=None, help="override sample counts")
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--out", default=None)
    pv.add_argument("--format", choices=("json", "csv", "markdown"), default="markdown")
    pv.set_defaults(func=_cmd_paper_verify)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; pass both through
        return int(exc.code or 0)
    try:
        _apply_thread_cap()
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_FAIL
    except SymorthoError as exc:
        # malformed input, infeasible (notion, rank), unsupported shape, ...
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
