"""Command-line interface: codimension, cocharacter and verification tables."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from .diffpoly import ParseError, parse_generators
from .exactla import format_scalar
from .fdalg import (
    AlgebraError,
    algebra_from_json,
    algebra_to_json,
    derivation_space,
    derived_algebra,
    in_span,
    inner_derivation,
    is_metabelian,
    op_to_dense,
    operator_closure,
    span_dimension,
    validate_algebra,
)
from .formulas import closed_form, multiplicities
from .ideals import (
    ConsequenceEngine,
    ConsistencyError,
    EvaluationPlan,
    PlanError,
    PlanMode,
    RefutationError,
    codimension,
    cocharacter,
    trivial_operator_basis,
    verify_generating_set,
)
from .repsn import DecompositionError, format_partition
from .zoo import (
    GRASSMANN_MODELS,
    MODEL_NAMES,
    ModelSpec,
    build_named,
    canonical_grassmann_plan,
    default_truncation,
    generators_for,
    grassmann_scan,
    list_models,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_ERROR = 3

CODIM_COLUMNS = ["model", "n", "c_n", "expected", "match", "mode", "seed", "ms"]
COCHAR_COLUMNS = ["model", "n", "partition", "m", "expected", "match"]
VERIFY_COLUMNS = ["model", "n", "lower", "upper", "equal", "closed_form", "match", "mode"]


class UsageError(Exception):
    pass


def parse_range(text: str) -> List[int]:
    """``"3"`` or ``"1..5"`` (inclusive)."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected N or A..B")
    if lo < 1 or hi < lo:
        raise UsageError(f"bad range {text!r}; need 1 <= A <= B")
    return list(range(lo, hi + 1))


class Target:
    """The algebra a command runs on: a built-in model or a JSON file."""

    def __init__(self, args):
        if args.model and args.json:
            raise UsageError("--model and --json are mutually exclusive")
        if not args.model and not args.json:
            raise UsageError("one of --model or --json is required")
        self.args = args
        self.json_path = args.json
        self.name = args.model or Path(args.json).stem
        self.t = getattr(args, "t", None)
        self.grassmann = self.name in GRASSMANN_MODELS and not args.json
        if args.model and args.model not in MODEL_NAMES:
            raise UsageError(f"unknown model {args.model!r}; choose from {', '.join(MODEL_NAMES)}")
        if self.name == "grassmann_der" and not args.json:
            self.t = 1 if self.t is None else self.t
        elif self.t:
            raise UsageError("--t only applies to grassmann_der")
        self.t = self.t or 0
        mode = getattr(args, "mode", None)
        if mode == "canonical" and not self.grassmann:
            raise UsageError("--mode canonical only applies to the Grassmann models")
        self.mode = mode or ("canonical" if self.grassmann else "full")
        if self.json_path:
            A = algebra_from_json(json.loads(Path(self.json_path).read_text()))
            validate_algebra(A)
            self._fixed = (A, operator_closure(A) if A.derivations else trivial_operator_basis(A))

    def spec(self, n: int) -> Optional[ModelSpec]:
        if self.json_path:
            return None
        if self.grassmann:
            m = self.args.m if getattr(self.args, "m", None) else default_truncation(n, self.t)
            return ModelSpec(self.name, m, self.t)
        return ModelSpec(self.name)

    def label(self, n: int) -> str:
        spec = self.spec(n)
        return spec.label if spec is not None else self.name

    def build(self, n: int):
        if self.json_path:
            return self._fixed
        return build_named(self.spec(n), validate=not self.grassmann)

    def plan(self, n: int) -> EvaluationPlan:
        args = self.args
        if self.mode == "canonical":
            plan = canonical_grassmann_plan(n, self.t, strict=True)
            return EvaluationPlan(mode=plan.mode, tuple_source=plan.tuple_source, note=plan.note,
                                  seed=args.seed, cap=args.cap)
        return EvaluationPlan(mode=PlanMode(self.mode), seed=args.seed, cap=args.cap)

    def expected(self, n: int) -> Optional[int]:
        return None if self.json_path else closed_form(self.name, n, self.t)

    def expected_multiplicities(self, n: int):
        return None if self.json_path else multiplicities(self.name, n, self.t)

    def generators(self, W) -> list:
        if self.args.gens:
            return parse_generators(self.args.gens, W.gen_names)
        if self.json_path:
            raise UsageError("--json models need --gens for verify")
        return generators_for(self.spec(2), W)


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    return str(x)


def render_table(rows: Sequence[dict], columns: Sequence[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(list(rows), indent=2, sort_keys=True) + "\n"
    table = [[_cell(r.get(c)) for c in columns] for r in rows]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(table)
        return buf.getvalue()
    widths = [max([len(c)] + [len(row[k]) for row in table]) for k, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
    lines += ["  ".join(x.ljust(w) for x, w in zip(row, widths)).rstrip() for row in table]
    return "\n".join(lines) + "\n"


def emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def fail_report(command: str, failures: list) -> None:
    sys.stderr.write(json.dumps({"command": command, "status": "fail", "failures": failures}, sort_keys=True) + "\n")


# -- commands ----------------------------------------------------------------------


def cmd_codim(args) -> Tuple[List[dict], List[dict]]:
    target = Target(args)
    rows, failures = [], []
    for n in parse_range(args.n):
        A, W = target.build(n)
        start = time.perf_counter()
        report = codimension(A, W, n, target.plan(n))
        ms = (time.perf_counter() - start) * 1000
        expected = target.expected(n)
        match = None if expected is None else report.c_n == expected
        rows.append({
            "model": target.label(n),
            "n": n,
            "c_n": report.c_n,
            "expected": expected,
            "match": match,
            "mode": report.mode if report.exact else f"{report.mode} (inexact)",
            "seed": args.seed,
            "ms": round(ms, 1) if args.timing else None,
        })
        if match is False:
            failures.append({"n": n, "c_n": report.c_n, "expected": expected})
    return rows, failures


def cmd_cochar(args) -> Tuple[List[dict], List[dict]]:
    target = Target(args)
    rows, failures = [], []
    for n in parse_range(args.n):
        A, W = target.build(n)
        mults = cocharacter(A, W, n, target.plan(n))
        expected = target.expected_multiplicities(n)
        shapes = list(mults)
        if expected is not None:
            shapes += [lam for lam in expected if lam not in mults]
        shapes.sort(reverse=True)
        for lam in shapes:
            m = mults.get(lam, 0)
            exp = None if expected is None else expected.get(lam, 0)
            match = None if exp is None else m == exp
            rows.append({
                "model": target.label(n),
                "n": n,
                "partition": format_partition(lam),
                "m": m,
                "expected": exp,
                "match": match,
            })
            if match is False:
                failures.append({"n": n, "partition": format_partition(lam), "m": m, "expected": exp})
    return rows, failures


def cmd_verify(args) -> Tuple[List[dict], List[dict]]:
    target = Target(args)
    if target.mode == "sampled":
        raise UsageError("verify needs an exact mode")
    rows, failures = [], []
    engine = None
    for n in parse_range(args.n):
        A, W = target.build(n)
        S = target.generators(W)
        if engine is None or engine.W is not W:
            engine = ConsequenceEngine(S, W)
        expected = None if args.gens else target.expected(n)
        verdict = verify_generating_set(A, W, S, n, expected, target.plan(n), engine)
        rows.append({
            "model": target.label(n),
            "n": n,
            "lower": verdict.lower,
            "upper": verdict.upper,
            "equal": verdict.equal,
            "closed_form": verdict.closed_form,
            "match": verdict.closed_form_match,
            "mode": verdict.mode,
            "generators_sha256": verdict.generators_sha256,
            "notes": verdict.notes,
        })
        if not verdict.passed:
            failures.append(verdict.to_dict())
    return rows, failures


def cmd_derspace(args) -> Tuple[dict, List[dict]]:
    target = Target(args)
    A, _ = target.build(2)
    dim, ders = derivation_space(A)
    derived = derived_algebra(ders, A.dim)
    inner = [inner_derivation(A, {k: 1}) for k in range(A.dim)]
    all_inner = all(in_span(inner, D, A.dim) for D in ders)
    result = {
        "model": target.name,
        "dim": dim,
        "derived_dim": span_dimension(derived, A.dim),
        "derived_abelian": is_metabelian(ders, A.dim),
        "inner_dim": span_dimension(inner, A.dim),
        "all_inner": all_inner,
        "basis": [[[format_scalar(x) for x in row] for row in op_to_dense(D, A.dim)] for D in ders],
    }
    return result, []


def cmd_grassmann_scan(args) -> Tuple[List[dict], List[dict]]:
    t = args.t or 0
    rows, failures = [], []
    for n in parse_range(args.n):
        report = grassmann_scan(n, t, args.m_start, args.m_max)
        row = report.to_dict()
        rows.append(row)
        if not report.conclusive or not report.match:
            failures.append(row)
    return rows, failures


def _format_scan(rows: List[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2, sort_keys=True) + "\n"
    flat = [{
        "n": r["n"],
        "t": r["t"],
        "values": " ".join(f"m={v['m']}:{v['c_n']}" for v in r["values"]),
        "stable": r["stable"],
        "expected": r["expected"],
        "match": r["match"],
    } for r in rows]
    return render_table(flat, ["n", "t", "values", "stable", "expected", "match"], fmt)


def _format_derspace(result: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(result, indent=2, sort_keys=True) + "\n"
    keys = ["model", "dim", "derived_dim", "derived_abelian", "inner_dim", "all_inner"]
    return render_table([result], keys, fmt)


def _format_cochar(rows: List[dict], fmt: str) -> str:
    if fmt != "pretty":
        return render_table(rows, COCHAR_COLUMNS, fmt)
    lines = []
    for n in sorted({r["n"] for r in rows}):
        part = [r for r in rows if r["n"] == n]
        terms = ", ".join(f"{r['partition']}:{r['m']}" for r in part if r["m"])
        ok = all(r["match"] is not False for r in part)
        known = any(r["match"] is not None for r in part)
        status = ("match" if ok else "MISMATCH") if known else "no formula"
        lines.append(f"{part[0]['model']} n={n}: {terms}  [{status}]")
    return "\n".join(lines) + "\n"


def cmd_zoo(args) -> int:
    if args.action == "list":
        rows = list_models(t=args.t or 1)
        if args.format == "json":
            emit(args, json.dumps(rows, indent=2, sort_keys=True) + "\n")
        else:
            flat = [dict(r, derivations=" ".join(r["derivations"]), W_basis=" ".join(r["W_basis"])) for r in rows]
            emit(args, render_table(flat, ["model", "spec", "dim", "dim_W", "derivations", "W_basis"], args.format))
        return EXIT_OK
    if not args.model:
        raise UsageError("zoo export needs --model")
    if args.model not in MODEL_NAMES:
        raise UsageError(f"unknown model {args.model!r}")
    t = args.t or (1 if args.model == "grassmann_der" else 0)
    m = args.m or (default_truncation(2, t) if args.model in GRASSMANN_MODELS else None)
    A, _ = build_named(ModelSpec(args.model, m, t), validate=False)
    emit(args, json.dumps(algebra_to_json(A), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------------


def _common(p: argparse.ArgumentParser, n_default: Optional[str] = None) -> None:
    p.add_argument("--model", help="built-in model name (see `zoo list`)")
    p.add_argument("--json", help="path to an algebra JSON file")
    p.add_argument("--n", default=n_default, required=n_default is None, help="degree N or range A..B")
    p.add_argument("--t", type=int, help="number of inner derivations for grassmann_der")
    p.add_argument("--m", type=int, help="Grassmann truncation (default 2n+t)")
    p.add_argument("--mode", choices=[m.value for m in PlanMode], help="evaluation plan")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, help="entry cap for the full plan (env DIFFPI_CAP)")
    p.add_argument("--format", choices=["csv", "json", "pretty"], default="pretty")
    p.add_argument("--out", help="write the report to this file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="diffpi", description="Differential identities of small algebras.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("codim", help="codimension table")
    _common(p)
    p.add_argument("--timing", action="store_true", help="fill the ms column")

    p = sub.add_parser("cochar", help="cocharacter multiplicities")
    _common(p)

    p = sub.add_parser("verify", help="certify a generating set of the identities")
    _common(p)
    p.add_argument("--gens", help="';'-separated generators, e.g. \"[x1,x2][x3,x4]\"")

    p = sub.add_parser("derspace", help="derivation space of an algebra")
    p.add_argument("--model")
    p.add_argument("--json")
    p.add_argument("--format", choices=["csv", "json", "pretty"], default="pretty")
    p.add_argument("--out")

    p = sub.add_parser("grassmann-scan", help="codimension of truncated Grassmann algebras until stable")
    p.add_argument("--n", required=True)
    p.add_argument("--t", type=int, default=0)
    p.add_argument("--m-start", type=int)
    p.add_argument("--m-max", type=int)
    p.add_argument("--format", choices=["csv", "json", "pretty"], default="pretty")
    p.add_argument("--out")

    p = sub.add_parser("zoo", help="built-in models")
    p.add_argument("action", choices=["list", "export"])
    p.add_argument("--model")
    p.add_argument("--m", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--format", choices=["csv", "json", "pretty"], default="pretty")
    p.add_argument("--out")
    return parser


def run(args) -> int:
    if args.command == "zoo":
        return cmd_zoo(args)
    if args.command == "derspace":
        args.mode = None
        result, failures = cmd_derspace(args)
        emit(args, _format_derspace(result, args.format))
        return EXIT_OK
    if args.command == "grassmann-scan":
        rows, failures = cmd_grassmann_scan(args)
        emit(args, _format_scan(rows, args.format))
    elif args.command == "codim":
        rows, failures = cmd_codim(args)
        emit(args, render_table(rows, CODIM_COLUMNS, args.format))
    elif args.command == "cochar":
        rows, failures = cmd_cochar(args)
        emit(args, _format_cochar(rows, args.format))
    else:
        rows, failures = cmd_verify(args)
        emit(args, render_table(rows, VERIFY_COLUMNS, args.format))
    if failures:
        fail_report(args.command, failures)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except UsageError as exc:
        parser.error(str(exc))
    except RefutationError as exc:
        fail_report(args.command, [{
            "error": "refuted",
            "generator": exc.generator,
            "witness": exc.witness,
        }])
        return EXIT_CHECK_FAILED
    except (PlanError, ConsistencyError, DecompositionError, AlgebraError, ParseError, ValueError, OSError) as exc:
        sys.stderr.write(json.dumps({
            "command": args.command,
            "status": "error",
            "error": type(exc).__name__,
            "message": str(exc),
        }, sort_keys=True) + "\n")
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
