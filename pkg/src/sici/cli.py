"""Command-line front end.

Exit codes: 0 success, 1 validation or parse failure, 2 compile failure,
3 oracle size guard.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from .analysis import parameter_count
from .compiler import compile_spec
from .core import Cpt
from .document import parse_ambient, parse_document, read_cpt, write_cpt
from .errors import SiciError, SizeGuardError
from .model import normalize_tables, spec_warnings, table_violations
from .oracle import check_oracle_size, compare_cpts, oracle_cpt
from .structure import verify_ci_statements

EXIT_OK, EXIT_INVALID, EXIT_COMPILE, EXIT_SIZE = 0, 1, 2, 3


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.exit_code = code


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise _Fail(EXIT_INVALID, f"cannot read {path}: {exc.strerror}") from None


def _describe(exc: SiciError) -> str:
    return f"[{exc.code}] {exc}"


def _load(path: str):
    try:
        return parse_document(_read(path))
    except SiciError as exc:
        raise _Fail(EXIT_INVALID, f"{path}: {_describe(exc)}") from None


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _validated_spec(args):
    doc = _load(args.spec)
    spec = doc.spec
    if getattr(args, "normalize_rows", False):
        spec = normalize_tables(spec)
    bad = table_violations(spec, args.tolerance)
    if bad:
        lines = [f"{path}: {v}" for path, v in bad]
        raise _Fail(EXIT_INVALID, "invalid tables:\n  " + "\n  ".join(lines))
    return doc, spec


def _compile(spec) -> Cpt:
    try:
        return compile_spec(spec)
    except (SiciError, ValueError, MemoryError) as exc:
        detail = _describe(exc) if isinstance(exc, SiciError) else str(exc)
        raise _Fail(EXIT_COMPILE, f"compile failed: {detail}") from None


def cmd_compile(args) -> int:
    _, spec = _validated_spec(args)
    cpt = _compile(spec)
    names = [p.name for p in spec.parents]
    _emit(write_cpt(cpt, names, spec.child.name, args.format), args.output)
    return EXIT_OK


def cmd_check(args) -> int:
    doc = _load(args.spec)
    spec = doc.spec
    ambient = doc.ambient_dag()
    if args.ambient:
        try:
            ambient = parse_ambient(_read(args.ambient))
        except SiciError as exc:
            raise _Fail(EXIT_INVALID, f"{args.ambient}: {_describe(exc)}") from None
    ok = True
    try:
        report = verify_ci_statements(spec, ambient)
    except SiciError as exc:
        print(f"structure: {_describe(exc)}")
        ok = False
    else:
        print("conditional independence statements:")
        for line in report.lines():
            print(f"  {line}")
        ok = ok and report.ok
    bad = table_violations(spec, args.tolerance)
    if bad:
        print("table validation: FAIL")
        for path, v in bad:
            print(f"  {path}: {v}")
        ok = False
    else:
        print("table validation: ok")
    for w in spec_warnings(spec):
        print(f"warning: {w}")
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_INVALID


def cmd_count(args) -> int:
    doc = _load(args.spec)
    report = parameter_count(doc.spec)
    if args.format == "json":
        _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.output)
    else:
        _emit("\n".join(report.lines()) + "\n", args.output)
    return EXIT_OK


def _coordinates(cpt: Cpt, row: int, col: int, names) -> str:
    config = cpt.indexer.config_of(row)
    parts = ", ".join(f"{n}={s.states[v]}" for n, s, v in zip(names, cpt.parent_spaces, config))
    return f"row {row} ({parts}), state {cpt.child_space.states[col]}"


def cmd_verify(args) -> int:
    doc = _load(args.spec)
    spec = doc.spec
    try:
        check_oracle_size(spec)
    except SizeGuardError as exc:
        raise _Fail(EXIT_SIZE, f"oracle refused: {_describe(exc)}") from None
    bad = table_violations(spec, 1e-9)
    if bad:
        raise _Fail(EXIT_INVALID, "invalid tables:\n  " + "\n  ".join(f"{p}: {v}" for p, v in bad))
    compiled = _compile(spec)
    if args.inject_error:
        rows = compiled.rows.copy()
        rows[0, 0] += args.inject_error
        compiled = Cpt(compiled.parent_spaces, compiled.child_space, rows)
    try:
        reference = oracle_cpt(spec)
    except SizeGuardError as exc:
        raise _Fail(EXIT_SIZE, f"oracle refused: {_describe(exc)}") from None
    diff, (row, col) = compare_cpts(compiled, reference)
    names = [p.name for p in spec.parents]
    if diff <= args.tolerance:
        print(f"max diff {diff:.3g} <= {args.tolerance:g}, PASS")
        return EXIT_OK
    print(f"max diff {diff:.3g} > {args.tolerance:g}, FAIL at {_coordinates(compiled, row, col, names)}")
    return EXIT_INVALID


def cmd_diff(args) -> int:
    try:
        a = read_cpt(_read(args.a))
        b = read_cpt(_read(args.b))
    except SiciError as exc:
        raise _Fail(EXIT_INVALID, _describe(exc)) from None
    if a.cpt.shape != b.cpt.shape:
        raise _Fail(EXIT_INVALID, f"shape mismatch: {a.cpt.shape} vs {b.cpt.shape}")
    delta = np.abs(a.cpt.rows - b.cpt.rows)
    diff = float(delta.max()) if delta.size else 0.0
    differing = int(np.count_nonzero(delta.max(axis=1) > args.tolerance))
    print(f"max diff {diff:.17g}")
    print(f"{differing} differing rows (tolerance {args.tolerance:g}) of {a.cpt.shape[0]}")
    if differing:
        row, col = np.unravel_index(int(np.argmax(delta)), delta.shape)
        print(f"worst at {_coordinates(a.cpt, int(row), int(col), a.parent_names)}: "
              f"{a.cpt.rows[row, col]:.17g} vs {b.cpt.rows[row, col]:.17g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sici", description="Compile and check local-structure CPT models.")
    sub = parser.add_subparsers(dest="command", required=True)

    def spec_arg(p):
        p.add_argument("spec", help="spec document path, or - for standard input")

    p = sub.add_parser("compile", help="emit the compiled CPT")
    spec_arg(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", help="write to this file instead of standard output")
    p.add_argument("--tolerance", type=float, default=1e-9, help="row-sum tolerance for embedded tables")
    p.add_argument("--normalize-rows", action="store_true", help="rescale embedded table rows before compiling")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("check", help="verify CI statements and embedded tables")
    spec_arg(p)
    p.add_argument("--ambient", help="ambient graph file (overrides one embedded in the spec)")
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("count", help="parameter counts and savings")
    spec_arg(p)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("verify", help="compare the compiled CPT with the brute-force oracle")
    spec_arg(p)
    p.add_argument("--tolerance", type=float, default=1e-12)
    p.add_argument("--inject-error", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("diff", help="compare two CPT files")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--tolerance", type=float, default=1e-12)
    p.set_defaults(func=cmd_diff)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return args.func(args)
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
