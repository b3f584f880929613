"""Command-line front end.

Exit codes: 0 success, 1 parse error, 2 validation error, 3 compile failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import statistics as pystats
import sys
import time
from pathlib import Path

from . import document as doc
from .compiler import (
    Pipeline,
    RunError,
    compile_document,
    compile_zoea_text,
    run_pipeline,
)
from .diagnostics import errors
from .store import Store, StoreError
from .synth import SearchConfig
from .text import ZoeaSyntaxError, parse, print_program, validate
from .values import ParseError, from_json, to_json

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_VALIDATION = 2
EXIT_COMPILE = 3


def _config(args) -> SearchConfig:
    return SearchConfig(
        max_cost=args.max_cost,
        max_candidates=args.max_candidates,
        timeout_ms=args.timeout_ms,
    )


def _add_budget_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-cost", type=int, default=SearchConfig.max_cost)
    p.add_argument("--timeout-ms", type=int, default=SearchConfig.timeout_ms)
    p.add_argument("--max-candidates", type=int, default=SearchConfig.max_candidates)


def cmd_compile(args) -> int:
    try:
        source = Path(args.file).read_text(encoding="utf-8")
        prog = parse(source)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except ZoeaSyntaxError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    diags = validate(prog)
    for d in errors(diags):
        print(str(d), file=sys.stderr)
    if errors(diags):
        return EXIT_VALIDATION

    imports = {}
    if prog.uses:
        if not args.store:
            print("error: program has uses but no --store given", file=sys.stderr)
            return EXIT_VALIDATION
        try:
            imports = Store(args.store).resolve_imports(prog.uses)
        except StoreError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_VALIDATION

    def sink(rec: dict):
        if args.json:
            print(json.dumps(rec))
        elif "result" in rec:
            print(f"== {rec['result']}" + (f" (failed: {', '.join(rec['failed'])})" if rec["failed"] else ""))
        else:
            print(f"{rec['identity']}: {rec['state']}")

    outcome = compile_zoea_text(prog, _config(args), imports=imports, sink=sink)
    if not outcome.success:
        print(f"compile failed: {', '.join(outcome.failed)}", file=sys.stderr)
        return EXIT_COMPILE
    if args.emit_pipeline:
        Path(args.emit_pipeline).write_text(
            json.dumps(outcome.pipeline.to_dict(), indent=2), encoding="utf-8"
        )
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        pipeline = Pipeline.from_dict(json.loads(Path(args.pipeline).read_text(encoding="utf-8")))
    except (OSError, json.JSONDecodeError, KeyError) as e:
        print(f"error: bad pipeline file: {e}", file=sys.stderr)
        return EXIT_PARSE
    if len(args.input) != len(pipeline.input_identities):
        print(
            f"usage error: pipeline expects {len(pipeline.input_identities)} inputs, "
            f"got {len(args.input)}",
            file=sys.stderr,
        )
        return EXIT_VALIDATION
    try:
        inputs = [from_json(raw) for raw in args.input]
    except ParseError as e:
        print(f"error: bad input JSON: {e}", file=sys.stderr)
        return EXIT_PARSE
    overrides = {}
    for spec in args.data or []:
        if "=" not in spec:
            print(f"usage error: --data expects identity=file.json, got {spec!r}", file=sys.stderr)
            return EXIT_VALIDATION
        ident, path = spec.split("=", 1)
        try:
            overrides[ident] = from_json(Path(path).read_text(encoding="utf-8"))
        except (OSError, ParseError) as e:
            print(f"error: bad --data file {path}: {e}", file=sys.stderr)
            return EXIT_PARSE
    imports = Store(args.store).resolve_imports(pipeline.uses) if args.store else {}
    try:
        outputs = run_pipeline(pipeline, inputs, imports=imports, data_overrides=overrides)
    except RunError as e:
        print(f"run error: {e}", file=sys.stderr)
        return EXIT_COMPILE
    print("[" + ",".join(to_json(v) for v in outputs) + "]")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        prog = parse(Path(args.file).read_text(encoding="utf-8"))
    except (OSError, ZoeaSyntaxError) as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    diags = validate(prog)
    for d in diags:
        print(str(d))
    return EXIT_VALIDATION if errors(diags) else EXIT_OK


def cmd_export(args) -> int:
    try:
        d = doc.loads(Path(args.file).read_text(encoding="utf-8"))
        print(print_program(doc.export_to_zoea(d)), end="")
    except (OSError, json.JSONDecodeError, doc.DocumentError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(Store(args.store), _config(args))
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def strip_dependencies(d: doc.Document) -> doc.Document:
    import copy

    d = copy.deepcopy(d)
    for case in d.cases:
        case.dependencies = []
    return d


def run_benchmark(suite_dir: str, config: SearchConfig) -> list:
    """Compile every document in the suite with and then without its
    dependencies; rows carry candidate counts and wall times."""
    rows = []
    for path in sorted(Path(suite_dir).glob("*.json")):
        d = doc.loads(path.read_text(encoding="utf-8"))
        t0 = time.perf_counter()
        with_deps = compile_document(d, config)
        t1 = time.perf_counter()
        without = compile_document(strip_dependencies(d), config)
        t2 = time.perf_counter()
        rows.append(
            {
                "problem": path.stem,
                "with_solved": with_deps.success,
                "without_solved": without.success,
                "with_candidates": with_deps.total_candidates,
                "without_candidates": without.total_candidates,
                "with_ms": (t1 - t0) * 1000,
                "without_ms": (t2 - t1) * 1000,
            }
        )
    return rows


def cmd_bench(args) -> int:
    config = _config(args)
    rows = run_benchmark(args.suite, config)
    comparable = [r for r in rows if r["with_solved"] and r["without_solved"]]
    excluded = [r for r in rows if not (r["with_solved"] and r["without_solved"])]

    buf = io.StringIO()
    writer = csv.DictWriter(
        buf,
        fieldnames=[
            "problem",
            "with_candidates",
            "without_candidates",
            "with_ms",
            "without_ms",
            "with_solved",
            "without_solved",
        ],
        extrasaction="ignore",
    )
    writer.writeheader()
    for r in rows:
        writer.writerow(r)
    csv_text = buf.getvalue()
    if args.csv:
        Path(args.csv).write_text(csv_text, encoding="utf-8")
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        print(f"{'problem':<24}{'with cand':>10}{'w/o cand':>10}{'with ms':>10}{'w/o ms':>10}")
        for r in rows:
            print(
                f"{r['problem']:<24}{r['with_candidates']:>10}{r['without_candidates']:>10}"
                f"{r['with_ms']:>10.1f}{r['without_ms']:>10.1f}"
            )
        if comparable:
            med_w = pystats.median(r["with_ms"] for r in comparable)
            med_wo = pystats.median(r["without_ms"] for r in comparable)
            print(f"{'median':<24}{'':>10}{'':>10}{med_w:>10.1f}{med_wo:>10.1f}")
        for r in excluded:
            print(f"unsolvable either way: {r['problem']}", file=sys.stderr)

    bad = [r for r in comparable if r["with_candidates"] > r["without_candidates"]]
    if bad:
        for r in bad:
            print(
                f"assertion failed: {r['problem']} expanded more candidates with "
                f"dependencies ({r['with_candidates']} > {r['without_candidates']})",
                file=sys.stderr,
            )
        return EXIT_COMPILE
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="zoea", description="Inductive-programming workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a .zoea file")
    p.add_argument("file")
    _add_budget_flags(p)
    p.add_argument("--store", help="store directory for resolving uses")
    p.add_argument("--emit-pipeline", help="write the compiled pipeline JSON here")
    p.add_argument("--json", action="store_true", help="machine-readable event output")
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("run", help="run a compiled pipeline")
    p.add_argument("pipeline")
    p.add_argument("--input", action="append", default=[], help="input value as JSON (repeatable)")
    p.add_argument("--data", action="append", default=[], help="identity=file.json runtime binding")
    p.add_argument("--store", help="store directory for resolving uses")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("validate", help="validate a .zoea file")
    p.add_argument("file")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("export", help="export a document JSON to textual form")
    p.add_argument("file")
    p.set_defaults(fn=cmd_export)

    p = sub.add_parser("serve", help="start the workspace service")
    p.add_argument("--store", default="./zoea-store")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    _add_budget_flags(p)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("bench", help="dependency-benefit benchmark over a suite of documents")
    p.add_argument("suite")
    _add_budget_flags(p)
    p.add_argument("--csv", help="write machine-readable CSV here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_bench)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
