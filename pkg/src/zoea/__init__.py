"""Inductive-programming workbench: compile programs directly from test
cases, in textual or visual (diagram) form, and run the result."""

from .catalog import CATALOG_VERSION, EvalError, catalog_v1
from .compiler import (
    CompileOutcome,
    Pipeline,
    RunError,
    build_synthetic_cases,
    check_event_stream,
    compile_document,
    compile_zoea_text,
    run_pipeline,
)
from .document import Document, clone_case, export_to_zoea, validate_document
from .expr import canonical_serialization, eval_expr, parse_expr
from .synth import SearchConfig, SynthesisProblem, synthesize
from .text import ZoeaProgram, parse, print_program, validate
from .values import Empty, Table, deep_equal, from_json, to_json

__all__ = [
    "CATALOG_VERSION",
    "CompileOutcome",
    "Document",
    "Empty",
    "EvalError",
    "Pipeline",
    "RunError",
    "SearchConfig",
    "SynthesisProblem",
    "Table",
    "ZoeaProgram",
    "build_synthetic_cases",
    "canonical_serialization",
    "catalog_v1",
    "check_event_stream",
    "clone_case",
    "compile_document",
    "compile_zoea_text",
    "deep_equal",
    "eval_expr",
    "export_to_zoea",
    "from_json",
    "parse",
    "parse_expr",
    "print_program",
    "run_pipeline",
    "synthesize",
    "to_json",
    "validate",
    "validate_document",
]
