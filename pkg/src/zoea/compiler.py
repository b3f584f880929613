"""Document compilation: synthetic-case construction, left-to-right
scheduling, status events, pipeline stitching, and execution.

Event records are plain dicts ready for JSON-lines / SSE transport:
per-element `{"identity", "state", "ts", "stats"?}` with states
pending | active | solved | failed, followed by exactly one terminal
`{"result": "success"|"failure", "failed": [...]}`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .catalog import CATALOG_VERSION, EvalError
from .diagnostics import Diagnostic, errors
from .document import (
    ANNOTATION_SHAPES,
    Document,
    ValidationFailed,
    identity_value,
    iter_elements,
    runtime_value,
    validate_document,
)
from .expr import ImportedProgram, canonical_serialization, eval_expr, parse_expr
from .synth import SearchConfig, Statistics, SynthesisProblem, synthesize
from .text import ZoeaProgram
from .text import validate as validate_text
from .values import Empty, decode_value, deep_equal, encode_value

STATES = ("pending", "active", "solved", "failed")
_LEGAL = {("pending", "active"), ("active", "solved"), ("active", "failed"), ("failed", "active")}


class CompileError(Exception):
    pass


class UnresolvedUse(CompileError):
    pass


class RunError(CompileError):
    def __init__(self, identity: str, cause: Exception):
        super().__init__(f"evaluation failed at {identity}: {cause}")
        self.identity = identity
        self.cause = cause


class ProtocolError(Exception):
    pass


@dataclass
class SyntheticCase:
    target: str  # target identity
    sources: list  # source identities, column-major order
    rows: list  # [(inputs, output)] one per user case with a non-empty target


@dataclass
class CompileOutcome:
    pipeline: Optional["Pipeline"]
    failed: list
    events: list
    stats: dict  # identity -> Statistics

    @property
    def success(self) -> bool:
        return self.pipeline is not None

    @property
    def total_candidates(self) -> int:
        return sum(s.candidates_expanded for s in self.stats.values())


@dataclass
class Pipeline:
    fragments: dict  # identity -> canonical expression text
    wiring: dict  # identity -> ordered source identities
    input_identities: list
    output_identities: list
    data_identities: list
    data_defaults: dict  # identity -> test value (fallback when no document)
    uses: list = field(default_factory=list)
    catalog_version: str = CATALOG_VERSION

    def to_dict(self) -> dict:
        return {
            "fragments": dict(self.fragments),
            "wiring": {k: list(v) for k, v in self.wiring.items()},
            "input_identities": list(self.input_identities),
            "output_identities": list(self.output_identities),
            "data_identities": list(self.data_identities),
            "data_defaults": {k: encode_value(v) for k, v in self.data_defaults.items()},
            "uses": list(self.uses),
            "catalog_version": self.catalog_version,
        }

    @staticmethod
    def from_dict(raw: dict) -> "Pipeline":
        return Pipeline(
            fragments=dict(raw["fragments"]),
            wiring={k: list(v) for k, v in raw["wiring"].items()},
            input_identities=list(raw["input_identities"]),
            output_identities=list(raw["output_identities"]),
            data_identities=list(raw.get("data_identities", [])),
            data_defaults={
                k: decode_value(v) for k, v in raw.get("data_defaults", {}).items()
            },
            uses=list(raw.get("uses", [])),
            catalog_version=raw.get("catalog_version", CATALOG_VERSION),
        )


# ---------------------------------------------------------------------------
# Planning and synthetic cases
# ---------------------------------------------------------------------------


def _identity_positions(d: Document) -> dict:
    """identity -> (first column index, case index, order), column kind."""
    pos: dict = {}
    for ci, case in enumerate(d.cases):
        for coli, col in enumerate(case.columns):
            for order, el in enumerate(col.elements):
                if el.shape in ANNOTATION_SHAPES:
                    continue
                if el.identity not in pos:
                    pos[el.identity] = ((coli, ci, order), col.kind)
    return pos


def _case_values(d: Document) -> list:
    """Per case: identity -> element value (annotations excluded)."""
    out = []
    for case in d.cases:
        m: dict = {}
        for col in case.columns:
            for el in col.elements:
                if el.shape not in ANNOTATION_SHAPES:
                    m[el.identity] = el.value
        out.append(m)
    return out


def build_synthetic_cases(d: Document) -> list:
    """One synthetic case per derive/output identity: sources from the union
    of its dependencies across cases, else every earlier non-annotation
    identity; rows collect that identity's values across the user cases."""
    diags = errors(validate_document(d))
    if diags:
        raise ValidationFailed(diags)

    pos = _identity_positions(d)
    element_identity: dict = {}
    for _, _, col, el in iter_elements(d):
        if el.shape not in ANNOTATION_SHAPES:
            element_identity[el.id] = el.identity

    targets = sorted(
        [i for i, (_, kind) in pos.items() if kind in ("derive", "output")],
        key=lambda i: pos[i][0],
    )

    dep_sources: dict = {t: set() for t in targets}
    for case in d.cases:
        for dep in case.dependencies:
            tid = element_identity.get(dep.target)
            if tid in dep_sources:
                for s in dep.sources:
                    sid = element_identity.get(s)
                    if sid is not None:
                        dep_sources[tid].add(sid)

    per_case = _case_values(d)
    out: list = []
    for t in targets:
        tcol = pos[t][0][0]
        srcs = dep_sources[t]
        if not srcs:
            srcs = {i for i, ((coli, _, _), _) in pos.items() if coli < tcol}
        sources = sorted(srcs, key=lambda i: pos[i][0])
        rows = []
        missing = object()  # null is a legal value; only absence/Empty skip
        for values in per_case:
            tv = values.get(t, missing)
            if tv is missing or isinstance(tv, Empty):
                continue
            inputs = []
            ok = True
            for s in sources:
                if pos[s][1] == "data":
                    sv = identity_value(d, s)
                else:
                    sv = values.get(s, missing)
                if sv is missing or isinstance(sv, Empty):
                    ok = False
                    break
                inputs.append(sv)
            if ok:
                rows.append((inputs, tv))
        out.append(SyntheticCase(target=t, sources=sources, rows=rows))
    return out


# ---------------------------------------------------------------------------
# Compilation
# ---------------------------------------------------------------------------


def _emit(sink: Optional[Callable], events: list, record: dict) -> None:
    events.append(record)
    if sink is not None:
        sink(record)


def _status(identity: str, state: str, stats: Optional[Statistics] = None) -> dict:
    rec: dict = {"identity": identity, "state": state, "ts": time.time()}
    if stats is not None:
        rec["stats"] = {
            "candidates_expanded": stats.candidates_expanded,
            "per_source": dict(stats.per_source),
            "elapsed_ms": stats.elapsed_ms,
        }
    return rec


def compile_document(
    d: Document,
    config: Optional[SearchConfig] = None,
    sink: Optional[Callable] = None,
    imports: Optional[dict] = None,
) -> CompileOutcome:
    config = config or SearchConfig()
    imports = imports or {}
    synth_cases = build_synthetic_cases(d)  # raises ValidationFailed when invalid
    pos = _identity_positions(d)

    data_idents = [i for i, (_, kind) in sorted(pos.items(), key=lambda kv: kv[1][0]) if kind == "data"]
    input_idents = [i for i, (_, kind) in sorted(pos.items(), key=lambda kv: kv[1][0]) if kind == "input"]
    output_idents = [i for i, (_, kind) in sorted(pos.items(), key=lambda kv: kv[1][0]) if kind == "output"]
    constants_pool = [identity_value(d, i) for i in data_idents
                      if not isinstance(identity_value(d, i), Empty)]

    events: list = []
    stats: dict = {}
    for sc in synth_cases:
        _emit(sink, events, _status(sc.target, "pending"))

    solved: dict = {}
    failed: list = []
    dependents_of_failed: set = set()
    for sc in synth_cases:
        _emit(sink, events, _status(sc.target, "active"))
        if sc.target in dependents_of_failed or any(s in failed for s in sc.sources):
            st = Statistics(reason="upstream failure")
            stats[sc.target] = st
            failed.append(sc.target)
            dependents_of_failed.add(sc.target)
            _emit(sink, events, _status(sc.target, "failed", st))
            continue
        if not sc.rows:
            st = Statistics(reason="no usable cases")
            stats[sc.target] = st
            failed.append(sc.target)
            _emit(sink, events, _status(sc.target, "failed", st))
            continue
        problem = SynthesisProblem(
            cases=sc.rows,
            arity=len(sc.sources),
            constants_pool=constants_pool,
            imports=imports,
        )
        result = synthesize(problem, config)
        stats[sc.target] = result.stats
        if result.success:
            solved[sc.target] = result.expr
            _emit(sink, events, _status(sc.target, "solved", result.stats))
        else:
            failed.append(sc.target)
            _emit(sink, events, _status(sc.target, "failed", result.stats))
        # mark transitive dependents of any failure
        if failed:
            changed = True
            blocked = set(failed)
            while changed:
                changed = False
                for other in synth_cases:
                    if other.target in blocked:
                        continue
                    if any(s in blocked for s in other.sources):
                        blocked.add(other.target)
                        changed = True
            dependents_of_failed = blocked - set(failed)

    success = all(o in solved for o in output_idents)
    _emit(sink, events, {"result": "success" if success else "failure", "failed": list(failed)})

    pipeline = None
    if success:
        pipeline = Pipeline(
            fragments={t: canonical_serialization(e) for t, e in solved.items()},
            wiring={sc.target: list(sc.sources) for sc in synth_cases if sc.target in solved},
            input_identities=input_idents,
            output_identities=output_idents,
            data_identities=data_idents,
            data_defaults={
                i: identity_value(d, i)
                for i in data_idents
                if not isinstance(identity_value(d, i), Empty)
            },
            uses=list(d.uses),
        )
    return CompileOutcome(pipeline=pipeline, failed=failed, events=events, stats=stats)


def run_pipeline(
    p: Pipeline,
    inputs: list,
    d: Optional[Document] = None,
    imports: Optional[dict] = None,
    data_overrides: Optional[dict] = None,
) -> list:
    """Execute a pipeline. Data identities resolve to, in order: explicit
    overrides, the document's runtime bindings, the document's test values,
    the values frozen into the pipeline."""
    if len(inputs) != len(p.input_identities):
        raise RunError("<inputs>", ValueError(
            f"expected {len(p.input_identities)} inputs, got {len(inputs)}"
        ))
    imports = imports or {}
    env: dict = {}
    for ident, v in zip(p.input_identities, inputs):
        env[ident] = v
    for ident in p.data_identities:
        if data_overrides and ident in data_overrides:
            env[ident] = data_overrides[ident]
        elif d is not None:
            env[ident] = runtime_value(d, ident)
        elif ident in p.data_defaults:
            env[ident] = p.data_defaults[ident]
        else:
            raise RunError(ident, KeyError("no value for data identity"))

    pending = dict(p.fragments)
    exprs = {t: parse_expr(text) for t, text in pending.items()}
    while pending:
        progress = False
        for t in list(pending):
            srcs = p.wiring.get(t, [])
            if all(s in env for s in srcs):
                try:
                    env[t] = eval_expr(exprs[t], [env[s] for s in srcs], imports)
                except EvalError as ex:
                    raise RunError(t, ex)
                del pending[t]
                progress = True
        if not progress:
            raise RunError(next(iter(pending)), ValueError("cyclic or missing wiring"))
    try:
        return [env[o] for o in p.output_identities]
    except KeyError as ex:
        raise RunError(str(ex), ex)


def pipeline_as_import(name: str, p: Pipeline, imports: Optional[dict] = None) -> ImportedProgram:
    """Expose a compiled pipeline as a callable primitive for composition."""
    inner_imports = imports or {}

    def fn(vals: list):
        try:
            outs = run_pipeline(p, list(vals), imports=inner_imports)
        except RunError as ex:
            raise EvalError("ImportFailed", str(ex))
        return outs[0] if len(outs) == 1 else outs

    return ImportedProgram(name=name, arity=len(p.input_identities), fn=fn)


# ---------------------------------------------------------------------------
# Textual programs compile via an implicit chain
# ---------------------------------------------------------------------------


def compile_zoea_text(
    prog: ZoeaProgram,
    config: Optional[SearchConfig] = None,
    imports: Optional[dict] = None,
    sink: Optional[Callable] = None,
) -> CompileOutcome:
    """Compile input -> derive_1 -> ... -> derive_k -> output, each step
    sourced from the previous one with the program's data as search constants."""
    config = config or SearchConfig()
    imports = imports or {}
    diags = errors(validate_text(prog))
    if diags:
        raise ValidationFailed(diags)
    for name in prog.uses:
        if name not in imports:
            raise UnresolvedUse(f"use target {name!r} is not available")

    k = min(len(c.derives) for c in prog.cases)
    steps = [f"step{i + 1}" for i in range(k)] + ["output"]
    chain = ["input"] + steps
    constants_pool = [prog.data] if prog.data is not None else []

    events: list = []
    stats: dict = {}
    for t in steps:
        _emit(sink, events, _status(t, "pending"))

    solved: dict = {}
    failed: list = []
    for idx, t in enumerate(steps):
        _emit(sink, events, _status(t, "active"))
        if failed:
            st = Statistics(reason="upstream failure")
            stats[t] = st
            failed.append(t)
            _emit(sink, events, _status(t, "failed", st))
            continue
        rows = []
        for c in prog.cases:
            values = [c.input] + list(c.derives[:k]) + [c.output]
            rows.append(([values[idx]], values[idx + 1]))
        problem = SynthesisProblem(
            cases=rows, arity=1, constants_pool=constants_pool, imports=imports
        )
        result = synthesize(problem, config)
        stats[t] = result.stats
        if result.success:
            solved[t] = result.expr
            _emit(sink, events, _status(t, "solved", result.stats))
        else:
            failed.append(t)
            _emit(sink, events, _status(t, "failed", result.stats))

    success = not failed
    _emit(sink, events, {"result": "success" if success else "failure", "failed": list(failed)})
    pipeline = None
    if success:
        pipeline = Pipeline(
            fragments={t: canonical_serialization(e) for t, e in solved.items()},
            wiring={t: [chain[i]] for i, t in enumerate(steps)},
            input_identities=["input"],
            output_identities=["output"],
            data_identities=[],
            data_defaults={},
            uses=list(prog.uses),
        )
    return CompileOutcome(pipeline=pipeline, failed=failed, events=events, stats=stats)


# ---------------------------------------------------------------------------
# Event protocol checker
# ---------------------------------------------------------------------------


def check_event_stream(events: list) -> None:
    """Raise ProtocolError unless the stream obeys the transition relation
    and carries exactly one terminal record, at the end."""
    states: dict = {}
    terminal_seen = False
    for rec in events:
        if "result" in rec:
            if terminal_seen:
                raise ProtocolError("multiple terminal records")
            if rec["result"] not in ("success", "failure"):
                raise ProtocolError(f"bad terminal result {rec['result']!r}")
            terminal_seen = True
            continue
        if terminal_seen:
            raise ProtocolError("status event after terminal record")
        ident, state = rec.get("identity"), rec.get("state")
        if state not in STATES:
            raise ProtocolError(f"unknown state {state!r}")
        prev = states.get(ident)
        if prev is None:
            if state != "pending":
                raise ProtocolError(f"{ident} must start pending, got {state}")
        elif (prev, state) not in _LEGAL:
            raise ProtocolError(f"illegal transition {prev} -> {state} for {ident}")
        states[ident] = state
    if not terminal_seen:
        raise ProtocolError("missing terminal record")
