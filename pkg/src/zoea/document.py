"""Visual program document model.

A document holds one diagram per test case. Each diagram is a row of columns
(data, input, derive..., output) containing elements. Elements carry a
document-unique id plus an identity shared across cases; identity classes are
what the compiler solves once. Dependencies are user-drawn data-flow edges
going strictly left to right.

Documents are immutable snapshots: every mutation returns a new document and
either succeeds completely or raises without side effects.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Optional

from .diagnostics import Diagnostic, errors
from .text import ZoeaCase, ZoeaProgram
from .values import (
    Empty,
    canonical_json,
    contains_empty,
    decode_value,
    deep_equal,
    encode_value,
    kind_of,
)

FORMAT_VERSION = "1.0"

COLUMN_KINDS = ("data", "input", "derive", "output")
SHAPES = ("scalar", "list", "table", "object", "comment", "label")
ANNOTATION_SHAPES = ("comment", "label")


class DocumentError(Exception):
    pass


class UnknownCase(DocumentError):
    pass


class UnknownElement(DocumentError):
    pass


class UnknownIdentity(DocumentError):
    pass


class SameCaseConflict(DocumentError):
    pass


class ShapeMismatch(DocumentError):
    pass


class NotProperSubset(DocumentError):
    pass


class NotDataElement(DocumentError):
    pass


class EmptyValue(DocumentError):
    pass


class ValidationFailed(DocumentError):
    def __init__(self, diagnostics: list):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


class FormatVersionError(DocumentError):
    pass


@dataclass
class Element:
    id: str
    identity: str
    shape: str  # scalar|list|table|object|comment|label
    value: Any


@dataclass
class Column:
    kind: str  # data|input|derive|output
    elements: list = field(default_factory=list)
    offset: int = 0  # vertical layout shift; semantically inert


@dataclass
class CaseDiagram:
    id: Any
    columns: list = field(default_factory=list)
    dependencies: list = field(default_factory=list)


@dataclass(frozen=True)
class Dependency:
    sources: tuple  # element ids, sorted
    target: str

    @staticmethod
    def make(sources: Iterable[str], target: str) -> "Dependency":
        return Dependency(tuple(sorted(sources)), target)


@dataclass
class Document:
    name: str
    cases: list = field(default_factory=list)
    runtime: dict = field(default_factory=dict)  # identity -> runtime value
    uses: list = field(default_factory=list)
    next_element: int = 1
    next_identity: int = 1


# ---------------------------------------------------------------------------
# Construction helpers
# ---------------------------------------------------------------------------


def new_document(name: str, case_id: Any = 1, derive_columns: int = 0) -> Document:
    cols = [Column("data"), Column("input")]
    cols += [Column("derive") for _ in range(derive_columns)]
    cols.append(Column("output"))
    return Document(name=name, cases=[CaseDiagram(id=case_id, columns=cols)])


def _case(d: Document, case_id: Any) -> CaseDiagram:
    for c in d.cases:
        if deep_equal(c.id, case_id):
            return c
    raise UnknownCase(f"no case {case_id!r}")


def add_case(d: Document, case_id: Any) -> Document:
    """Append an empty case mirroring the first case's column structure."""
    d = copy.deepcopy(d)
    kinds = [c.kind for c in d.cases[0].columns] if d.cases else ["data", "input", "output"]
    d.cases.append(CaseDiagram(id=case_id, columns=[Column(k) for k in kinds]))
    return d


def add_element(
    d: Document,
    case_id: Any,
    column_index: int,
    shape: str,
    value: Any,
    identity: Optional[str] = None,
) -> tuple[Document, str]:
    if shape not in SHAPES:
        raise DocumentError(f"unknown shape {shape!r}")
    d = copy.deepcopy(d)
    case = _case(d, case_id)
    if not 0 <= column_index < len(case.columns):
        raise DocumentError(f"no column {column_index} in case {case_id!r}")
    eid = f"e{d.next_element}"
    d.next_element += 1
    if identity is None:
        identity = f"i{d.next_identity}"
        d.next_identity += 1
    case.columns[column_index].elements.append(Element(eid, identity, shape, value))
    return d, eid


def add_dependency(d: Document, case_id: Any, sources: Iterable[str], target: str) -> Document:
    d = copy.deepcopy(d)
    case = _case(d, case_id)
    dep = Dependency.make(sources, target)
    if dep in case.dependencies:
        raise DocumentError("duplicate dependency")
    case.dependencies.append(dep)
    return d


def set_value(d: Document, element_id: str, value: Any) -> Document:
    d = copy.deepcopy(d)
    _, _, _, el = _locate(d, element_id)
    el.value = value
    return d


def delete_element(d: Document, element_id: str) -> Document:
    d = copy.deepcopy(d)
    ci, coli, ei, _ = _locate(d, element_id)
    case = d.cases[ci]
    del case.columns[coli].elements[ei]
    case.dependencies = [
        dep
        for dep in case.dependencies
        if dep.target != element_id and element_id not in dep.sources
    ]
    return d


def _locate(d: Document, element_id: str):
    for ci, case in enumerate(d.cases):
        for coli, col in enumerate(case.columns):
            for ei, el in enumerate(col.elements):
                if el.id == element_id:
                    return ci, coli, ei, el
    raise UnknownElement(f"no element {element_id!r}")


def iter_elements(d: Document):
    """Yield (case_index, column_index, column, element) in document order."""
    for ci, case in enumerate(d.cases):
        for coli, col in enumerate(case.columns):
            for el in col.elements:
                yield ci, coli, col, el


def identity_classes(d: Document) -> dict:
    """identity -> element ids in document (column-major) order."""
    classes: dict = {}
    for _, _, _, el in iter_elements(d):
        classes.setdefault(el.identity, []).append(el.id)
    return classes


def identity_column_kind(d: Document, identity: str) -> str:
    for _, _, col, el in iter_elements(d):
        if el.identity == identity:
            return col.kind
    raise UnknownIdentity(f"no identity {identity!r}")


def identity_value(d: Document, identity: str) -> Any:
    """The unique non-empty test value of an identity class (data constants),
    or Empty if every member is empty."""
    for _, _, _, el in iter_elements(d):
        if el.identity == identity and not isinstance(el.value, Empty):
            return el.value
    return Empty("scalar")


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate_document(d: Document) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    if not d.cases:
        diags.append(Diagnostic("error", "NoCases", "document has no cases"))
        return diags
    if len(set(d.uses)) != len(d.uses):
        diags.append(Diagnostic("error", "DuplicateUse", "duplicate entries in uses"))

    seen_case_ids: list = []
    for case in d.cases:
        if any(deep_equal(case.id, s) for s in seen_case_ids):
            diags.append(
                Diagnostic("error", "DuplicateCaseId", f"duplicate case id {case.id!r}")
            )
        seen_case_ids.append(case.id)
        kinds = [c.kind for c in case.columns]
        ok = (
            len(kinds) >= 3
            and kinds[0] == "data"
            and kinds[1] == "input"
            and kinds[-1] == "output"
            and all(k == "derive" for k in kinds[2:-1])
        )
        if not ok:
            diags.append(
                Diagnostic(
                    "error",
                    "ColumnStructure",
                    f"case {case.id!r} columns must be data, input, derive..., output; got {kinds}",
                    (case.id,),
                )
            )
            continue
        index: dict = {}
        for coli, col in enumerate(case.columns):
            for el in col.elements:
                index[el.id] = (coli, col.kind, el)
        seen_idents: dict = {}
        for coli, col in enumerate(case.columns):
            for el in col.elements:
                if el.shape in ANNOTATION_SHAPES and not isinstance(el.value, str):
                    diags.append(
                        Diagnostic(
                            "error",
                            "AnnotationText",
                            f"{el.shape} {el.id} must carry text only",
                            (case.id, el.id),
                        )
                    )
                if el.identity in seen_idents:
                    diags.append(
                        Diagnostic(
                            "error",
                            "IdentityInCaseTwice",
                            f"identity {el.identity} appears twice in case {case.id!r}",
                            (case.id, el.id),
                        )
                    )
                seen_idents[el.identity] = el.id
        seen_deps: set = set()
        for dep in case.dependencies:
            key = (dep.sources, dep.target)
            if key in seen_deps:
                diags.append(
                    Diagnostic(
                        "error", "DuplicateDependency", f"duplicate dependency on {dep.target}",
                        (case.id, dep.target),
                    )
                )
            seen_deps.add(key)
            if dep.target not in index or any(s not in index for s in dep.sources):
                diags.append(
                    Diagnostic(
                        "error",
                        "DanglingDependency",
                        f"dependency references unknown elements in case {case.id!r}",
                        (case.id, dep.target),
                    )
                )
                continue
            tcol, tkind, tel = index[dep.target]
            if tkind in ("data", "input"):
                diags.append(
                    Diagnostic(
                        "error",
                        "BadDependencyTarget",
                        f"dependency target {dep.target} is in a {tkind} column",
                        (case.id, dep.target),
                    )
                )
            if tel.shape in ANNOTATION_SHAPES:
                diags.append(
                    Diagnostic(
                        "error",
                        "AnnotationDependency",
                        f"dependency target {dep.target} is a {tel.shape}",
                        (case.id, dep.target),
                    )
                )
            for s in dep.sources:
                scol, _, sel = index[s]
                if sel.shape in ANNOTATION_SHAPES:
                    diags.append(
                        Diagnostic(
                            "error",
                            "AnnotationDependency",
                            f"dependency source {s} is a {sel.shape}",
                            (case.id, s),
                        )
                    )
                if scol >= tcol:
                    diags.append(
                        Diagnostic(
                            "error",
                            "RightToLeftDependency",
                            f"source {s} is not strictly left of target {dep.target}",
                            (case.id, dep.target),
                        )
                    )

    # Identity classes: consistent shape and column kind; data constants agree.
    info: dict = {}
    for ci, coli, col, el in iter_elements(d):
        rec = info.setdefault(el.identity, {"shape": el.shape, "kind": col.kind, "values": []})
        if rec["shape"] != el.shape or rec["kind"] != col.kind:
            diags.append(
                Diagnostic(
                    "error",
                    "IdentityShapeMismatch",
                    f"identity {el.identity} mixes shapes or column kinds",
                    (el.id,),
                )
            )
        if col.kind == "data" and not isinstance(el.value, Empty):
            rec["values"].append(el.value)
    for ident, rec in info.items():
        vals = rec["values"]
        if len(vals) > 1 and not all(deep_equal(vals[0], v) for v in vals[1:]):
            diags.append(
                Diagnostic(
                    "error",
                    "DataValueMismatch",
                    f"data identity {ident} has differing test values across cases",
                    (ident,),
                )
            )
    for ident in d.runtime:
        if ident not in info or info[ident]["kind"] != "data":
            diags.append(
                Diagnostic(
                    "error",
                    "BadRuntimeBinding",
                    f"runtime binding targets non-data identity {ident}",
                    (ident,),
                )
            )
    return diags


# ---------------------------------------------------------------------------
# Mutations
# ---------------------------------------------------------------------------


def clone_case(d: Document, case_id: Any, new_case_id: Any = None) -> Document:
    """Exact structural copy with fresh element ids, the same identities,
    empty values, and dependencies remapped onto the copies."""
    src = _case(d, case_id)
    d = copy.deepcopy(d)
    src = _case(d, case_id)
    if new_case_id is None:
        new_case_id = len(d.cases) + 1
    mapping: dict = {}
    cols = []
    for col in src.columns:
        new_col = Column(col.kind, [], col.offset)
        for el in col.elements:
            eid = f"e{d.next_element}"
            d.next_element += 1
            mapping[el.id] = eid
            if el.shape in ANNOTATION_SHAPES:
                value: Any = el.value
            else:
                value = Empty(el.shape)
            new_col.elements.append(Element(eid, el.identity, el.shape, value))
        cols.append(new_col)
    deps = [
        Dependency.make([mapping[s] for s in dep.sources], mapping[dep.target])
        for dep in src.dependencies
    ]
    d.cases.append(CaseDiagram(id=new_case_id, columns=cols, dependencies=deps))
    return d


def merge_identity(d: Document, a: str, b: str) -> Document:
    if a == b:
        raise DocumentError("cannot merge an identity with itself")
    classes = identity_classes(d)
    if a not in classes or b not in classes:
        raise UnknownIdentity(f"unknown identity {a if a not in classes else b!r}")
    info: dict = {}
    for ci, _, col, el in iter_elements(d):
        if el.identity in (a, b):
            info.setdefault(ci, set()).add(el.identity)
            info.setdefault((el.identity, "shape"), el.shape)
            info.setdefault((el.identity, "kind"), col.kind)
    for ci, present in [(k, v) for k, v in info.items() if isinstance(k, int)]:
        if present == {a, b}:
            raise SameCaseConflict(f"case index {ci} contains both {a} and {b}")
    if info[(a, "shape")] != info[(b, "shape")] or info[(a, "kind")] != info[(b, "kind")]:
        raise ShapeMismatch(f"{a} and {b} differ in shape or column kind")
    d = copy.deepcopy(d)
    for _, _, _, el in iter_elements(d):
        if el.identity == b:
            el.identity = a
    if b in d.runtime:
        d.runtime.setdefault(a, d.runtime[b])
        del d.runtime[b]
    return d


def split_identity(d: Document, identity: str, members: Iterable[str]) -> Document:
    members = set(members)
    classes = identity_classes(d)
    if identity not in classes:
        raise UnknownIdentity(f"unknown identity {identity!r}")
    cls = set(classes[identity])
    if not members or not members < cls:
        raise NotProperSubset(
            f"members must be a non-empty proper subset of class {identity}"
        )
    d = copy.deepcopy(d)
    fresh = f"i{d.next_identity}"
    d.next_identity += 1
    for _, _, _, el in iter_elements(d):
        if el.id in members:
            el.identity = fresh
    return d


def set_runtime_binding(d: Document, identity: str, value: Any) -> Document:
    kind = None
    for _, _, col, el in iter_elements(d):
        if el.identity == identity:
            kind = col.kind
            break
    if kind != "data":
        raise NotDataElement(f"identity {identity!r} is not a data-column element")
    d = copy.deepcopy(d)
    d.runtime[identity] = value
    return d


def runtime_value(d: Document, identity: str) -> Any:
    """Runtime binding when present, else the shared test value."""
    if identity in d.runtime:
        return d.runtime[identity]
    return identity_value(d, identity)


# ---------------------------------------------------------------------------
# Export to textual Zoea
# ---------------------------------------------------------------------------


def export_to_zoea(d: Document) -> ZoeaProgram:
    """Map the document onto the textual dialect, wrapping the input and
    output columns into lists."""
    diags = errors(validate_document(d))
    if diags:
        raise ValidationFailed(diags)

    data_values = []
    seen: set = set()
    for _, _, col, el in iter_elements(d):
        if col.kind == "data" and el.shape not in ANNOTATION_SHAPES and el.identity not in seen:
            seen.add(el.identity)
            v = identity_value(d, el.identity)
            if isinstance(v, Empty):
                raise EmptyValue(f"data element {el.id} has no value")
            data_values.append(v)

    prog = ZoeaProgram(name=d.name, uses=list(d.uses))
    if data_values:
        prog.data = data_values
    for case in d.cases:
        zc = ZoeaCase(id=case.id)
        for col in case.columns:
            if col.kind == "data":
                continue  # emitted once at program level via identity values
            vals = []
            for el in col.elements:
                if el.shape in ANNOTATION_SHAPES:
                    continue
                if isinstance(el.value, Empty) or contains_empty(el.value):
                    raise EmptyValue(f"element {el.id} in case {case.id!r} is empty")
                vals.append(el.value)
            if col.kind == "input":
                zc.input = vals
            elif col.kind == "output":
                zc.output = vals
            elif col.kind == "derive":
                zc.derives.extend(vals)
        prog.cases.append(zc)
    return prog


# ---------------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------------


def to_dict(d: Document) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "name": d.name,
        "uses": list(d.uses),
        "cases": [
            {
                "id": encode_value(case.id),
                "columns": [
                    {
                        "kind": col.kind,
                        "offset": col.offset,
                        "elements": [
                            {
                                "id": el.id,
                                "identity": el.identity,
                                "shape": el.shape,
                                "value": encode_value(el.value),
                            }
                            for el in col.elements
                        ],
                    }
                    for col in case.columns
                ],
                "dependencies": [
                    {"sources": list(dep.sources), "target": dep.target}
                    for dep in case.dependencies
                ],
            }
            for case in d.cases
        ],
        "identities": {
            "next_element": d.next_element,
            "next_identity": d.next_identity,
            "classes": identity_classes(d),
        },
        "runtime": {k: encode_value(v) for k, v in d.runtime.items()},
    }


def from_dict(raw: dict) -> Document:
    version = str(raw.get("format_version", ""))
    major = version.split(".")[0]
    if major != FORMAT_VERSION.split(".")[0]:
        raise FormatVersionError(f"unsupported format version {version!r}")
    d = Document(name=raw["name"], uses=list(raw.get("uses", [])))
    for rc in raw["cases"]:
        case = CaseDiagram(id=decode_value(rc["id"]))
        for col in rc["columns"]:
            column = Column(col["kind"], [], col.get("offset", 0))
            for e in col["elements"]:
                column.elements.append(
                    Element(e["id"], e["identity"], e["shape"], decode_value(e["value"]))
                )
            case.columns.append(column)
        for dep in rc.get("dependencies", []):
            case.dependencies.append(Dependency.make(dep["sources"], dep["target"]))
        d.cases.append(case)
    idents = raw.get("identities", {})
    d.next_element = int(idents.get("next_element", 1))
    d.next_identity = int(idents.get("next_identity", 1))
    d.runtime = {k: decode_value(v) for k, v in raw.get("runtime", {}).items()}
    return d


def dumps(d: Document) -> str:
    return canonical_json(to_dict(d))


def loads(text: str) -> Document:
    return from_dict(json.loads(text))
