"""Core value model: scalars, lists, tables, objects, and empty placeholders.

Values are plain Python data wherever possible:

* text      -> str
* number    -> int or decimal.Decimal (lexical form preserved by Decimal)
* boolean   -> bool
* null      -> None
* list      -> list
* object    -> dict (insertion order preserved and user-visible)
* table     -> Table (rectangular rows; presentation-distinct from nested lists)
* empty     -> Empty(kind) placeholder, never a real value

All values are treated as immutable after construction; operations here are
pure and safe to share across threads.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Any, Iterable, Optional

KINDS = ("scalar", "list", "table", "object")

_INT_RE = re.compile(r"^-?\d+$")


class ValueError_(Exception):
    """Base for value-model errors."""


class EmptyPresent(ValueError_):
    """An Empty placeholder was found where a real value is required."""


class ShapeError(ValueError_):
    """A table constraint (rectangularity, minimum size) was violated."""


class ParseError(ValueError_):
    """Malformed JSON input."""

    def __init__(self, message: str, position: int = 0):
        super().__init__(message)
        self.position = position


@dataclass(frozen=True)
class Empty:
    """Placeholder for a not-yet-filled element of a given kind.

    Distinct from every real value, including the string "empty" and
    zero-length containers.
    """

    kind: str = "scalar"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ShapeError(f"unknown empty kind {self.kind!r}")


@dataclass
class Table:
    """Rectangular grid of values: >= 1 row, >= 1 column, all rows equal length."""

    rows: list

    def __post_init__(self):
        if not self.rows:
            raise ShapeError("table must have at least one row")
        width = len(self.rows[0])
        if width < 1:
            raise ShapeError("table must have at least one column")
        for r in self.rows:
            if len(r) != width:
                raise ShapeError("table rows must all have the same length")

    @property
    def row_count(self) -> int:
        return len(self.rows)

    @property
    def col_count(self) -> int:
        return len(self.rows[0])


def is_number(v: Any) -> bool:
    return isinstance(v, (int, Decimal)) and not isinstance(v, bool)


def is_scalar(v: Any) -> bool:
    return v is None or isinstance(v, (str, bool)) or is_number(v)


def kind_of(v: Any) -> str:
    """Top-level kind of a value: scalar | list | table | object."""
    if isinstance(v, Empty):
        return v.kind
    if isinstance(v, Table):
        return "table"
    if isinstance(v, list):
        return "list"
    if isinstance(v, dict):
        return "object"
    if is_scalar(v):
        return "scalar"
    raise ValueError_(f"not a value: {v!r}")


def type_of(v: Any) -> str:
    """Finer-grained type used for search signatures."""
    if isinstance(v, bool):
        return "boolean"
    if is_number(v):
        return "number"
    if isinstance(v, str):
        return "text"
    if v is None:
        return "null"
    return kind_of(v)


def contains_empty(v: Any) -> bool:
    if isinstance(v, Empty):
        return True
    if isinstance(v, Table):
        return any(contains_empty(x) for row in v.rows for x in row)
    if isinstance(v, list):
        return any(contains_empty(x) for x in v)
    if isinstance(v, dict):
        return any(contains_empty(x) for x in v.values())
    return False


def _write_json(v: Any, out: list) -> None:
    if isinstance(v, Empty):
        raise EmptyPresent(f"empty {v.kind} placeholder cannot be serialized")
    if v is None:
        out.append("null")
    elif isinstance(v, bool):
        out.append("true" if v else "false")
    elif isinstance(v, int):
        out.append(str(v))
    elif isinstance(v, Decimal):
        if not v.is_finite():
            raise ValueError_(f"non-finite number {v}")
        out.append(str(v))
    elif isinstance(v, str):
        out.append(json.dumps(v, ensure_ascii=False))
    elif isinstance(v, Table):
        _write_json([list(r) for r in v.rows], out)
    elif isinstance(v, list):
        out.append("[")
        for i, item in enumerate(v):
            if i:
                out.append(",")
            _write_json(item, out)
        out.append("]")
    elif isinstance(v, dict):
        out.append("{")
        for i, (k, item) in enumerate(v.items()):
            if i:
                out.append(",")
            if not isinstance(k, str):
                raise ValueError_(f"object key must be text, got {k!r}")
            out.append(json.dumps(k, ensure_ascii=False))
            out.append(":")
            _write_json(item, out)
        out.append("}")
    else:
        raise ValueError_(f"not a value: {v!r}")


def to_json(v: Any) -> str:
    """Serialize a value to compact JSON. Tables become arrays of arrays.

    Raises EmptyPresent if any Empty placeholder is reachable.
    """
    out: list = []
    _write_json(v, out)
    return "".join(out)


def _parse_number(s: str) -> Any:
    if _INT_RE.match(s):
        return int(s)
    return Decimal(s)


def from_json(text: str, hint: Optional[str] = None) -> Any:
    """Parse JSON text into a value.

    `hint="table"` converts a top-level array-of-arrays into a Table
    (ShapeError on ragged rows); other hints are accepted but only `table`
    changes the result, since tables are the one shape JSON cannot express.
    """
    try:
        v = json.loads(
            text,
            parse_float=Decimal,
            parse_int=int,
            parse_constant=_reject_constant,
        )
    except json.JSONDecodeError as e:
        raise ParseError(str(e), e.pos) from e
    if hint == "table":
        if not isinstance(v, list) or not v or not all(isinstance(r, list) for r in v):
            raise ShapeError("table hint requires a non-empty array of arrays")
        try:
            return Table([list(r) for r in v])
        except ShapeError:
            raise ShapeError("ragged rows under table hint")
    return v


def _reject_constant(name: str) -> Any:
    raise ParseError(f"non-finite JSON constant {name!r}")


def deep_equal(a: Any, b: Any) -> bool:
    """Structural equality. Numbers compare numerically (1 == 1.0), text is
    code-point exact, booleans are their own kind, tables equal their
    row-list form (the table/list distinction is presentation metadata)."""
    if isinstance(a, Empty) or isinstance(b, Empty):
        return isinstance(a, Empty) and isinstance(b, Empty) and a.kind == b.kind
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if is_number(a) or is_number(b):
        return is_number(a) and is_number(b) and a == b
    if isinstance(a, str) or isinstance(b, str):
        return isinstance(a, str) and isinstance(b, str) and a == b
    if a is None or b is None:
        return a is None and b is None
    ra = [list(r) for r in a.rows] if isinstance(a, Table) else a
    rb = [list(r) for r in b.rows] if isinstance(b, Table) else b
    if isinstance(ra, list) or isinstance(rb, list):
        if not (isinstance(ra, list) and isinstance(rb, list)) or len(ra) != len(rb):
            return False
        return all(deep_equal(x, y) for x, y in zip(ra, rb))
    if isinstance(a, dict) and isinstance(b, dict):
        if set(a.keys()) != set(b.keys()):
            return False
        return all(deep_equal(a[k], b[k]) for k in a)
    return False


# ---------------------------------------------------------------------------
# Tagged encoding for document files
# ---------------------------------------------------------------------------
# Inside stored documents every value node is wrapped as {"t": ..., "v": ...}
# so that tables, empties and exact numeric lexicals survive standard JSON.


def encode_value(v: Any) -> dict:
    if isinstance(v, Empty):
        return {"t": "empty", "v": v.kind}
    if v is None:
        return {"t": "null"}
    if isinstance(v, bool):
        return {"t": "bool", "v": v}
    if is_number(v):
        return {"t": "num", "v": str(v)}
    if isinstance(v, str):
        return {"t": "text", "v": v}
    if isinstance(v, Table):
        return {"t": "table", "v": [[encode_value(x) for x in row] for row in v.rows]}
    if isinstance(v, list):
        return {"t": "list", "v": [encode_value(x) for x in v]}
    if isinstance(v, dict):
        return {"t": "obj", "v": [[k, encode_value(x)] for k, x in v.items()]}
    raise ValueError_(f"not a value: {v!r}")


def decode_value(d: Any) -> Any:
    if not isinstance(d, dict) or "t" not in d:
        raise ParseError(f"bad encoded value: {d!r}")
    t = d["t"]
    if t == "empty":
        return Empty(d["v"])
    if t == "null":
        return None
    if t == "bool":
        return bool(d["v"])
    if t == "num":
        try:
            return _parse_number(d["v"])
        except (InvalidOperation, TypeError) as e:
            raise ParseError(f"bad number {d['v']!r}") from e
    if t == "text":
        return str(d["v"])
    if t == "table":
        return Table([[decode_value(x) for x in row] for row in d["v"]])
    if t == "list":
        return [decode_value(x) for x in d["v"]]
    if t == "obj":
        out: dict = {}
        for k, x in d["v"]:
            if k in out:
                raise ParseError(f"duplicate object key {k!r}")
            out[k] = decode_value(x)
        return out
    raise ParseError(f"unknown value tag {t!r}")


def canonical_json(obj: Any) -> str:
    """Compact, deterministic JSON for plain (already-encoded) structures."""
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))
