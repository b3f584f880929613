"""Versioned primitive catalog used by the synthesizer and interpreter.

Every primitive is pure, deterministic, and total over its signature: bad
inputs produce an EvalError value rather than an exception escaping the
interpreter. Argument and result kinds are coarse type tags used to prune
search ("text", "number", "boolean", "null", "list", "table", "object",
"scalar", "any").
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, DivisionByZero, InvalidOperation
from typing import Any, Callable

from .values import Table, deep_equal, is_number, to_json

CATALOG_VERSION = "v1"

SCALAR_TYPES = ("text", "number", "boolean", "null")


class EvalError(Exception):
    """Typed evaluation failure; used as a pruning signal during search."""

    def __init__(self, kind: str, detail: str = "", path: tuple = ()):
        super().__init__(f"{kind}: {detail}" if detail else kind)
        self.kind = kind
        self.path = path


@dataclass(frozen=True)
class Primitive:
    name: str
    arity: int
    arg_kinds: tuple
    result_kind: str
    fn: Callable
    cost: int = 1


def _text(v: Any, what: str = "argument") -> str:
    if not isinstance(v, str):
        raise EvalError("TypeMismatch", f"{what} must be text")
    return v


def _num(v: Any) -> Any:
    if not is_number(v):
        raise EvalError("TypeMismatch", "argument must be a number")
    return v


def _list(v: Any) -> list:
    if not isinstance(v, list):
        raise EvalError("TypeMismatch", "argument must be a list")
    return v


def _table(v: Any) -> Table:
    if not isinstance(v, Table):
        raise EvalError("TypeMismatch", "argument must be a table")
    return v


def _obj(v: Any) -> dict:
    if not isinstance(v, dict):
        raise EvalError("TypeMismatch", "argument must be an object")
    return v


def _index(v: Any) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        if isinstance(v, Decimal) and v == v.to_integral_value():
            return int(v)
        raise EvalError("TypeMismatch", "index must be an integer")
    return v


def _dec(v: Any) -> Decimal:
    return v if isinstance(v, Decimal) else Decimal(v)


def _normalize_num(v: Decimal) -> Any:
    # Collapse integral decimals back to int so results print cleanly.
    if v == v.to_integral_value() and -(10**15) < v < 10**15:
        return int(v)
    return v


def _split(s: Any, sep: Any) -> list:
    s, sep = _text(s), _text(sep, "separator")
    if sep == "":
        raise EvalError("BadSeparator", "separator must be non-empty")
    return s.split(sep)


def _join(items: Any, sep: Any) -> str:
    items, sep = _list(items), _text(sep, "separator")
    parts = []
    for x in items:
        if not isinstance(x, str):
            raise EvalError("TypeMismatch", "join requires a list of text")
        parts.append(x)
    return sep.join(parts)


def _to_string(v: Any) -> str:
    if isinstance(v, str):
        return v
    if v is None or isinstance(v, bool) or is_number(v):
        return to_json(v)
    raise EvalError("TypeMismatch", "to_string requires a scalar")


def _head(v: Any) -> Any:
    v = _list(v)
    if not v:
        raise EvalError("IndexOutOfRange", "head of empty list")
    return v[0]


def _last(v: Any) -> Any:
    v = _list(v)
    if not v:
        raise EvalError("IndexOutOfRange", "last of empty list")
    return v[-1]


def _sort_asc(v: Any) -> list:
    v = _list(v)
    if all(is_number(x) for x in v):
        return sorted(v, key=_dec)
    if all(isinstance(x, str) for x in v):
        return sorted(v)
    raise EvalError("TypeMismatch", "sort_asc requires all numbers or all text")


def _distinct(v: Any) -> list:
    v = _list(v)
    out: list = []
    for x in v:
        if not any(deep_equal(x, y) for y in out):
            out.append(x)
    return out


def _member(lst: Any, v: Any) -> bool:
    return any(deep_equal(v, x) for x in _list(lst))


def _index_of(lst: Any, v: Any) -> int:
    for i, x in enumerate(_list(lst)):
        if deep_equal(x, v):
            return i
    raise EvalError("NotFound", "value not in list")


def _nth(lst: Any, i: Any) -> Any:
    lst, i = _list(lst), _index(i)
    if not 0 <= i < len(lst):
        raise EvalError("IndexOutOfRange", f"index {i} out of range")
    return lst[i]


def _flatten(v: Any) -> list:
    out: list = []
    for x in _list(v):
        if not isinstance(x, list):
            raise EvalError("TypeMismatch", "flatten requires a list of lists")
        out.extend(x)
    return out


def _arith(op: Callable) -> Callable:
    def run(a: Any, b: Any) -> Any:
        a, b = _num(a), _num(b)
        try:
            return _normalize_num(op(_dec(a), _dec(b)))
        except (DivisionByZero, ZeroDivisionError):
            raise EvalError("DivByZero", "division by zero")
        except InvalidOperation:
            raise EvalError("DivByZero", "undefined arithmetic result")

    return run


def _cmp(op: Callable) -> Callable:
    def run(a: Any, b: Any) -> bool:
        if is_number(a) and is_number(b):
            return op(_dec(a), _dec(b))
        if isinstance(a, str) and isinstance(b, str):
            return op(a, b)
        raise EvalError("TypeMismatch", "comparison requires two numbers or two texts")

    return run


def _is_empty(v: Any) -> bool:
    if isinstance(v, (str, list, dict)):
        return len(v) == 0
    if isinstance(v, Table):
        return False
    raise EvalError("TypeMismatch", "is_empty requires text or a container")


def _row_at(t: Any, i: Any) -> list:
    t, i = _table(t), _index(i)
    if not 0 <= i < t.row_count:
        raise EvalError("IndexOutOfRange", f"row {i} out of range")
    return list(t.rows[i])


def _col_at(t: Any, i: Any) -> list:
    t, i = _table(t), _index(i)
    if not 0 <= i < t.col_count:
        raise EvalError("IndexOutOfRange", f"column {i} out of range")
    return [row[i] for row in t.rows]


def _transpose(t: Any) -> Table:
    t = _table(t)
    return Table([[t.rows[r][c] for r in range(t.row_count)] for c in range(t.col_count)])


def _get(obj: Any, key: Any) -> Any:
    obj, key = _obj(obj), _text(key, "key")
    if key not in obj:
        raise EvalError("NotFound", f"no key {key!r}")
    return obj[key]


def _primitives() -> list[Primitive]:
    p = Primitive
    return [
        # strings
        p("lowercase", 1, ("text",), "text", lambda s: _text(s).lower()),
        p("uppercase", 1, ("text",), "text", lambda s: _text(s).upper()),
        p("trim", 1, ("text",), "text", lambda s: _text(s).strip()),
        p("concat", 2, ("text", "text"), "text", lambda a, b: _text(a) + _text(b)),
        p("split", 2, ("text", "text"), "list", _split),
        p("join", 2, ("list", "text"), "text", _join),
        p("str_length", 1, ("text",), "number", lambda s: len(_text(s))),
        p("str_reverse", 1, ("text",), "text", lambda s: _text(s)[::-1]),
        p("to_string", 1, ("scalar",), "text", _to_string),
        # lists
        p("head", 1, ("list",), "any", _head),
        p("last", 1, ("list",), "any", _last),
        p("length", 1, ("list",), "number", lambda v: len(_list(v))),
        p("reverse", 1, ("list",), "list", lambda v: list(reversed(_list(v)))),
        p("sort_asc", 1, ("list",), "list", _sort_asc),
        p("distinct", 1, ("list",), "list", _distinct),
        p("member", 2, ("list", "any"), "boolean", _member),
        p("index_of", 2, ("list", "any"), "number", _index_of),
        p("nth", 2, ("list", "number"), "any", _nth),
        p("append", 2, ("list", "any"), "list", lambda l, v: _list(l) + [v]),
        p("flatten", 1, ("list",), "list", _flatten),
        # numbers
        p("add", 2, ("number", "number"), "number", _arith(lambda a, b: a + b)),
        p("sub", 2, ("number", "number"), "number", _arith(lambda a, b: a - b)),
        p("mul", 2, ("number", "number"), "number", _arith(lambda a, b: a * b)),
        p("div", 2, ("number", "number"), "number", _arith(lambda a, b: a / b)),
        p("mod", 2, ("number", "number"), "number", _arith(lambda a, b: a % b)),
        p("neg", 1, ("number",), "number", lambda a: _normalize_num(-_dec(_num(a)))),
        p("abs", 1, ("number",), "number", lambda a: _normalize_num(abs(_dec(_num(a))))),
        p("min", 2, ("number", "number"), "number", _arith(lambda a, b: min(a, b))),
        p("max", 2, ("number", "number"), "number", _arith(lambda a, b: max(a, b))),
        # predicates
        p("eq", 2, ("any", "any"), "boolean", deep_equal),
        p("lt", 2, ("any", "any"), "boolean", _cmp(lambda a, b: a < b)),
        p("gt", 2, ("any", "any"), "boolean", _cmp(lambda a, b: a > b)),
        p("is_empty", 1, ("any",), "boolean", _is_empty),
        # tables
        p("row_at", 2, ("table", "number"), "list", _row_at),
        p("col_at", 2, ("table", "number"), "list", _col_at),
        p("transpose", 1, ("table",), "table", _transpose),
        p("row_count", 1, ("table",), "number", lambda t: _table(t).row_count),
        p("col_count", 1, ("table",), "number", lambda t: _table(t).col_count),
        # objects
        p("get", 2, ("object", "text"), "any", _get),
        p("keys", 1, ("object",), "list", lambda o: list(_obj(o).keys())),
        p("values", 1, ("object",), "list", lambda o: list(_obj(o).values())),
    ]


_CATALOG_V1: list[Primitive] = _primitives()
_BY_NAME: dict = {p.name: p for p in _CATALOG_V1}


def catalog_v1() -> list[Primitive]:
    """The fixed v1 catalog, in canonical (search) order."""
    return list(_CATALOG_V1)


def primitive(name: str) -> Primitive:
    if name not in _BY_NAME:
        raise KeyError(f"unknown primitive {name!r}")
    return _BY_NAME[name]
