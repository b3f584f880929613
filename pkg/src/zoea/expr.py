"""Expression language produced by the synthesizer, plus its interpreter and
canonical textual serialization.

Costs: every node counts 1 except If and MapOver which count 2.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from decimal import Decimal
from typing import Any, Optional

from .catalog import EvalError, primitive
from .values import deep_equal, to_json


@dataclass(frozen=True)
class InputRef:
    index: int


@dataclass(frozen=True)
class Const:
    value: Any


@dataclass(frozen=True)
class Apply:
    name: str
    args: tuple


@dataclass(frozen=True)
class If:
    pred: Any
    then: Any
    other: Any


@dataclass(frozen=True)
class CallImport:
    name: str
    args: tuple


@dataclass(frozen=True)
class MapOver:
    items: Any
    body: Any


@dataclass(frozen=True)
class Slot:
    pass


Expr = Any  # union of the node classes above

_MISSING = object()


def cost(e: Expr) -> int:
    if isinstance(e, (InputRef, Const, Slot)):
        return 1
    if isinstance(e, Apply):
        return primitive(e.name).cost + sum(cost(a) for a in e.args)
    if isinstance(e, CallImport):
        return 1 + sum(cost(a) for a in e.args)
    if isinstance(e, If):
        return 2 + cost(e.pred) + cost(e.then) + cost(e.other)
    if isinstance(e, MapOver):
        return 2 + cost(e.items) + cost(e.body)
    raise TypeError(f"not an expression: {e!r}")


@dataclass(frozen=True)
class ImportedProgram:
    """A callable compiled program offered to search via `use`."""

    name: str
    arity: int
    fn: Any  # callable(list of values) -> value, may raise EvalError


def eval_expr(e: Expr, inputs: list, imports: Optional[dict] = None, slot: Any = _MISSING) -> Any:
    """Evaluate deterministically. Raises EvalError on any type mismatch,
    missing index, or arithmetic failure; never anything else."""
    imports = imports or {}
    if isinstance(e, InputRef):
        if not 0 <= e.index < len(inputs):
            raise EvalError("IndexOutOfRange", f"no input {e.index}")
        return inputs[e.index]
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Slot):
        if slot is _MISSING:
            raise EvalError("TypeMismatch", "slot outside map body")
        return slot
    if isinstance(e, Apply):
        prim = primitive(e.name)
        if len(e.args) != prim.arity:
            raise EvalError("TypeMismatch", f"{e.name} expects {prim.arity} args")
        vals = [eval_expr(a, inputs, imports, slot) for a in e.args]
        try:
            return prim.fn(*vals)
        except EvalError:
            raise
        except RecursionError:
            raise
        except Exception as ex:  # defensive: primitives should raise EvalError
            raise EvalError("TypeMismatch", f"{e.name}: {ex}")
    if isinstance(e, If):
        p = eval_expr(e.pred, inputs, imports, slot)
        if not isinstance(p, bool):
            raise EvalError("TypeMismatch", "if predicate must be boolean")
        return eval_expr(e.then if p else e.other, inputs, imports, slot)
    if isinstance(e, MapOver):
        items = eval_expr(e.items, inputs, imports, slot)
        if not isinstance(items, list):
            raise EvalError("TypeMismatch", "map requires a list")
        return [eval_expr(e.body, inputs, imports, x) for x in items]
    if isinstance(e, CallImport):
        if e.name not in imports:
            raise EvalError("NotFound", f"unknown import {e.name!r}")
        prog = imports[e.name]
        if len(e.args) != prog.arity:
            raise EvalError("TypeMismatch", f"{e.name} expects {prog.arity} args")
        vals = [eval_expr(a, inputs, imports, slot) for a in e.args]
        return prog.fn(vals)
    raise EvalError("TypeMismatch", f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Canonical serialization
# ---------------------------------------------------------------------------


def canonical_serialization(e: Expr) -> str:
    if isinstance(e, InputRef):
        return f"(in {e.index})"
    if isinstance(e, Const):
        return f"(const {to_json(e.value)})"
    if isinstance(e, Slot):
        return "(slot)"
    if isinstance(e, Apply):
        inner = " ".join(canonical_serialization(a) for a in e.args)
        return f"(app {e.name}{' ' + inner if inner else ''})"
    if isinstance(e, CallImport):
        inner = " ".join(canonical_serialization(a) for a in e.args)
        return f"(call {e.name}{' ' + inner if inner else ''})"
    if isinstance(e, If):
        parts = [canonical_serialization(x) for x in (e.pred, e.then, e.other)]
        return f"(if {' '.join(parts)})"
    if isinstance(e, MapOver):
        return f"(map {canonical_serialization(e.items)} {canonical_serialization(e.body)})"
    raise TypeError(f"not an expression: {e!r}")


class ExprParseError(Exception):
    pass


_SYMBOL_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_JSON_DECODER = json.JSONDecoder(parse_float=Decimal, parse_int=int)


class _P:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r\n":
            self.pos += 1

    def expect(self, ch: str):
        self.ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            raise ExprParseError(f"expected {ch!r} at {self.pos}")
        self.pos += 1

    def symbol(self) -> str:
        self.ws()
        m = _SYMBOL_RE.match(self.text, self.pos)
        if not m:
            raise ExprParseError(f"expected symbol at {self.pos}")
        self.pos = m.end()
        return m.group(0)

    def json_value(self) -> Any:
        self.ws()
        try:
            v, end = _JSON_DECODER.raw_decode(self.text, self.pos)
        except json.JSONDecodeError as e:
            raise ExprParseError(f"bad constant at {self.pos}: {e}")
        self.pos = end
        return v

    def at(self, ch: str) -> bool:
        self.ws()
        return self.pos < len(self.text) and self.text[self.pos] == ch

    def expr(self) -> Expr:
        self.expect("(")
        head = self.symbol()
        if head == "in":
            self.ws()
            m = re.match(r"\d+", self.text[self.pos :])
            if not m:
                raise ExprParseError(f"expected input index at {self.pos}")
            self.pos += m.end()
            node: Expr = InputRef(int(m.group(0)))
        elif head == "const":
            node = Const(self.json_value())
        elif head == "slot":
            node = Slot()
        elif head in ("app", "call"):
            name = self.symbol()
            args = []
            while not self.at(")"):
                args.append(self.expr())
            node = Apply(name, tuple(args)) if head == "app" else CallImport(name, tuple(args))
        elif head == "if":
            node = If(self.expr(), self.expr(), self.expr())
        elif head == "map":
            node = MapOver(self.expr(), self.expr())
        else:
            raise ExprParseError(f"unknown form {head!r}")
        self.expect(")")
        return node


def parse_expr(text: str) -> Expr:
    p = _P(text)
    e = p.expr()
    p.ws()
    if p.pos != len(text):
        raise ExprParseError(f"trailing input at {p.pos}")
    return e


def expr_equal(a: Expr, b: Expr) -> bool:
    """Structural equality with value-level comparison of constants."""
    if type(a) is not type(b):
        return False
    if isinstance(a, InputRef):
        return a.index == b.index
    if isinstance(a, Const):
        return deep_equal(a.value, b.value)
    if isinstance(a, Slot):
        return True
    if isinstance(a, (Apply, CallImport)):
        return (
            a.name == b.name
            and len(a.args) == len(b.args)
            and all(expr_equal(x, y) for x, y in zip(a.args, b.args))
        )
    if isinstance(a, If):
        return (
            expr_equal(a.pred, b.pred)
            and expr_equal(a.then, b.then)
            and expr_equal(a.other, b.other)
        )
    if isinstance(a, MapOver):
        return expr_equal(a.items, b.items) and expr_equal(a.body, b.body)
    return False
