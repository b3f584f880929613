"""Parser and printer for the textual Zoea language.

The language is tag-driven and layout-insignificant: a top-level token of the
form `tag:` (program, use, data, case, input, derive, output) opens a field,
and everything up to the next tag token is that field's value. Values are
relaxed JSON: bare words become strings unless they lex as a number, true,
false or null; single-quoted strings are accepted alongside JSON double
quotes. `#` starts a comment running to end of line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Any, Optional

from .diagnostics import Diagnostic
from .values import Empty, contains_empty, deep_equal, to_json

TAGS = ("program", "use", "data", "case", "input", "derive", "output")

_PUNCT = set("[]{},:")
_BARE_END = set("[]{},:#'\"") | set(" \t\r\n")
_NUM_RE = re.compile(r"^-?\d+(\.\d+)?([eE][+-]?\d+)?$")


class ZoeaSyntaxError(Exception):
    """Raised for any malformed textual program."""

    def __init__(self, code: str, message: str, line: int = 0):
        super().__init__(f"{code}: {message}" + (f" (line {line})" if line else ""))
        self.code = code
        self.line = line


@dataclass
class ZoeaCase:
    id: Any
    input: Any = None
    derives: list = field(default_factory=list)
    output: Any = None


@dataclass
class ZoeaProgram:
    name: str
    uses: list = field(default_factory=list)
    data: Any = None
    cases: list = field(default_factory=list)
    comments: list = field(default_factory=list)


@dataclass
class _Token:
    kind: str  # "tag" | "word" | "string" | "punct" | "eof"
    text: str
    line: int


def _lex(source: str) -> tuple[list[_Token], list[tuple[int, str]]]:
    tokens: list[_Token] = []
    comments: list[tuple[int, str]] = []
    i, n, line = 0, len(source), 1
    depth = 0
    while i < n:
        c = source[i]
        if c == "\n":
            line += 1
            i += 1
        elif c in " \t\r":
            i += 1
        elif c == "#":
            j = source.find("\n", i)
            j = n if j < 0 else j
            comments.append((line, source[i + 1 : j].strip()))
            i = j
        elif c in "\"'":
            quote = c
            j = i + 1
            buf = []
            while j < n:
                ch = source[j]
                if ch == "\\" and quote == '"' and j + 1 < n:
                    buf.append(source[j : j + 2])
                    j += 2
                    continue
                if ch == quote:
                    break
                if ch == "\n":
                    line += 1
                buf.append(ch)
                j += 1
            if j >= n:
                raise ZoeaSyntaxError("ValueParseError", "unterminated string", line)
            tokens.append(_Token("string", "".join(buf), line))
            i = j + 1
        elif c in _PUNCT:
            if c in "[{":
                depth += 1
            elif c in "]}":
                depth -= 1
            tokens.append(_Token("punct", c, line))
            i += 1
        else:
            j = i
            while j < n and source[j] not in _BARE_END:
                j += 1
            word = source[i:j]
            if depth == 0 and j < n and source[j] == ":" and word in TAGS:
                tokens.append(_Token("tag", word, line))
                j += 1
            else:
                tokens.append(_Token("word", word, line))
            i = j
    tokens.append(_Token("eof", "", line))
    return tokens, comments


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def parse_value(self) -> Any:
        t = self.next()
        if t.kind == "string":
            if "\\" in t.text:
                import json

                try:
                    return json.loads('"' + t.text + '"')
                except Exception:
                    raise ZoeaSyntaxError("ValueParseError", f"bad escape in string", t.line)
            return t.text
        if t.kind == "word":
            return _word_value(t.text)
        if t.kind == "punct" and t.text == "[":
            items = []
            if self._try_punct("]"):
                return items
            while True:
                items.append(self.parse_value())
                if self._try_punct("]"):
                    return items
                if not self._try_punct(","):
                    raise ZoeaSyntaxError(
                        "ValueParseError", "expected ',' or ']' in list", self.peek().line
                    )
        if t.kind == "punct" and t.text == "{":
            obj: dict = {}
            if self._try_punct("}"):
                return obj
            while True:
                k = self.next()
                if k.kind not in ("word", "string"):
                    raise ZoeaSyntaxError("ValueParseError", "expected object key", k.line)
                if not self._try_punct(":"):
                    raise ZoeaSyntaxError("ValueParseError", "expected ':' after key", k.line)
                if k.text in obj:
                    raise ZoeaSyntaxError("ValueParseError", f"duplicate key {k.text!r}", k.line)
                obj[k.text] = self.parse_value()
                if self._try_punct("}"):
                    return obj
                if not self._try_punct(","):
                    raise ZoeaSyntaxError(
                        "ValueParseError", "expected ',' or '}' in object", self.peek().line
                    )
        raise ZoeaSyntaxError("ValueParseError", f"unexpected token {t.text!r}", t.line)

    def _try_punct(self, ch: str) -> bool:
        t = self.peek()
        if t.kind == "punct" and t.text == ch:
            self.pos += 1
            return True
        return False


def _word_value(word: str) -> Any:
    if word == "true":
        return True
    if word == "false":
        return False
    if word == "null":
        return None
    if _NUM_RE.match(word):
        if re.match(r"^-?\d+$", word):
            return int(word)
        try:
            return Decimal(word)
        except InvalidOperation:
            pass
    return word


def parse(source: str) -> ZoeaProgram:
    """Parse textual Zoea source into a program AST."""
    tokens, comments = _lex(source)
    p = _Parser(tokens)

    first = p.next()
    if first.kind == "tag" and first.text != "program":
        raise ZoeaSyntaxError("MissingField", "source must start with 'program:'", first.line)
    if first.kind != "tag":
        raise ZoeaSyntaxError("UnknownTag", f"expected 'program:', got {first.text!r}", first.line)
    name_tok = p.next()
    if name_tok.kind not in ("word", "string") or not name_tok.text:
        raise ZoeaSyntaxError("ValueParseError", "program name missing", name_tok.line)
    prog = ZoeaProgram(name=name_tok.text, comments=[c for _, c in comments])

    current: Optional[ZoeaCase] = None
    seen: set = set()
    while True:
        t = p.next()
        if t.kind == "eof":
            break
        if t.kind != "tag":
            raise ZoeaSyntaxError("UnknownTag", f"unexpected token {t.text!r}", t.line)
        tag = t.text
        if tag == "program":
            raise ZoeaSyntaxError("DuplicateField", "second 'program:' tag", t.line)
        if tag == "use":
            u = p.next()
            if u.kind not in ("word", "string") or not u.text:
                raise ZoeaSyntaxError("ValueParseError", "use target missing", u.line)
            prog.uses.append(u.text)
        elif tag == "data":
            if prog.data is not None or "data" in seen:
                raise ZoeaSyntaxError("DuplicateField", "second 'data:' tag", t.line)
            seen.add("data")
            prog.data = p.parse_value()
        elif tag == "case":
            cid = p.parse_value()
            current = ZoeaCase(id=cid)
            current._has_input = False  # type: ignore[attr-defined]
            current._has_output = False  # type: ignore[attr-defined]
            prog.cases.append(current)
        elif tag in ("input", "derive", "output"):
            if current is None:
                raise ZoeaSyntaxError("UnknownTag", f"'{tag}:' before any case", t.line)
            v = p.parse_value()
            if tag == "input":
                if current._has_input:  # type: ignore[attr-defined]
                    raise ZoeaSyntaxError(
                        "DuplicateField", f"case {current.id!r} has two inputs", t.line
                    )
                current.input = v
                current._has_input = True  # type: ignore[attr-defined]
            elif tag == "output":
                if current._has_output:  # type: ignore[attr-defined]
                    raise ZoeaSyntaxError(
                        "DuplicateField", f"case {current.id!r} has two outputs", t.line
                    )
                current.output = v
                current._has_output = True  # type: ignore[attr-defined]
            else:
                current.derives.append(v)

    if not prog.cases:
        raise ZoeaSyntaxError("NoCases", "program has no cases")
    for c in prog.cases:
        if not getattr(c, "_has_input", False):
            raise ZoeaSyntaxError("MissingField", f"case {c.id!r} has no input")
        if not getattr(c, "_has_output", False):
            raise ZoeaSyntaxError("MissingField", f"case {c.id!r} has no output")
        del c._has_input  # type: ignore[attr-defined]
        del c._has_output  # type: ignore[attr-defined]
    return prog


def print_program(prog: ZoeaProgram) -> str:
    """Canonical textual form: one tag per line, double-quoted strings,
    derives between input and output. parse(print_program(p)) == p
    up to comment positions."""
    lines = [f"program: {prog.name}"]
    for c in prog.comments:
        lines.append(f"# {c}" if c else "#")
    for u in prog.uses:
        lines.append(f"use: {u}")
    if prog.data is not None:
        lines.append(f"data: {to_json(prog.data)}")
    for case in prog.cases:
        lines.append(f"case: {to_json(case.id)}")
        lines.append(f"input: {to_json(case.input)}")
        for d in case.derives:
            lines.append(f"derive: {to_json(d)}")
        lines.append(f"output: {to_json(case.output)}")
    return "\n".join(lines) + "\n"


def validate(prog: ZoeaProgram) -> list[Diagnostic]:
    """Structural diagnostics; never raises."""
    diags: list[Diagnostic] = []
    seen_ids: list = []
    for c in prog.cases:
        if any(deep_equal(c.id, s) for s in seen_ids):
            diags.append(Diagnostic("error", "DuplicateCaseId", f"duplicate case id {c.id!r}"))
        else:
            seen_ids.append(c.id)
    counts = {len(c.derives) for c in prog.cases}
    if len(counts) > 1:
        diags.append(
            Diagnostic(
                "warning",
                "UnevenDerives",
                f"cases have differing derive counts: {sorted(counts)}",
            )
        )
    for u in prog.uses:
        diags.append(Diagnostic("info", "UnresolvedUse", f"use target {u!r} resolved later"))
    for c in prog.cases:
        for v in [c.input, c.output, *c.derives]:
            if contains_empty(v):
                diags.append(
                    Diagnostic("error", "EmptyValue", f"case {c.id!r} contains an empty placeholder")
                )
    return diags


def program_equal(a: ZoeaProgram, b: ZoeaProgram) -> bool:
    """AST equality ignoring comments."""
    if a.name != b.name or a.uses != b.uses or len(a.cases) != len(b.cases):
        return False
    if (a.data is None) != (b.data is None):
        return False
    if a.data is not None and not deep_equal(a.data, b.data):
        return False
    for ca, cb in zip(a.cases, b.cases):
        if not deep_equal(ca.id, cb.id) or not deep_equal(ca.input, cb.input):
            return False
        if not deep_equal(ca.output, cb.output) or len(ca.derives) != len(cb.derives):
            return False
        if not all(deep_equal(x, y) for x, y in zip(ca.derives, cb.derives)):
            return False
    return True
