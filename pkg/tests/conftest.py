"""Shared fixtures and random generators for the test suite."""

import random
import string

import pytest

from zoea.catalog import catalog_v1
from zoea.document import (
    Document,
    add_case,
    add_dependency,
    add_element,
    clone_case,
    new_document,
    set_value,
    validate_document,
)
from zoea.diagnostics import errors
from zoea.expr import Apply, Const, InputRef, eval_expr
from zoea.values import Empty

DAYS = [
    "monday",
    "tuesday",
    "wednesday",
    "thursday",
    "friday",
    "saturday",
    "sunday",
]

WEEKDAY_CASES = [
    ("thursday", "weekday"),
    ("MONDAY", "weekday"),
    ("banana", "unrecognised"),
    ("", "unrecognised"),
]

LISTING1 = """\
program: is_week_day
data: [monday, tuesday, wednesday, thursday, friday, saturday, sunday]
case: 1
  input: thursday
  output: weekday
case: 2
  input: 'MONDAY'
  output: weekday
case: 3
  input: banana
  output: unrecognised
case: 4
  input: ''
  output: unrecognised
"""


@pytest.fixture
def listing1_text():
    return LISTING1


def element_in(d: Document, case_id, column_index: int) -> str:
    """Id of the sole element in the given column of the given case."""
    for c in d.cases:
        if c.id == case_id:
            (el,) = c.columns[column_index].elements
            return el.id
    raise AssertionError(f"no case {case_id}")


def build_weekday_document() -> Document:
    """The visual counterpart of the is_week_day text program."""
    d = new_document("is_week_day", case_id=1)
    d, _ = add_element(d, 1, 0, "list", DAYS)
    d, e_in = add_element(d, 1, 1, "scalar", WEEKDAY_CASES[0][0])
    d, e_out = add_element(d, 1, 2, "scalar", WEEKDAY_CASES[0][1])
    d = add_dependency(d, 1, [e_in], e_out)
    for cid, (inp, out) in enumerate(WEEKDAY_CASES[1:], start=2):
        d = clone_case(d, 1, cid)
        d = set_value(d, element_in(d, cid, 1), inp)
        d = set_value(d, element_in(d, cid, 2), out)
    assert not errors(validate_document(d))
    return d


@pytest.fixture
def weekday_document():
    return build_weekday_document()


# ---------------------------------------------------------------------------
# Random value / expression generators (plain `random`, seeded per test)
# ---------------------------------------------------------------------------


def random_scalar(rng: random.Random):
    pick = rng.randrange(5)
    if pick == 0:
        return rng.randint(-20, 20)
    if pick == 1:
        return "".join(rng.choices(string.ascii_lowercase, k=rng.randint(0, 6)))
    if pick == 2:
        return rng.choice([True, False])
    if pick == 3:
        return None
    return rng.randint(0, 9)


def random_value(rng: random.Random, depth: int = 2):
    if depth <= 0 or rng.random() < 0.6:
        return random_scalar(rng)
    if rng.random() < 0.5:
        return [random_value(rng, depth - 1) for _ in range(rng.randint(0, 3))]
    return {
        "".join(rng.choices(string.ascii_lowercase, k=3)): random_value(rng, depth - 1)
        for _ in range(rng.randint(0, 3))
    }


def random_of_kind(rng: random.Random, kind: str):
    if kind == "number":
        return rng.randint(-20, 20)
    if kind == "text":
        return "".join(rng.choices(string.ascii_lowercase, k=rng.randint(1, 6)))
    if kind == "boolean":
        return rng.choice([True, False])
    if kind == "list":
        return [rng.randint(0, 9) for _ in range(rng.randint(1, 4))]
    if kind == "obj":
        return {
            "".join(rng.choices(string.ascii_lowercase, k=2)): rng.randint(0, 9)
            for _ in range(rng.randint(1, 3))
        }
    return random_scalar(rng)


# primitives that behave well under blind random inputs, grouped by the
# kind of input value they expect
_SAFE_UNARY = {
    "text": ["lowercase", "uppercase", "trim", "str_length", "str_reverse", "to_string"],
    "number": ["neg", "abs", "to_string"],
    "list": ["head", "last", "length", "reverse", "sort_asc", "distinct", "flatten"],
}
_SAFE_BINARY = {
    "text": ["concat", "eq"],
    "number": ["add", "sub", "mul", "min", "max", "eq", "lt", "gt"],
    "list": ["append", "member"],
}


def random_program(rng: random.Random, max_cost: int = 4):
    """A random expression over catalog_v1 with cost <= max_cost, plus the
    input kind it expects and the constants it mentions."""
    kind = rng.choice(["text", "number", "list"])
    consts = []

    def leaf():
        if rng.random() < 0.7:
            return InputRef(0)
        v = random_of_kind(rng, kind)
        consts.append(v)
        return Const(v)

    def grow(budget: int):
        if budget <= 1 or rng.random() < 0.3:
            return leaf()
        if budget >= 3 and rng.random() < 0.4:
            name = rng.choice(_SAFE_BINARY[kind])
            return Apply(name, (grow(1), grow(budget - 2)))
        name = rng.choice(_SAFE_UNARY[kind])
        return Apply(name, (grow(budget - 1),))
    return grow(max_cost), kind, consts


def cases_for(rng: random.Random, e, kind: str, n: int = 3):
    """Evaluate e on n random inputs of the given kind; None if any errors."""
    cases = []
    for _ in range(n * 4):
        if len(cases) == n:
            break
        inp = random_of_kind(rng, kind)
        try:
            out = eval_expr(e, [inp])
        except Exception:
            return None
        cases.append(([inp], out))
    return cases if len(cases) == n else None


# ---------------------------------------------------------------------------
# Random (always valid) document generator
# ---------------------------------------------------------------------------


# ---------------------------------------------------------------------------
# Dependency-benefit benchmark suite
# ---------------------------------------------------------------------------

# (name, distractor values, [(input, derive, output), ...]) — each problem is
# a two-step chain plus an unrelated input element that only inflates the
# search space when dependencies are stripped
BENCH_PROBLEMS = [
    ("lower_reverse", [7, 3], [("AbC", "abc", "cba"), ("XY", "xy", "yx")]),
    ("sort_last", ["zz", "qq"], [([3, 1, 2], [1, 2, 3], 3), ([9, 4], [4, 9], 9)]),
    ("upper_reverse", [4, 8], [("abc", "ABC", "CBA"), ("wxy", "WXY", "YXW")]),
    ("reverse_head", ["k", "m"], [([1, 2], [2, 1], 2), ([5, 6, 7], [7, 6, 5], 7)]),
    ("trim_upper", [12, 9], [(" hi ", "hi", "HI"), ("ok  ", "ok", "OK")]),
    ("reverse_upper", [2, 5], [("abc", "cba", "CBA"), ("de", "ed", "ED")]),
    ("distinct_length", ["a", "b"], [([1, 1, 2], [1, 2], 2), ([4, 4, 4, 4], [4], 1)]),
    ("sort_head", ["x", "y"], [([5, 2], [2, 5], 2), ([8, 3, 6], [3, 6, 8], 3)]),
    ("lower_trim", [1, 6], [(" A B ", " a b ", "a b"), (" Qq", " qq", "qq")]),
    ("length_neg", [True, False], [("abc", 3, -3), ("hello", 5, -5)]),
]


def build_bench_document(name, distractors, rows) -> Document:
    d = new_document(name, case_id=1, derive_columns=1)
    ids = {}
    for cid, ((inp, mid, out), noise) in enumerate(zip(rows, distractors), start=1):
        if cid > 1:
            d = add_case(d, cid)
        for key, coli, shape, value in [
            ("noise", 1, "scalar", noise),
            ("in", 1, "list" if isinstance(inp, list) else "scalar", inp),
            ("mid", 2, "list" if isinstance(mid, list) else "scalar", mid),
            ("out", 3, "list" if isinstance(out, list) else "scalar", out),
        ]:
            d, eid = add_element(d, cid, coli, shape, value, identity=ids.get(key))
            if key not in ids:
                ids[key] = next(
                    el.identity
                    for c in d.cases
                    for col in c.columns
                    for el in col.elements
                    if el.id == eid
                )
            ids[(key, cid)] = eid
        d = add_dependency(d, cid, [ids[("in", cid)]], ids[("mid", cid)])
        d = add_dependency(d, cid, [ids[("mid", cid)]], ids[("out", cid)])
    assert not errors(validate_document(d))
    return d


def make_bench_suite(directory) -> None:
    """Write the 10-problem benchmark suite as document JSON files."""
    from pathlib import Path

    from zoea.document import dumps

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, distractors, rows in BENCH_PROBLEMS:
        (directory / f"{name}.json").write_text(
            dumps(build_bench_document(name, distractors, rows)), encoding="utf-8"
        )


# ---------------------------------------------------------------------------
# Acceptance reporting: one pass/fail line per criterion in the summary
# ---------------------------------------------------------------------------


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" in rep.nodeid and rep.when == "call":
                name = rep.nodeid.split("::")[-1]
                lines.append((name, outcome.upper()))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, outcome in sorted(lines):
            terminalreporter.write_line(f"{name}: {outcome}")


def random_document(rng: random.Random) -> Document:
    n_cases = rng.randint(1, 3)
    n_derives = rng.randint(0, 2)
    d = new_document("gen", case_id=1, derive_columns=n_derives)
    for cid in range(2, n_cases + 1):
        d = add_case(d, cid)
    cols = len(d.cases[1 if n_cases > 1 else 0].columns) if d.cases else 0

    # one identity per (column, slot); data identities keep one shared value
    layout = []  # (column_index, identity, shape, data_value)
    if rng.random() < 0.5:
        layout.append((0, None, "list", [random_scalar(rng) for _ in range(3)]))
    for coli in range(1, cols):
        for _ in range(rng.randint(1, 2) if coli == 1 else 1):
            layout.append((coli, None, "scalar", None))

    ids_by_case: dict = {cid: {} for cid in range(1, n_cases + 1)}
    for slot, (coli, _, shape, data_value) in enumerate(layout):
        identity = None
        for cid in range(1, n_cases + 1):
            if cid > 1 and rng.random() < 0.25:
                continue  # identity absent from this case
            if data_value is not None:
                value = data_value
            elif rng.random() < 0.2:
                value = Empty(shape)
            else:
                value = random_scalar(rng) if shape == "scalar" else [
                    random_scalar(rng) for _ in range(2)
                ]
            d, eid = add_element(d, cid, coli, shape, value, identity=identity)
            if identity is None:
                for c in d.cases:
                    for col in c.columns:
                        for el in col.elements:
                            if el.id == eid:
                                identity = el.identity
            ids_by_case[cid][slot] = (eid, coli)

    # left-to-right dependencies onto derive/output elements
    for cid in range(1, n_cases + 1):
        for slot, (coli, *_rest) in enumerate(layout):
            if coli < 2:
                continue
            if rng.random() < 0.5:
                continue
            if slot not in ids_by_case[cid]:
                continue
            target, tcol = ids_by_case[cid][slot]
            pool = [
                eid
                for s, (eid, c) in ids_by_case[cid].items()
                if c < tcol
            ]
            if not pool:
                continue
            sources = rng.sample(pool, rng.randint(1, min(2, len(pool))))
            try:
                d = add_dependency(d, cid, sources, target)
            except Exception:
                pass
    assert not errors(validate_document(d)), validate_document(d)
    return d
