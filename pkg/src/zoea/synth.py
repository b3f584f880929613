"""Blackboard search for an expression consistent with a set of cases.

Knowledge sources run in a fixed order and post hypotheses against a shared
problem: a constant detector, an identity/projection detector, a
single-primitive matcher, a cost-bounded bottom-up enumerator with
observational-equivalence pruning, and a conditional splitter that partitions
cases on a boolean expression and recurses per branch.

The contract: any returned expression replays every case exactly; among
solutions found at the winning cost tier the lexicographically smallest
canonical serialization is returned, so results are deterministic.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Any, Optional

from .catalog import SCALAR_TYPES, EvalError, catalog_v1
from .expr import (
    Apply,
    CallImport,
    Const,
    If,
    InputRef,
    MapOver,
    Slot,
    canonical_serialization,
    cost,
    eval_expr,
)
from .values import Empty, deep_equal, is_scalar, to_json, type_of

_MAX_IF_DEPTH = 3
_MAX_BODY_COST = 4
# Tier at which a conditional hypothesis may be returned even if its cost
# exceeds the tier reached so far; keeps cost-minimality exact for minimal
# solutions of cost <= 4 without enumerating every tier up to the If's cost.
_IF_MATURITY = 4
_ERR = "!"


@dataclass
class SearchConfig:
    max_cost: int = 12
    max_candidates: int = 2_000_000
    timeout_ms: int = 10_000
    knowledge_source_order: tuple = (
        "constant",
        "identity",
        "single_primitive",
        "enumerative",
        "conditional",
    )

    def __post_init__(self):
        if self.max_cost <= 0 or self.max_candidates <= 0 or self.timeout_ms <= 0:
            raise ValueError("search budgets must be positive")


@dataclass
class SynthesisProblem:
    cases: list  # [(inputs: list, output), ...]
    arity: int
    constants_pool: list = field(default_factory=list)
    imports: dict = field(default_factory=dict)  # name -> ImportedProgram

    def __post_init__(self):
        if not self.cases:
            raise ValueError("problem needs at least one case")
        for inputs, _ in self.cases:
            if len(inputs) != self.arity:
                raise ValueError("all cases must share the problem arity")


@dataclass
class Statistics:
    candidates_expanded: int = 0
    per_source: dict = field(default_factory=dict)
    elapsed_ms: float = 0.0
    reason: str = ""

    def bump(self, source: str, n: int = 1):
        self.candidates_expanded += n
        self.per_source[source] = self.per_source.get(source, 0) + n


@dataclass
class SynthesisResult:
    expr: Optional[Any]
    stats: Statistics

    @property
    def success(self) -> bool:
        return self.expr is not None


class _Exhausted(Exception):
    def __init__(self, reason: str):
        self.reason = reason


@dataclass
class _Term:
    expr: Any
    sig: tuple  # per-case canonical output or error marker
    kind: str


def _sig_of(outputs: list) -> tuple:
    return tuple(to_json(o) for o in outputs)


def _kind_of_sig(values: list) -> str:
    kinds = {type_of(v) for v in values}
    return kinds.pop() if len(kinds) == 1 else "any"


def _compatible(arg_kind: str, term_kind: str) -> bool:
    if arg_kind == "any" or term_kind == "any":
        return True
    if arg_kind == "scalar":
        return term_kind in SCALAR_TYPES
    return arg_kind == term_kind


def _collect_scalars(v: Any, out: list) -> None:
    if is_scalar(v):
        out.append(v)
    elif isinstance(v, list):
        for x in v:
            _collect_scalars(x, out)
    elif isinstance(v, dict):
        for x in v.values():
            _collect_scalars(x, out)
    elif hasattr(v, "rows"):
        for row in v.rows:
            for x in row:
                _collect_scalars(x, out)


class _Search:
    def __init__(self, problem: SynthesisProblem, config: SearchConfig, stats: Statistics,
                 deadline: float):
        self.problem = problem
        self.config = config
        self.stats = stats
        self.deadline = deadline
        self.catalog = catalog_v1()
        self.target_sig = _sig_of([out for _, out in problem.cases])
        self.consts = self._build_constants()

    def _build_constants(self) -> list:
        pool: list = []

        def add(v: Any):
            if isinstance(v, Empty):
                return
            if not any(deep_equal(v, p) for p in pool):
                pool.append(v)

        for v in self.problem.constants_pool:
            add(v)
        for _, out in self.problem.cases:
            add(out)
            scalars: list = []
            _collect_scalars(out, scalars)
            for s in scalars:
                add(s)
        # ambient small integers: cheap, and required for basic arithmetic
        # steps whose outputs do not contain the needed literal
        add(0)
        add(1)
        pool.sort(key=to_json)
        return pool

    # -- candidate evaluation -------------------------------------------

    def _check_budget(self, source: str, n: int = 1):
        self.stats.bump(source, n)
        if self.stats.candidates_expanded > self.config.max_candidates:
            raise _Exhausted("budget exhausted")
        if self.stats.candidates_expanded % 256 == 0 and time.monotonic() > self.deadline:
            raise _Exhausted("timeout")

    def _evaluate(self, e: Any, source: str, cases: Optional[list] = None) -> Optional[_Term]:
        """Run a candidate over the cases; None when it errors everywhere."""
        self._check_budget(source)
        cases = cases if cases is not None else self.problem.cases
        sig: list = []
        values: list = []
        any_ok = False
        for inputs, _ in cases:
            try:
                v = eval_expr(e, inputs, self.problem.imports)
                sig.append(to_json(v))
                values.append(v)
                any_ok = True
            except EvalError as err:
                sig.append(_ERR + err.kind)
        if not any_ok:
            return None
        return _Term(e, tuple(sig), _kind_of_sig(values))

    # -- knowledge sources ----------------------------------------------

    def ks_constant(self) -> Optional[Any]:
        first = self.problem.cases[0][1]
        if all(deep_equal(out, first) for _, out in self.problem.cases):
            self._check_budget("constant")
            return Const(first)
        return None

    def ks_identity(self) -> Optional[Any]:
        for i in range(self.problem.arity):
            self._check_budget("identity")
            if all(deep_equal(inputs[i], out) for inputs, out in self.problem.cases):
                return InputRef(i)
        return None

    def _leaves(self) -> list:
        leaves = [InputRef(i) for i in range(self.problem.arity)]
        leaves += [Const(c) for c in self.consts]
        return leaves

    def ks_single_primitive(self) -> Optional[Any]:
        leaf_terms = []
        for e in self._leaves():
            t = self._evaluate(e, "single_primitive")
            if t is not None:
                leaf_terms.append(t)
        hits: list = []
        for prim in self.catalog:
            pools = []
            for ak in prim.arg_kinds:
                pools.append([t for t in leaf_terms if _compatible(ak, t.kind)])
            for combo in itertools.product(*pools):
                e = Apply(prim.name, tuple(t.expr for t in combo))
                term = self._evaluate(e, "single_primitive")
                if term is not None and term.sig == self.target_sig:
                    hits.append(e)
        if hits:
            return min(hits, key=lambda e: (cost(e), canonical_serialization(e)))
        return None

    # -- enumerative composer + conditional splitter ---------------------

    def enumerate_tiers(self, if_depth: int) -> Optional[Any]:
        levels: dict = {}
        body_levels: dict = {}
        sigs_seen: set = set()

        def add_term(c: int, term: _Term) -> None:
            if term.sig in sigs_seen:
                return
            sigs_seen.add(term.sig)
            levels.setdefault(c, []).append(term)

        pending_ifs: list = []
        splitters: list = []  # boolean terms that split the cases, unresolved

        def settle(tier: int, solutions: list) -> Optional[Any]:
            """Pick the winner once any solution has matured at this tier.

            A conditional matures when its full cost fits the tier, or once
            every enumerative tier that could beat it on cost-4 minimality
            has been searched."""
            matured = [
                e for e in pending_ifs if cost(e) <= tier or tier >= _IF_MATURITY
            ]
            ready = solutions + matured
            if not ready:
                return None
            return min(ready, key=lambda e: (cost(e), canonical_serialization(e)))

        def run_splitters(tier: int) -> None:
            for term in list(splitters):
                pred_cost = cost(term.expr)
                remaining = self.config.max_cost - 2 - pred_cost
                if remaining < 2:
                    splitters.remove(term)
                    continue
                e = self._try_split(term, min(remaining, tier), if_depth)
                if e is not None:
                    pending_ifs.append(e)
                    splitters.remove(term)
                elif tier >= remaining:
                    splitters.remove(term)  # retried at full budget; hopeless

        # level 1: leaves
        solutions: list = []
        for e in self._leaves():
            term = self._evaluate(e, "enumerative")
            if term is None:
                continue
            if term.sig == self.target_sig:
                solutions.append(e)
            add_term(1, term)
        body_levels[1] = [Slot()] + [t.expr for t in levels.get(1, [])]
        splitters.extend(self._collect_splitters(levels, 1, if_depth))
        run_splitters(1)
        winner = settle(1, solutions)
        if winner is not None:
            return winner

        for tier in range(2, self.config.max_cost + 1):
            solutions = []

            def consider(e: Any) -> None:
                term = self._evaluate(e, "enumerative")
                if term is None:
                    return
                if term.sig == self.target_sig:
                    solutions.append(e)
                else:
                    add_term(tier, term)

            # Apply
            for prim in self.catalog:
                budget = tier - prim.cost
                for arg_costs in _compositions(budget, prim.arity):
                    pools = []
                    for ak, c in zip(prim.arg_kinds, arg_costs):
                        pools.append(
                            [t for t in levels.get(c, []) if _compatible(ak, t.kind)]
                        )
                    for combo in itertools.product(*pools):
                        consider(Apply(prim.name, tuple(t.expr for t in combo)))
            # CallImport
            for name in sorted(self.problem.imports):
                prog = self.problem.imports[name]
                for arg_costs in _compositions(tier - 1, prog.arity):
                    pools = [list(levels.get(c, [])) for c in arg_costs]
                    for combo in itertools.product(*pools):
                        consider(CallImport(name, tuple(t.expr for t in combo)))
            # MapOver
            for c_items in range(1, tier - 2):
                c_body = tier - 2 - c_items
                if c_body < 1 or c_body > _MAX_BODY_COST:
                    continue
                items_pool = [
                    t for t in levels.get(c_items, []) if _compatible("list", t.kind)
                ]
                for it in items_pool:
                    for body in body_levels.get(c_body, []):
                        consider(MapOver(it.expr, body))
            # grow the map-body bank (syntactic, slot-aware, no nesting)
            if tier <= _MAX_BODY_COST:
                grown: list = []
                for prim in self.catalog:
                    budget = tier - prim.cost
                    for arg_costs in _compositions(budget, prim.arity):
                        pools = [list(body_levels.get(c, [])) for c in arg_costs]
                        for combo in itertools.product(*pools):
                            grown.append(Apply(prim.name, tuple(combo)))
                body_levels[tier] = grown

            splitters.extend(self._collect_splitters(levels, tier, if_depth))
            run_splitters(tier)
            winner = settle(tier, solutions)
            if winner is not None:
                return winner
        # out of tiers: any conditional found is better than failure
        if pending_ifs:
            return min(pending_ifs, key=lambda e: (cost(e), canonical_serialization(e)))
        return None

    def _collect_splitters(self, levels: dict, tier: int, if_depth: int) -> list:
        """Boolean terms at this tier that partition the cases both ways."""
        if if_depth <= 0:
            return []
        outs = []
        for _, out in self.problem.cases:
            if not any(deep_equal(out, o) for o in outs):
                outs.append(out)
        if len(outs) > 4 or len(self.problem.cases) < 2:
            return []
        found = []
        for term in levels.get(tier, []):
            if term.kind != "boolean":
                continue
            if any(s.startswith(_ERR) for s in term.sig):
                continue
            if all(s == "true" for s in term.sig) or all(s == "false" for s in term.sig):
                continue
            found.append(term)
        return found

    def _try_split(self, term: "_Term", branch_budget: int, if_depth: int) -> Optional[Any]:
        """Build If(term, then, else) with per-branch cost capped at branch_budget."""
        pred_cost = cost(term.expr)
        remaining = self.config.max_cost - 2 - pred_cost
        true_cases = [c for c, s in zip(self.problem.cases, term.sig) if s == "true"]
        false_cases = [c for c, s in zip(self.problem.cases, term.sig) if s == "false"]
        self.stats.bump("conditional")
        then_e = self._branch(true_cases, min(branch_budget, remaining - 1), if_depth)
        if then_e is None:
            return None
        else_e = self._branch(false_cases, min(branch_budget, remaining - cost(then_e)), if_depth)
        if else_e is None:
            return None
        e = If(term.expr, then_e, else_e)
        return e if cost(e) <= self.config.max_cost else None

    def _branch(self, cases: list, max_cost: int, if_depth: int) -> Optional[Any]:
        if max_cost < 1:
            return None
        sub = SynthesisProblem(
            cases=cases,
            arity=self.problem.arity,
            constants_pool=self.problem.constants_pool,
            imports=self.problem.imports,
        )
        cfg = SearchConfig(
            max_cost=max_cost,
            max_candidates=self.config.max_candidates,
            timeout_ms=self.config.timeout_ms,
            knowledge_source_order=self.config.knowledge_source_order,
        )
        inner = _Search(sub, cfg, self.stats, self.deadline)
        return inner.run(if_depth - 1)

    # -- driver -----------------------------------------------------------

    def run(self, if_depth: int = _MAX_IF_DEPTH) -> Optional[Any]:
        order = self.config.knowledge_source_order
        for source in order:
            if source == "constant":
                e = self.ks_constant()
            elif source == "identity":
                e = self.ks_identity()
            elif source == "single_primitive":
                e = self.ks_single_primitive()
            elif source == "enumerative":
                # the conditional splitter is interleaved per cost tier
                e = self.enumerate_tiers(if_depth if "conditional" in order else 0)
            elif source == "conditional":
                continue
            else:
                raise ValueError(f"unknown knowledge source {source!r}")
            if e is not None:
                return e
        return None


def _compositions(total: int, parts: int):
    """All orderings of `parts` positive integers summing to `total`."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def replays(e: Any, problem: SynthesisProblem) -> bool:
    for inputs, out in problem.cases:
        try:
            got = eval_expr(e, inputs, problem.imports)
        except EvalError:
            return False
        if not deep_equal(got, out):
            return False
    return True


def synthesize(problem: SynthesisProblem, config: Optional[SearchConfig] = None) -> SynthesisResult:
    """Search for the minimum-cost expression satisfying every case.

    Soundness is checked before returning: a result always replays all cases.
    """
    config = config or SearchConfig()
    stats = Statistics()
    start = time.monotonic()
    deadline = start + config.timeout_ms / 1000.0
    search = _Search(problem, config, stats, deadline)
    try:
        e = search.run()
    except _Exhausted as ex:
        stats.reason = ex.reason
        stats.elapsed_ms = (time.monotonic() - start) * 1000
        return SynthesisResult(None, stats)
    stats.elapsed_ms = (time.monotonic() - start) * 1000
    if e is None:
        stats.reason = "search space exhausted"
        return SynthesisResult(None, stats)
    if not replays(e, problem):
        raise AssertionError(
            f"unsound synthesis result: {canonical_serialization(e)}"
        )
    return SynthesisResult(e, stats)
