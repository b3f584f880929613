import pytest

from zoea.compiler import (
    Pipeline,
    ProtocolError,
    RunError,
    build_synthetic_cases,
    check_event_stream,
    compile_document,
    compile_zoea_text,
    pipeline_as_import,
    run_pipeline,
)
from zoea.document import (
    add_case,
    add_dependency,
    add_element,
    new_document,
    set_runtime_binding,
    set_value,
)
from zoea.synth import SearchConfig
from zoea.text import parse
from zoea.values import Empty, deep_equal

from conftest import DAYS, LISTING1, WEEKDAY_CASES, build_weekday_document


def contradictory_doc():
    """Same input expected to produce two different outputs: unsolvable."""
    d = new_document("bad", case_id=1)
    d, _ = add_element(d, 1, 1, "scalar", "x")
    d, _ = add_element(d, 1, 2, "scalar", "one")
    d = add_case(d, 2)
    first = d.cases[0]
    for coli, col in enumerate(first.columns):
        for el in col.elements:
            d, _ = add_element(d, 2, coli, "scalar", el.value, identity=el.identity)
    d = set_value(d, d.cases[1].columns[2].elements[0].id, "two")
    return d


class TestSyntheticCases:
    def test_weekday(self):
        d = build_weekday_document()
        synth = build_synthetic_cases(d)
        assert len(synth) == 1
        sc = synth[0]
        # sources fall back to all earlier identities: data list + input
        assert len(sc.sources) == 1  # user drew input -> output
        assert len(sc.rows) == 4
        for (srcs, out), (inp, want) in zip(sc.rows, WEEKDAY_CASES):
            assert srcs == [inp]
            assert out == want

    def test_fallback_sources_without_dependencies(self):
        d = new_document("f", case_id=1, derive_columns=1)
        d, _ = add_element(d, 1, 0, "list", [1, 2])
        d, _ = add_element(d, 1, 1, "scalar", "a")
        d, _ = add_element(d, 1, 2, "scalar", "A")
        d, _ = add_element(d, 1, 3, "scalar", "A!")
        synth = build_synthetic_cases(d)
        by_target = {sc.target: sc for sc in synth}
        derive = d.cases[0].columns[2].elements[0].identity
        out = d.cases[0].columns[3].elements[0].identity
        # derives see everything to their left; output sees those plus derive
        assert len(by_target[derive].sources) == 2
        assert len(by_target[out].sources) == 3

    def test_rows_skip_empty_targets(self):
        d = new_document("s", case_id=1)
        d, e_in = add_element(d, 1, 1, "scalar", 1)
        d, e_out = add_element(d, 1, 2, "scalar", 2)
        d = add_case(d, 2)
        d, _ = add_element(
            d, 2, 1, "scalar", 5, identity=d.cases[0].columns[1].elements[0].identity
        )
        d, _ = add_element(
            d,
            2,
            2,
            "scalar",
            Empty("scalar"),
            identity=d.cases[0].columns[2].elements[0].identity,
        )
        (sc,) = build_synthetic_cases(d)
        assert len(sc.rows) == 1


class TestCompileDocument:
    def test_weekday_success(self):
        out = compile_document(build_weekday_document())
        assert out.success
        assert out.failed == []
        check_event_stream(out.events)
        frag = next(iter(out.pipeline.fragments.values()))
        assert "member" in frag and "lowercase" in frag

    def test_failure_propagates_with_zero_search(self):
        d = new_document("chain", case_id=1, derive_columns=1)
        d, e_in = add_element(d, 1, 1, "scalar", "x")
        d, e_d = add_element(d, 1, 2, "scalar", "one")
        d, e_out = add_element(d, 1, 3, "scalar", "one!")
        d = add_case(d, 2)
        ids = {el.id: el.identity for col in d.cases[0].columns for el in col.elements}
        d, _ = add_element(d, 2, 1, "scalar", "x", identity=ids[e_in])
        d, _ = add_element(d, 2, 2, "scalar", "two", identity=ids[e_d])
        d, _ = add_element(d, 2, 3, "scalar", "two!", identity=ids[e_out])
        d = add_dependency(d, 1, [e_in], e_d)
        d = add_dependency(
            d, 1, [d.cases[0].columns[2].elements[0].id], e_out
        )
        out = compile_document(d, SearchConfig(max_cost=4, timeout_ms=2000))
        assert not out.success
        check_event_stream(out.events)
        derive_id = ids[e_d]
        out_id = ids[e_out]
        assert derive_id in out.failed and out_id in out.failed
        # the dependent output must not have been searched at all
        assert out.stats[out_id].candidates_expanded == 0
        assert out.stats[out_id].reason == "upstream failure"

    def test_events_order(self):
        out = compile_document(build_weekday_document())
        terminals = [e for e in out.events if "result" in e]
        assert terminals == [out.events[-1]]
        assert out.events[0]["state"] == "pending"


class TestRunPipeline:
    def test_weekday_generalizes(self):
        d = build_weekday_document()
        out = compile_document(d)
        for probe, want in [
            ("Friday", "weekday"),
            ("SUNDAY", "weekday"),
            ("banana", "unrecognised"),
            ("", "unrecognised"),
        ]:
            assert run_pipeline(out.pipeline, [probe], d=d) == [want]

    def test_arity_check(self):
        d = build_weekday_document()
        out = compile_document(d)
        with pytest.raises(RunError):
            run_pipeline(out.pipeline, ["a", "b"], d=d)

    def test_data_resolution_order(self):
        # wire the data list in as an explicit source so it stays a runtime
        # input instead of being baked into the fragment as a constant
        from conftest import element_in

        d = build_weekday_document()
        for case in d.cases:
            data_el = case.columns[0].elements[0].id
            out_el = case.columns[2].elements[0].id
            dep = case.dependencies[0]
            d = add_dependency(d, case.id, list(dep.sources) + [data_el], out_el)
        out = compile_document(d)
        assert out.success
        data_identity = out.pipeline.data_identities[0]
        # override wins over everything
        assert run_pipeline(
            out.pipeline,
            ["thursday"],
            d=d,
            data_overrides={data_identity: []},
        ) == ["unrecognised"]
        # runtime binding wins over the test value
        bound = set_runtime_binding(d, data_identity, [])
        assert run_pipeline(out.pipeline, ["thursday"], d=bound) == ["unrecognised"]
        # document test value is the default
        assert run_pipeline(out.pipeline, ["thursday"], d=d) == ["weekday"]
        # with no document at all, pipeline defaults apply
        assert run_pipeline(out.pipeline, ["thursday"]) == ["weekday"]


class TestPipelineSerialization:
    def test_round_trip(self):
        out = compile_document(build_weekday_document())
        p = out.pipeline
        again = Pipeline.from_dict(p.to_dict())
        assert again.to_dict() == p.to_dict()
        assert run_pipeline(again, ["Friday"]) == ["weekday"]


class TestCompileText:
    def test_listing1(self):
        out = compile_zoea_text(parse(LISTING1))
        assert out.success
        for inp, want in WEEKDAY_CASES:
            assert run_pipeline(out.pipeline, [inp]) == [want]

    def test_derive_chain(self):
        src = (
            "program: len_plus_one case: 1 input: abc derive: 3 output: 4"
            " case: 2 input: hello derive: 5 output: 6"
        )
        out = compile_zoea_text(parse(src), SearchConfig(timeout_ms=5000))
        assert out.success
        assert out.pipeline.fragments["step1"] == "(app str_length (in 0))"
        assert run_pipeline(out.pipeline, ["window"]) == [7]

    def test_failure_reported(self):
        src = "program: bad case: 1 input: x output: one case: 2 input: x output: two"
        out = compile_zoea_text(parse(src), SearchConfig(max_cost=4, timeout_ms=2000))
        assert not out.success
        assert out.failed


class TestImportsAcrossPrograms:
    def test_pipeline_as_import(self):
        twice = compile_zoea_text(
            parse("program: twice case: 1 input: ab output: abab case: 2 input: x output: xx")
        )
        assert twice.success
        imp = pipeline_as_import("twice", twice.pipeline)
        src = (
            "program: shout use: twice"
            " case: 1 input: hey output: HEYHEY case: 2 input: ok output: OKOK"
        )
        out = compile_zoea_text(parse(src), imports={"twice": imp})
        assert out.success
        assert run_pipeline(out.pipeline, ["yes"], imports={"twice": imp}) == ["YESYES"]


class TestProtocol:
    def test_rejects_illegal_transition(self):
        events = [
            {"event": "state", "identity": "i1", "state": "pending"},
            {"event": "state", "identity": "i1", "state": "solved"},  # skips active
            {"event": "terminal", "result": "failure", "failed": ["i1"]},
        ]
        with pytest.raises(ProtocolError):
            check_event_stream(events)

    def test_rejects_missing_terminal(self):
        events = [
            {"event": "state", "identity": "i1", "state": "pending"},
            {"event": "state", "identity": "i1", "state": "active"},
            {"event": "state", "identity": "i1", "state": "solved"},
        ]
        with pytest.raises(ProtocolError):
            check_event_stream(events)

    def test_retry_is_legal(self):
        events = [
            {"event": "state", "identity": "i1", "state": "pending"},
            {"event": "state", "identity": "i1", "state": "active"},
            {"event": "state", "identity": "i1", "state": "failed"},
            {"event": "state", "identity": "i1", "state": "active"},
            {"event": "state", "identity": "i1", "state": "solved"},
            {"event": "terminal", "result": "success", "failed": []},
        ]
        check_event_stream(events)

    def test_rejects_double_terminal(self):
        events = [
            {"event": "state", "identity": "i1", "state": "pending"},
            {"event": "state", "identity": "i1", "state": "active"},
            {"event": "state", "identity": "i1", "state": "solved"},
            {"event": "terminal", "result": "success", "failed": []},
            {"event": "terminal", "result": "success", "failed": []},
        ]
        with pytest.raises(ProtocolError):
            check_event_stream(events)
