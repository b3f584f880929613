import json
import os
import random

import pytest

from zoea.compiler import compile_document, run_pipeline
from zoea.document import new_document, set_value
from zoea.store import (
    BadProgramId,
    InUse,
    NotFound,
    RevisionConflict,
    Store,
)

from conftest import build_weekday_document, element_in


@pytest.fixture
def store(tmp_path):
    return Store(tmp_path / "programs")


def _identity(d, element_id):
    from zoea.document import iter_elements

    return next(el.identity for _, _, _, el in iter_elements(d) if el.id == element_id)


class TestCrud:
    def test_create_get(self, store):
        sp = store.create(build_weekday_document())
        assert sp.id == "is_week_day"
        assert sp.revision == 1
        again = store.get("is_week_day")
        assert again.revision == 1
        assert again.document.name == "is_week_day"

    def test_put_bumps_revision(self, store):
        sp = store.create(build_weekday_document())
        d = set_value(sp.document, element_in(sp.document, 3, 1), "kiwi")
        sp2 = store.put(sp.id, d, sp.revision)
        assert sp2.revision == 2

    def test_stale_revision_rejected(self, store):
        sp = store.create(build_weekday_document())
        store.put(sp.id, sp.document, sp.revision)
        with pytest.raises(RevisionConflict):
            store.put(sp.id, sp.document, sp.revision)

    def test_missing_program(self, store):
        with pytest.raises(NotFound):
            store.get("nope")

    def test_bad_id(self, store):
        with pytest.raises(BadProgramId):
            store.get("../escape")

    def test_list(self, store):
        store.create(build_weekday_document())
        store.create(new_document("other"))
        ids = [sp.id for sp in store.list()]
        assert sorted(ids) == ["is_week_day", "other"]

    def test_delete(self, store):
        sp = store.create(build_weekday_document())
        store.delete(sp.id)
        with pytest.raises(NotFound):
            store.get(sp.id)


class TestPipelines:
    def test_compiled_requires_fresh_pipeline(self, store):
        d = build_weekday_document()
        sp = store.create(d)
        out = compile_document(d)
        sp = store.set_pipeline(sp.id, out.pipeline, sp.revision)
        assert sp.compiled
        # editing the document stales the pipeline
        d2 = set_value(sp.document, element_in(sp.document, 3, 1), "kiwi")
        sp = store.put(sp.id, d2, sp.revision)
        assert not sp.compiled

    def test_directory_is_source_of_truth(self, store, tmp_path):
        d = build_weekday_document()
        store.create(d)
        # a second store over the same directory sees the same programs
        other = Store(store.dir)
        assert other.get("is_week_day").revision == 1


class TestUses:
    def _compiled(self, store, name, uses=()):
        d = new_document(name)
        from zoea.document import add_case, add_element

        d, e_in = add_element(d, 1, 1, "scalar", "ab")
        d, e_out = add_element(d, 1, 2, "scalar", "AB")
        d = add_case(d, 2)
        d, _ = add_element(d, 2, 1, "scalar", "zz", identity=_identity(d, e_in))
        d, _ = add_element(d, 2, 2, "scalar", "ZZ", identity=_identity(d, e_out))
        sp = store.create(d)
        if uses:
            sp = store.set_uses(sp.id, list(uses))
        out = compile_document(sp.document, imports=store.resolve_imports(list(uses)))
        store.set_pipeline(sp.id, out.pipeline, sp.revision)
        return sp.id

    def test_delete_in_use_blocked(self, store):
        a = self._compiled(store, "a")
        b = self._compiled(store, "b", uses=[a])
        with pytest.raises(InUse) as exc:
            store.delete(a)
        assert b in exc.value.users

    def test_cycle_detected(self, store):
        a = self._compiled(store, "a")
        b = self._compiled(store, "b", uses=[a])
        cycle = store.uses_cycle(a, [b])
        assert cycle is not None
        assert set(cycle) >= {"a", "b"}

    def test_resolve_imports_recursive(self, store):
        a = self._compiled(store, "a")
        b = self._compiled(store, "b", uses=[a])
        imports = store.resolve_imports([b])
        assert set(imports) == {"b"}  # transitive uses live inside the callable
        assert imports["b"].fn(["xy"]) in (["XY"], "XY")


class TestCrashSafety:
    def test_100_injected_midwrite_failures(self, store, monkeypatch):
        """Kill the write at random points; no stored file may ever be torn."""
        import zoea.store as store_mod

        rng = random.Random(17)
        d = build_weekday_document()
        sp = store.create(d)
        real_replace = os.replace

        for i in range(100):
            mode = rng.choice(["replace", "write"])
            if mode == "replace":
                def boom(src, dst):
                    raise OSError("simulated crash before rename")

                monkeypatch.setattr(store_mod.os, "replace", boom)
            else:
                class TornFile:
                    def __init__(self, f):
                        self.f = f

                    def write(self, text):
                        self.f.write(text[: len(text) // 2])
                        raise OSError("simulated crash mid-write")

                    def __enter__(self):
                        return self

                    def __exit__(self, *exc):
                        self.f.close()
                        return False

                    def __getattr__(self, name):
                        return getattr(self.f, name)

                real_fdopen = os.fdopen

                def fdopen(fd, *a, **k):
                    return TornFile(real_fdopen(fd, *a, **k))

                monkeypatch.setattr(store_mod.os, "fdopen", fdopen)

            doc_edit = set_value(
                sp.document, element_in(sp.document, 3, 1), f"fruit{i}"
            )
            with pytest.raises(Exception):
                store.put(sp.id, doc_edit, sp.revision)
            monkeypatch.setattr(store_mod.os, "replace", real_replace)
            monkeypatch.undo()

            # a fresh store over the directory must load every file cleanly
            recovered = Store(store.dir)
            got = recovered.get(sp.id)
            assert got.revision == sp.revision
            assert got.document.cases[2].columns[1].elements[0].value == "banana"

        # every surviving file is intact JSON
        for p in store.dir.glob("*.json"):
            json.loads(p.read_text())

    def test_write_is_atomic_via_replace(self, store, tmp_path):
        sp = store.create(build_weekday_document())
        path = store.dir / f"{sp.id}.json"
        before = path.read_text()
        store.put(sp.id, sp.document, sp.revision)
        after = path.read_text()
        assert json.loads(before)["revision"] == 1
        assert json.loads(after)["revision"] == 2
