"""HTTP + JSON API over the store and compiler.

Endpoints:
    GET    /programs                  list
    POST   /programs                  create (body: {document})
    GET    /programs/{id}             fetch
    PUT    /programs/{id}             update (body: {document, revision})
    DELETE /programs/{id}             delete (409 when another program uses it)
    POST   /programs/{id}/compile     compile, streamed as server-sent events
    POST   /programs/{id}/run         run (body: {inputs: [...]})
    GET    /programs/{id}/uses        import choices with checkbox state
    PUT    /programs/{id}/uses        set imports (compiled programs only)
    GET    /programs/{id}/export      textual form

All values on the wire are plain JSON; documents use the tagged file schema.
"""

from __future__ import annotations

import json
import queue
import threading
from typing import Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import PlainTextResponse, StreamingResponse

from . import document as doc
from .compiler import (
    CompileOutcome,
    RunError,
    compile_document,
    run_pipeline,
)
from .diagnostics import errors
from .store import InUse, NotFound, RevisionConflict, Store, StoreError
from .synth import SearchConfig
from .text import print_program
from .values import ParseError, ShapeError, decode_value, encode_value


def _label_map(d: doc.Document) -> dict:
    """identity -> label text; a label annotates the nearest preceding
    non-annotation element in its column."""
    labels: dict = {}
    for case in d.cases:
        for col in case.columns:
            last = None
            for el in col.elements:
                if el.shape == "label" and last is not None:
                    labels.setdefault(last.identity, el.value)
                elif el.shape not in doc.ANNOTATION_SHAPES:
                    last = el
    return labels


def _identity_shapes(d: doc.Document) -> dict:
    return {
        el.identity: el.shape
        for _, _, _, el in doc.iter_elements(d)
        if el.shape not in doc.ANNOTATION_SHAPES
    }


def create_app(store: Store, config: Optional[SearchConfig] = None) -> FastAPI:
    app = FastAPI(title="zoea-workbench")
    search_config = config or SearchConfig()
    compiling: set = set()
    lock = threading.Lock()

    def summary(sp) -> dict:
        return {
            "id": sp.id,
            "name": sp.document.name,
            "revision": sp.revision,
            "compiled": sp.compiled,
        }

    def get_or_404(program_id: str):
        try:
            return store.get(program_id)
        except NotFound as e:
            raise HTTPException(404, str(e))

    @app.get("/programs")
    def api_list():
        return [summary(sp) for sp in store.list()]

    @app.post("/programs", status_code=201)
    def api_create(body: dict):
        try:
            d = doc.from_dict(body["document"])
            sp = store.create(d)
        except (KeyError, doc.DocumentError, ParseError) as e:
            raise HTTPException(422, f"bad document: {e}")
        except StoreError as e:
            raise HTTPException(409, str(e))
        return summary(sp)

    @app.get("/programs/{program_id}")
    def api_get(program_id: str):
        sp = get_or_404(program_id)
        out = summary(sp)
        out["document"] = doc.to_dict(sp.document)
        if sp.pipeline is not None:
            out["pipeline"] = sp.pipeline.to_dict()
            out["pipeline_revision"] = sp.pipeline_revision
        return out

    @app.put("/programs/{program_id}")
    def api_put(program_id: str, body: dict):
        try:
            d = doc.from_dict(body["document"])
            sp = store.put(program_id, d, int(body["revision"]))
        except RevisionConflict as e:
            raise HTTPException(409, f"RevisionConflict: {e}")
        except NotFound as e:
            raise HTTPException(404, str(e))
        except (KeyError, doc.DocumentError, ParseError) as e:
            raise HTTPException(422, f"bad document: {e}")
        return summary(sp)

    @app.delete("/programs/{program_id}", status_code=204)
    def api_delete(program_id: str):
        try:
            store.delete(program_id)
        except NotFound as e:
            raise HTTPException(404, str(e))
        except InUse as e:
            raise HTTPException(409, f"InUse: {e}")

    @app.post("/programs/{program_id}/compile")
    def api_compile(program_id: str, request: Request):
        sp = get_or_404(program_id)
        diags = errors(doc.validate_document(sp.document))
        if diags:
            raise HTTPException(422, f"ValidationFailed: {'; '.join(str(d) for d in diags)}")
        with lock:
            if program_id in compiling:
                raise HTTPException(409, "AlreadyCompiling")
            compiling.add(program_id)

        try:
            imports = store.resolve_imports(sp.document.uses)
        except StoreError as e:
            with lock:
                compiling.discard(program_id)
            raise HTTPException(409, str(e))

        q: queue.Queue = queue.Queue()
        done = object()

        def work():
            try:
                outcome = compile_document(
                    sp.document, search_config, sink=q.put, imports=imports
                )
                if outcome.success:
                    store.set_pipeline(program_id, outcome.pipeline, sp.revision)
            except Exception as e:  # surfaced as a terminal error event
                q.put({"result": "failure", "failed": [], "error": str(e)})
            finally:
                q.put(done)

        threading.Thread(target=work, daemon=True).start()

        def stream():
            try:
                while True:
                    item = q.get()
                    if item is done:
                        break
                    yield f"data: {json.dumps(item)}\n\n"
            finally:
                with lock:
                    compiling.discard(program_id)

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.post("/programs/{program_id}/run")
    def api_run(program_id: str, body: dict):
        sp = get_or_404(program_id)
        if sp.pipeline is None:
            raise HTTPException(409, "NotCompiled")
        if sp.pipeline_revision != sp.revision:
            raise HTTPException(409, "StalePipeline: document changed since last compile")
        shapes = _identity_shapes(sp.document)
        raw_inputs = body.get("inputs")
        if not isinstance(raw_inputs, list):
            raise HTTPException(422, "body must carry an inputs list")
        if len(raw_inputs) != len(sp.pipeline.input_identities):
            raise HTTPException(
                422,
                f"expected {len(sp.pipeline.input_identities)} inputs, got {len(raw_inputs)}",
            )
        inputs = []
        for ident, raw in zip(sp.pipeline.input_identities, raw_inputs):
            try:
                v = decode_value(raw) if isinstance(raw, dict) and "t" in raw else raw
                if shapes.get(ident) == "table" and isinstance(v, list):
                    from .values import Table

                    v = Table(v)
                inputs.append(v)
            except (ParseError, ShapeError) as e:
                raise HTTPException(422, f"bad input for {ident}: {e}")
        try:
            imports = store.resolve_imports(sp.pipeline.uses)
            outputs = run_pipeline(sp.pipeline, inputs, sp.document, imports)
        except RunError as e:
            raise HTTPException(422, f"RunError: {e}")
        except StoreError as e:
            raise HTTPException(409, str(e))
        labels = _label_map(sp.document)
        return {
            "outputs": [encode_value(v) for v in outputs],
            "outputs_json": json.loads("[" + ",".join(_json_or_null(v) for v in outputs) + "]"),
            "input_labels": [
                labels.get(i, i) for i in sp.pipeline.input_identities
            ],
            "output_labels": [
                labels.get(i, i) for i in sp.pipeline.output_identities
            ],
        }

    @app.get("/programs/{program_id}/uses")
    def api_uses(program_id: str):
        sp = get_or_404(program_id)
        out = []
        for other in store.list():
            if other.id == program_id:
                continue
            out.append(
                {
                    "program": other.id,
                    "compiled": other.compiled,
                    "selected": other.id in sp.document.uses,
                }
            )
        return out

    @app.put("/programs/{program_id}/uses")
    def api_set_uses(program_id: str, body: dict):
        sp = get_or_404(program_id)
        names = body.get("names", [])
        if program_id in names:
            raise HTTPException(409, "CycleDetected: a program cannot use itself")
        for name in names:
            try:
                other = store.get(name)
            except NotFound:
                raise HTTPException(404, f"no program {name!r}")
            if not other.compiled:
                raise HTTPException(409, f"NotCompiled: {name}")
        cycle = store.uses_cycle(program_id, names)
        if cycle:
            raise HTTPException(409, f"CycleDetected: {' -> '.join(cycle)}")
        sp = store.set_uses(program_id, names)
        return summary(sp)

    @app.get("/programs/{program_id}/export", response_class=PlainTextResponse)
    def api_export(program_id: str):
        sp = get_or_404(program_id)
        try:
            return print_program(doc.export_to_zoea(sp.document))
        except doc.DocumentError as e:
            raise HTTPException(422, f"ValidationFailed: {e}")

    return app


def _json_or_null(v) -> str:
    from .values import EmptyPresent, to_json

    try:
        return to_json(v)
    except EmptyPresent:
        return "null"
