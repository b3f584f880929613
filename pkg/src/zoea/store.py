"""File-backed program store.

One JSON file per program, named by program id (the document name), plus an
index file. All writes go through write-temp-then-rename so a crash at any
point leaves either the old or the new file, never a torn one. The directory
is the source of truth; the index is rebuilt from it on open.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import document as doc
from .compiler import Pipeline
from .values import canonical_json

_ID_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*$")


class StoreError(Exception):
    pass


class NotFound(StoreError):
    pass


class RevisionConflict(StoreError):
    pass


class InUse(StoreError):
    def __init__(self, users: list):
        super().__init__(f"in use by: {', '.join(users)}")
        self.users = users


class BadProgramId(StoreError):
    pass


@dataclass
class StoredProgram:
    id: str
    document: doc.Document
    revision: int
    pipeline: Optional[Pipeline] = None
    pipeline_revision: Optional[int] = None
    created: float = 0.0
    updated: float = 0.0

    @property
    def compiled(self) -> bool:
        return self.pipeline is not None and self.pipeline_revision == self.revision


class Store:
    def __init__(self, directory: str):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self._rebuild_index()

    # -- paths -----------------------------------------------------------

    def _path(self, program_id: str) -> Path:
        if not _ID_RE.match(program_id):
            raise BadProgramId(f"bad program id {program_id!r}")
        return self.dir / f"{program_id}.json"

    @property
    def _index_path(self) -> Path:
        return self.dir / "index.json"

    def _atomic_write(self, path: Path, text: str) -> None:
        fd, tmp = tempfile.mkstemp(dir=self.dir, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                f.write(text)
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    def _rebuild_index(self) -> None:
        entries = {}
        for p in sorted(self.dir.glob("*.json")):
            if p.name == "index.json" or p.name.startswith(".tmp-"):
                continue
            try:
                rec = json.loads(p.read_text(encoding="utf-8"))
                entries[rec["id"]] = {
                    "name": rec["document"]["name"],
                    "revision": rec["revision"],
                    "compiled": rec.get("pipeline") is not None
                    and rec.get("pipeline_revision") == rec["revision"],
                }
            except (json.JSONDecodeError, KeyError):
                continue  # torn or foreign file: ignore, never trust
        self._atomic_write(self._index_path, canonical_json({"programs": entries}))

    # -- serialization ----------------------------------------------------

    def _dump(self, sp: StoredProgram) -> str:
        return canonical_json(
            {
                "id": sp.id,
                "revision": sp.revision,
                "document": doc.to_dict(sp.document),
                "pipeline": sp.pipeline.to_dict() if sp.pipeline else None,
                "pipeline_revision": sp.pipeline_revision,
                "created": sp.created,
                "updated": sp.updated,
            }
        )

    def _load(self, path: Path) -> StoredProgram:
        rec = json.loads(path.read_text(encoding="utf-8"))
        return StoredProgram(
            id=rec["id"],
            document=doc.from_dict(rec["document"]),
            revision=rec["revision"],
            pipeline=Pipeline.from_dict(rec["pipeline"]) if rec.get("pipeline") else None,
            pipeline_revision=rec.get("pipeline_revision"),
            created=rec.get("created", 0.0),
            updated=rec.get("updated", 0.0),
        )

    # -- CRUD --------------------------------------------------------------

    def list(self) -> list:
        out = []
        for p in sorted(self.dir.glob("*.json")):
            if p.name == "index.json" or p.name.startswith(".tmp-"):
                continue
            try:
                sp = self._load(p)
            except (json.JSONDecodeError, KeyError, doc.DocumentError):
                continue
            out.append(sp)
        return out

    def exists(self, program_id: str) -> bool:
        return self._path(program_id).exists()

    def create(self, d: doc.Document) -> StoredProgram:
        program_id = d.name
        path = self._path(program_id)
        if path.exists():
            raise StoreError(f"program {program_id!r} already exists")
        now = time.time()
        sp = StoredProgram(id=program_id, document=d, revision=1, created=now, updated=now)
        self._atomic_write(path, self._dump(sp))
        self._rebuild_index()
        return sp

    def get(self, program_id: str) -> StoredProgram:
        path = self._path(program_id)
        if not path.exists():
            raise NotFound(f"no program {program_id!r}")
        return self._load(path)

    def put(self, program_id: str, d: doc.Document, revision: int) -> StoredProgram:
        sp = self.get(program_id)
        if revision != sp.revision:
            raise RevisionConflict(f"revision {revision} != current {sp.revision}")
        sp.document = d
        sp.revision += 1
        sp.updated = time.time()
        self._atomic_write(self._path(program_id), self._dump(sp))
        self._rebuild_index()
        return sp

    def delete(self, program_id: str) -> None:
        path = self._path(program_id)
        if not path.exists():
            raise NotFound(f"no program {program_id!r}")
        users = [sp.id for sp in self.list() if program_id in sp.document.uses]
        if users:
            raise InUse(users)
        path.unlink()
        self._rebuild_index()

    def set_pipeline(self, program_id: str, pipeline: Pipeline, revision: int) -> StoredProgram:
        sp = self.get(program_id)
        if revision != sp.revision:
            raise RevisionConflict(f"revision {revision} != current {sp.revision}")
        sp.pipeline = pipeline
        sp.pipeline_revision = revision
        sp.updated = time.time()
        self._atomic_write(self._path(program_id), self._dump(sp))
        self._rebuild_index()
        return sp

    def set_uses(self, program_id: str, names: list) -> StoredProgram:
        sp = self.get(program_id)
        sp.document.uses = list(names)
        sp.revision += 1
        sp.updated = time.time()
        self._atomic_write(self._path(program_id), self._dump(sp))
        self._rebuild_index()
        return sp

    # -- composition -------------------------------------------------------

    def uses_cycle(self, program_id: str, names: list) -> Optional[list]:
        """Path of a cycle that adding `names` as uses of program_id would
        create, or None."""
        graph = {sp.id: list(sp.document.uses) for sp in self.list()}
        graph[program_id] = list(names)

        path: list = []
        visiting: set = set()
        done: set = set()

        def visit(node: str) -> Optional[list]:
            if node in done:
                return None
            if node in visiting:
                return path[path.index(node) :] + [node]
            visiting.add(node)
            path.append(node)
            for nxt in graph.get(node, []):
                found = visit(nxt)
                if found:
                    return found
            path.pop()
            visiting.discard(node)
            done.add(node)
            return None

        return visit(program_id)

    def resolve_imports(self, names: list, _seen: Optional[set] = None) -> dict:
        """Build ImportedProgram callables for the named compiled programs,
        recursively resolving their own uses."""
        from .compiler import pipeline_as_import

        _seen = _seen or set()
        out: dict = {}
        for name in names:
            if name in _seen:
                raise StoreError(f"cyclic uses through {name!r}")
            sp = self.get(name)
            if not sp.compiled:
                raise StoreError(f"program {name!r} is not compiled")
            inner = self.resolve_imports(sp.pipeline.uses, _seen | {name})
            out[name] = pipeline_as_import(name, sp.pipeline, inner)
        return out
