"""File-backed store for charts, models, and designer sessions.

Documents live as JSON files under a data directory. Chart and model ids
are content hashes of their canonical documents, so create is idempotent.
Sessions are keyed by a hash of their core fields (chart, desired groups,
weights, model) and carry created/updated timestamps. Writes go through a
process lock plus atomic file replace.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from datetime import datetime, timezone
from pathlib import Path

from ..chart import chart_from_dict, chart_to_dict
from ..model import load_model, save_model

SESSION_CORE_FIELDS = ("chart_id", "desired", "alpha", "threshold", "model_id")


def _canonical(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _content_id(doc) -> str:
    return hashlib.sha256(_canonical(doc).encode()).hexdigest()[:16]


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class FileStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._lock = threading.Lock()
        for sub in ("charts", "models", "sessions"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)

    # -- generic helpers ---------------------------------------------------

    def _path(self, kind: str, doc_id: str) -> Path:
        safe = "".join(ch for ch in doc_id if ch.isalnum() or ch in "-_")
        return self.root / kind / f"{safe}.json"

    def _write(self, kind: str, doc_id: str, doc) -> None:
        path = self._path(kind, doc_id)
        tmp = path.with_suffix(".tmp")
        with self._lock:
            tmp.write_text(_canonical(doc))
            os.replace(tmp, path)

    def _read(self, kind: str, doc_id: str):
        path = self._path(kind, doc_id)
        if not path.exists():
            return None
        return json.loads(path.read_text())

    def _delete(self, kind: str, doc_id: str) -> bool:
        path = self._path(kind, doc_id)
        with self._lock:
            if not path.exists():
                return False
            path.unlink()
            return True

    def _list(self, kind: str) -> list[str]:
        return sorted(p.stem for p in (self.root / kind).glob("*.json"))

    # -- charts --------------------------------------------------------------

    def put_chart(self, doc) -> str:
        # round-trip through the domain type canonicalizes and validates
        canonical = chart_to_dict(chart_from_dict(doc))
        doc_id = _content_id(canonical)
        self._write("charts", doc_id, canonical)
        return doc_id

    def get_chart(self, doc_id: str):
        return self._read("charts", doc_id)

    def list_charts(self) -> list[str]:
        return self._list("charts")

    def delete_chart(self, doc_id: str) -> bool:
        return self._delete("charts", doc_id)

    # -- models ----------------------------------------------------------------

    def put_model(self, doc, model_id: str | None = None) -> str:
        model = load_model(doc)  # validates
        canonical = save_model(model)
        doc_id = model_id or str(canonical.get("metadata", {}).get("model_id") or "")
        if not doc_id:
            doc_id = _content_id(canonical)
        self._write("models", doc_id, canonical)
        return doc_id

    def get_model_doc(self, doc_id: str):
        return self._read("models", doc_id)

    def list_models(self) -> list[str]:
        return self._list("models")

    def delete_model(self, doc_id: str) -> bool:
        return self._delete("models", doc_id)

    # -- sessions ----------------------------------------------------------------

    def put_session(self, core: dict) -> dict:
        """Create (or return the existing) session for these core fields."""
        assert set(core) == set(SESSION_CORE_FIELDS)
        doc_id = _content_id({k: core[k] for k in SESSION_CORE_FIELDS})
        existing = self._read("sessions", doc_id)
        if existing is not None:
            return existing
        now = _now()
        doc = {"id": doc_id, **core, "created": now, "updated": now}
        self._write("sessions", doc_id, doc)
        return doc

    def update_session(self, doc_id: str, fields: dict) -> dict | None:
        doc = self._read("sessions", doc_id)
        if doc is None:
            return None
        for key in fields:
            if key not in SESSION_CORE_FIELDS:
                raise ValueError(f"session field {key!r} is not updatable")
        doc.update(fields)
        doc["updated"] = _now()
        self._write("sessions", doc_id, doc)
        return doc

    def get_session(self, doc_id: str):
        return self._read("sessions", doc_id)

    def list_sessions(self) -> list[str]:
        return self._list("sessions")

    def delete_session(self, doc_id: str) -> bool:
        return self._delete("sessions", doc_id)

    def sessions_referencing_model(self, model_id: str) -> list[str]:
        out = []
        for sid in self.list_sessions():
            doc = self.get_session(sid)
            if doc and doc.get("model_id") == model_id:
                out.append(sid)
        return out
