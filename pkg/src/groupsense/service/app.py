"""HTTP surface over the engine for the designer UI and batch clients.

Every endpoint is a thin shim: it resolves documents from the file store,
calls the corresponding library function, and serializes its result. The
service adds no numeric behavior of its own, so HTTP responses are
deterministic and byte-identical for identical requests.

Error contract: 400 malformed request (schema), 404 unknown ids,
409 delete conflicts, 413 search budget exceeded, 422 domain invariant
violations (duplicate labels, bad groups, bad model documents).
"""

from __future__ import annotations

import json
import os
import queue
import threading
from pathlib import Path
from typing import Iterator

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel, Field

from ..chart import Chart, ChartError, chart_from_dict, chart_to_dict, generate_random_chart
from ..defaults import DEFAULT_MODEL_ID, default_model
from ..diagnose import DEFAULT_EPSILON_LINE, DEFAULT_THRESHOLD, diagnose
from ..geometry import Group, GroupError
from ..model import ModelError, load_model, save_model
from ..redesign import (
    DEFAULT_ALPHA,
    DEFAULT_BUDGET,
    BudgetExceeded,
    landscape,
    redesign,
)
from .store import FileStore

DATA_DIR_ENV = "GROUPSENSE_DATA_DIR"


class PlotDoc(BaseModel):
    width_px: float = 400.0
    height_px: float = 300.0
    pad_fraction: float = 0.05
    value_min: float = 0.0
    value_max: float = 100.0


class PointDoc(BaseModel):
    label: str
    value: float


class CategoryDoc(BaseModel):
    name: str
    members: list[str]


class ChartDoc(BaseModel):
    points: list[PointDoc]
    hierarchy: list[CategoryDoc] | None = None
    plot: PlotDoc | None = None


class DiagnoseRequest(BaseModel):
    chart: ChartDoc | None = None
    chart_id: str | None = None
    desired: list[list[str]] = Field(default_factory=list)
    model_id: str = DEFAULT_MODEL_ID
    threshold: float = DEFAULT_THRESHOLD
    epsilon_line: float = DEFAULT_EPSILON_LINE


class RedesignRequest(DiagnoseRequest):
    alpha: float = DEFAULT_ALPHA
    k: int = 5
    budget: int = DEFAULT_BUDGET
    include_landscape: bool = False


class SessionRequest(BaseModel):
    chart: ChartDoc | None = None
    chart_id: str | None = None
    desired: list[list[str]] = Field(default_factory=list)
    alpha: float = DEFAULT_ALPHA
    threshold: float = DEFAULT_THRESHOLD
    model_id: str = DEFAULT_MODEL_ID


class SessionUpdate(BaseModel):
    desired: list[list[str]] | None = None
    alpha: float | None = None
    threshold: float | None = None
    model_id: str | None = None


def resolve_data_dir(data_dir: str | Path | None = None) -> Path:
    if data_dir is not None:
        return Path(data_dir)
    return Path(os.environ.get(DATA_DIR_ENV, "groupsense-data"))


def create_app(data_dir: str | Path | None = None, ui_dir: str | Path | None = None) -> FastAPI:
    store = FileStore(resolve_data_dir(data_dir))
    if store.get_model_doc(DEFAULT_MODEL_ID) is None:
        store.put_model(save_model(default_model()), model_id=DEFAULT_MODEL_ID)

    app = FastAPI(title="groupsense", version="0.1.0")
    app.state.store = store

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.exception_handler(ChartError)
    async def chart_invariant(request: Request, exc: ChartError):
        return JSONResponse(status_code=422, content={"detail": str(exc), "path": "chart"})

    @app.exception_handler(GroupError)
    async def group_invariant(request: Request, exc: GroupError):
        return JSONResponse(status_code=422, content={"detail": str(exc), "path": "desired"})

    @app.exception_handler(ModelError)
    async def model_invariant(request: Request, exc: ModelError):
        return JSONResponse(
            status_code=422, content={"detail": str(exc), "path": "model", "code": exc.code}
        )

    @app.exception_handler(BudgetExceeded)
    async def too_large(request: Request, exc: BudgetExceeded):
        return JSONResponse(status_code=413, content={"detail": str(exc)})

    def get_chart(req) -> Chart:
        if (req.chart is None) == (req.chart_id is None):
            raise ChartError("provide exactly one of chart or chart_id")
        if req.chart is not None:
            return chart_from_dict(req.chart.model_dump())
        doc = store.get_chart(req.chart_id)
        if doc is None:
            raise HTTPException(404, f"unknown chart_id {req.chart_id!r}")
        return chart_from_dict(doc)

    def get_model(model_id: str):
        doc = store.get_model_doc(model_id)
        if doc is None:
            raise HTTPException(404, f"unknown model_id {model_id!r}")
        return load_model(doc)

    def get_desired(req) -> list[Group]:
        return [Group(members) for members in req.desired]

    # -- charts -----------------------------------------------------------

    @app.post("/api/charts")
    def create_chart(doc: ChartDoc):
        cid = store.put_chart(doc.model_dump())
        return {"id": cid, "chart": store.get_chart(cid)}

    @app.get("/api/charts")
    def list_charts():
        return {"charts": [{"id": cid, "chart": store.get_chart(cid)} for cid in store.list_charts()]}

    @app.get("/api/charts/{chart_id}")
    def read_chart(chart_id: str):
        doc = store.get_chart(chart_id)
        if doc is None:
            raise HTTPException(404, f"unknown chart_id {chart_id!r}")
        return {"id": chart_id, "chart": doc}

    @app.delete("/api/charts/{chart_id}")
    def remove_chart(chart_id: str):
        if not store.delete_chart(chart_id):
            raise HTTPException(404, f"unknown chart_id {chart_id!r}")
        return {"deleted": chart_id}

    @app.post("/api/charts/random")
    def random_chart(n: int = 6, seed: int = 0):
        if n < 2:
            raise ChartError("n must be >= 2")
        chart = generate_random_chart(n=n, seed=seed)
        cid = store.put_chart(chart_to_dict(chart))
        return {"id": cid, "chart": store.get_chart(cid)}

    # -- models -----------------------------------------------------------

    @app.get("/api/models")
    def list_models():
        out = []
        for mid in store.list_models():
            doc = store.get_model_doc(mid)
            out.append({"id": mid, "metadata": doc.get("metadata", {})})
        return {"models": out}

    @app.post("/api/models")
    def create_model(doc: dict):
        mid = store.put_model(doc)
        return {"id": mid}

    @app.get("/api/models/{model_id}")
    def read_model(model_id: str):
        doc = store.get_model_doc(model_id)
        if doc is None:
            raise HTTPException(404, f"unknown model_id {model_id!r}")
        return doc

    @app.delete("/api/models/{model_id}")
    def remove_model(model_id: str):
        refs = store.sessions_referencing_model(model_id)
        if refs:
            raise HTTPException(409, f"model {model_id!r} referenced by sessions {refs}")
        if not store.delete_model(model_id):
            raise HTTPException(404, f"unknown model_id {model_id!r}")
        return {"deleted": model_id}

    # -- engine -----------------------------------------------------------

    @app.post("/api/diagnose")
    def http_diagnose(req: DiagnoseRequest):
        chart = get_chart(req)
        report = diagnose(
            chart,
            get_desired(req),
            get_model(req.model_id),
            threshold=req.threshold,
            epsilon_line=req.epsilon_line,
        )
        return report.to_dict()

    def _redesign_payload(req: RedesignRequest) -> dict:
        chart = get_chart(req)
        desired = get_desired(req)
        model = get_model(req.model_id)
        result = redesign(
            chart, desired, model,
            alpha=req.alpha, k=req.k, threshold=req.threshold,
            epsilon_line=req.epsilon_line, budget=req.budget,
        )
        payload = {
            "examined": result.examined,
            "results": [p.to_dict() for p in result.results],
        }
        if req.include_landscape:
            payload["landscape"] = landscape(
                chart, desired, model,
                threshold=req.threshold, epsilon_line=req.epsilon_line, budget=req.budget,
            ).to_dict()
        return payload

    @app.post("/api/redesign")
    def http_redesign(req: RedesignRequest):
        return _redesign_payload(req)

    @app.post("/api/redesign/stream")
    def http_redesign_stream(req: RedesignRequest):
        chart = get_chart(req)
        desired = get_desired(req)
        model = get_model(req.model_id)

        def events() -> Iterator[str]:
            q: queue.Queue = queue.Queue()

            def progress(examined: int, total: int) -> None:
                q.put(("progress", {"examined": examined, "total": total}))

            def run() -> None:
                try:
                    result = redesign(
                        chart, desired, model,
                        alpha=req.alpha, k=req.k, threshold=req.threshold,
                        epsilon_line=req.epsilon_line, budget=req.budget,
                        progress=progress,
                    )
                    q.put(("result", {
                        "examined": result.examined,
                        "results": [p.to_dict() for p in result.results],
                    }))
                except Exception as exc:  # surfaced as an SSE error event
                    q.put(("error", {"detail": str(exc)}))

            threading.Thread(target=run, daemon=True).start()
            while True:
                kind, payload = q.get()
                yield f"event: {kind}\ndata: {json.dumps(payload)}\n\n"
                if kind in ("result", "error"):
                    return

        return StreamingResponse(events(), media_type="text/event-stream")

    @app.get("/api/redesign/landscape")
    def http_landscape(
        chart_id: str,
        desired: str = "[]",
        model_id: str = DEFAULT_MODEL_ID,
        threshold: float = DEFAULT_THRESHOLD,
        budget: int = DEFAULT_BUDGET,
    ):
        doc = store.get_chart(chart_id)
        if doc is None:
            raise HTTPException(404, f"unknown chart_id {chart_id!r}")
        try:
            desired_groups = [Group(members) for members in json.loads(desired)]
        except (json.JSONDecodeError, TypeError) as exc:
            raise HTTPException(400, f"desired must be a JSON list of label lists: {exc}")
        return landscape(
            chart_from_dict(doc), desired_groups, get_model(model_id),
            threshold=threshold, budget=budget,
        ).to_dict()

    # -- sessions -----------------------------------------------------------

    @app.get("/api/sessions")
    def list_sessions():
        return {"sessions": [store.get_session(sid) for sid in store.list_sessions()]}

    @app.post("/api/sessions")
    def create_session(req: SessionRequest):
        chart = get_chart(req)
        chart_id_ = store.put_chart(chart_to_dict(chart))
        for members in req.desired:
            Group(members).validate(chart)
        if store.get_model_doc(req.model_id) is None:
            raise HTTPException(404, f"unknown model_id {req.model_id!r}")
        return store.put_session(
            {
                "chart_id": chart_id_,
                "desired": sorted(sorted(set(m)) for m in req.desired),
                "alpha": req.alpha,
                "threshold": req.threshold,
                "model_id": req.model_id,
            }
        )

    @app.get("/api/sessions/{session_id}")
    def read_session(session_id: str):
        doc = store.get_session(session_id)
        if doc is None:
            raise HTTPException(404, f"unknown session_id {session_id!r}")
        return doc

    @app.put("/api/sessions/{session_id}")
    def update_session(session_id: str, req: SessionUpdate):
        fields = {k: v for k, v in req.model_dump().items() if v is not None}
        if "model_id" in fields and store.get_model_doc(fields["model_id"]) is None:
            raise HTTPException(404, f"unknown model_id {fields['model_id']!r}")
        doc = store.update_session(session_id, fields)
        if doc is None:
            raise HTTPException(404, f"unknown session_id {session_id!r}")
        return doc

    @app.delete("/api/sessions/{session_id}")
    def remove_session(session_id: str):
        if not store.delete_session(session_id):
            raise HTTPException(404, f"unknown session_id {session_id!r}")
        return {"deleted": session_id}

    # -- optional static designer UI ---------------------------------------

    ui_path = Path(ui_dir) if ui_dir is not None else Path("frontend")
    if (ui_path / "index.html").exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_path, html=True), name="ui")

    return app
