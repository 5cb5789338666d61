"""HTTP JSON API over the session store (consumed by the companion UI).

Stateless between requests except for the session directory; per-session
mutations are serialized by a single-writer lock and concurrent writers get
409. Errors are ``{code, message, detail}`` with 400/404/409.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from .errors import ProcauseError, SessionLockedError, SessionNotFoundError, StageOrderError
from .jsonio import canonical_bytes
from .session import SessionStore, default_session_root

_STATUS = {
    SessionNotFoundError: 404,
    StageOrderError: 409,
    SessionLockedError: 409,
}


class ScopeModel(BaseModel):
    attribute: str
    values: list


class FeatureModel(BaseModel):
    attribute: str
    scope: Optional[ScopeModel] = None

    def as_dict(self) -> dict:
        return {
            "attribute": self.attribute,
            "scope": None if self.scope is None else self.scope.model_dump(),
        }


class RecommendRequest(BaseModel):
    alpha: float
    bins: int = 10
    undesirable: dict
    classFeature: FeatureModel
    candidates: Optional[list[FeatureModel]] = None


class PlanRequest(BaseModel):
    features: list[FeatureModel]
    classFeature: FeatureModel
    dropPolicy: Union[str, float] = "row"


class KnowledgeModel(BaseModel):
    required: list[tuple[str, str]] = Field(default_factory=list)
    forbidden: list[tuple[str, str]] = Field(default_factory=list)


class DiscoverRequest(BaseModel):
    knowledge: KnowledgeModel = Field(default_factory=KnowledgeModel)
    test: str = "fisher-z"
    pCutoff: float = 0.05
    maxConditioningSize: Optional[int] = None
    discretizeLevels: int = 5


class OrientRequest(BaseModel):
    orientations: list[tuple[str, str]]


class FitRequest(BaseModel):
    mode: Optional[str] = None


def _canonical(payload, status_code: int = 200) -> Response:
    return Response(
        content=canonical_bytes(payload),
        media_type="application/json",
        status_code=status_code,
    )


def create_app(sessions_root: str | None = None) -> FastAPI:
    store = SessionStore(sessions_root or default_session_root())
    app = FastAPI(title="procause", version="0.1.0")

    @app.exception_handler(ProcauseError)
    async def domain_error(_request: Request, err: ProcauseError):
        status = next(
            (code for cls, code in _STATUS.items() if isinstance(err, cls)), 400
        )
        return JSONResponse(err.to_dict(), status_code=status)

    @app.exception_handler(RequestValidationError)
    async def validation_error(_request: Request, err: RequestValidationError):
        return JSONResponse(
            {"code": "bad-request", "message": "invalid request body", "detail": err.errors()},
            status_code=400,
        )

    @app.get("/sessions")
    def list_sessions():
        sessions = []
        for sid in store.list_ids():
            sessions.append({"id": sid, "stages": store.open(sid).stage_names()})
        return _canonical({"sessions": sessions})

    @app.get("/sessions/{sid}")
    def session_state(sid: str):
        return _canonical(store.open(sid).state())

    @app.post("/sessions/{sid}/recommend")
    def recommend(sid: str, body: RecommendRequest):
        params = {
            "alpha": body.alpha,
            "bins": body.bins,
            "undesirable": body.undesirable,
            "classFeature": body.classFeature.as_dict(),
        }
        if body.candidates:
            params["candidates"] = [f.as_dict() for f in body.candidates]
        return _canonical({"recommendations": store.open(sid).recommend(params)})

    @app.post("/sessions/{sid}/plan")
    def set_plan(sid: str, body: PlanRequest):
        params = {
            "plan": {
                "features": [f.as_dict() for f in body.features],
                "classFeature": body.classFeature.as_dict(),
            },
            "dropPolicy": body.dropPolicy,
        }
        table = store.open(sid).set_plan(params)
        return _canonical({"plan": table.plan.to_dict(), "table": table.to_dict()})

    @app.post("/sessions/{sid}/discover")
    def discover(sid: str, body: DiscoverRequest):
        params = {
            "knowledge": body.knowledge.model_dump(),
            "test": body.test,
            "pCutoff": body.pCutoff,
            "maxConditioningSize": body.maxConditioningSize,
            "discretizeLevels": body.discretizeLevels,
        }
        pag = store.open(sid).discover(params)
        return _canonical({"pag": pag.to_dict(), "text": pag.to_text()})

    @app.post("/sessions/{sid}/orient")
    def orient(sid: str, body: OrientRequest):
        dag = store.open(sid).orient(
            {"orientations": [list(p) for p in body.orientations]}
        )
        return _canonical({"dag": dag.to_dict()})

    @app.post("/sessions/{sid}/fit")
    def fit(sid: str, body: Optional[FitRequest] = None):
        sem = store.open(sid).fit({"mode": body.mode if body else None})
        return _canonical({"sem": sem.to_dict(), "text": sem.to_text()})

    @app.get("/sessions/{sid}/intervene")
    def intervene(
        sid: str,
        on: str = Query(...),
        target: str = Query(...),
        value: Optional[str] = None,
        method: Optional[str] = None,
        samples: int = 10_000,
        seed: int = 0,
    ):
        session = store.open(sid)
        sem = session.sem()
        from .cli import _parse_value, resolve_label

        params = {
            "on": resolve_label(sem.structure.vertices, on),
            "target": resolve_label(sem.structure.vertices, target),
            "value": _parse_value(value) if value is not None else None,
            "method": method,
            "samples": samples,
            "seed": seed,
        }
        return _canonical(session.intervene(params))

    ui_dist = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if ui_dist.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dist), html=True), name="ui")

    return app


app = create_app()
