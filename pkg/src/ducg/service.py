"""HTTP service for the interactive diagnosis loop.

Endpoints::

    POST /models                           register a model file
    GET  /models                           list registered models
    POST /sessions                         {"model_id": ...}
    GET  /sessions/{id}
    POST /sessions/{id}/observations       {"observations": [{"variable": {...}, "state": n}]}
    GET  /sessions/{id}/explanations/{disease_id}[?state=n]
    POST /sessions/{id}/disagreement       {"note": ...}

Sessions accumulate evidence step by step; each accepted batch returns the
ranked suspicion report and the next-check recommendations.  The model
registry is read-shared; mutations of one session are serialized.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .errors import EvidenceError, ModelFormatError
from .evidence import EvidenceSet
from .inference import suspicion
from .model import ChiefComplaintModel, VariableId
from .modelfile import load_model
from .simplify import serialize_subducg
from .store import (
    ContradictoryBatch,
    ModelRegistry,
    SessionClosed,
    SessionNotFound,
    SessionStore,
)
from .validation import validate


class VariableRef(BaseModel):
    kind: str
    index: int

    def to_id(self) -> VariableId:
        try:
            return VariableId(self.kind, self.index)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))


class ObservationIn(BaseModel):
    variable: VariableRef
    state: int


class ObservationBatch(BaseModel):
    observations: list[ObservationIn]


class SessionCreate(BaseModel):
    model_id: str


class DisagreementIn(BaseModel):
    note: str = ""


def build_app(data_dir: str | Path) -> FastAPI:
    app = FastAPI(title="ducg-session-service")
    registry = ModelRegistry(Path(data_dir))
    store = SessionStore(Path(data_dir), registry)
    app.state.registry = registry
    app.state.store = store

    @app.post("/models")
    def register_model(body: dict):
        try:
            loaded = load_model(body)
        except ModelFormatError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        if not isinstance(loaded, ChiefComplaintModel):
            raise HTTPException(
                status_code=400, detail="module files must be fused before registration"
            )
        report = validate(loaded)
        if not report.ok:
            raise HTTPException(
                status_code=400,
                detail={"errors": [str(f) for f in report.errors]},
            )
        model_id = registry.register(loaded)
        return {"model_id": model_id}

    @app.get("/models")
    def list_models():
        return {"models": registry.list_ids()}

    @app.post("/sessions")
    def create_session(body: SessionCreate):
        try:
            session, initial = store.create(body.model_id)
        except SessionNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        payload = session.to_dict()
        payload["initial_view"] = [
            {"disease_id": str(vid), "state": state, "prior": prior}
            for vid, state, prior in initial
        ]
        return payload

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        try:
            return store.get(session_id).to_dict()
        except SessionNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.post("/sessions/{session_id}/observations")
    def submit_observations(session_id: str, body: ObservationBatch):
        observations = [(o.variable.to_id(), o.state) for o in body.observations]
        try:
            return store.submit(session_id, observations)
        except SessionNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except ContradictoryBatch as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except SessionClosed as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except EvidenceError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/sessions/{session_id}/explanations/{disease_id}")
    def get_explanation(session_id: str, disease_id: str, state: int | None = None):
        try:
            session = store.get(session_id)
        except SessionNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        model = store.model_for(session)
        try:
            disease = VariableId.parse(disease_id)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        evidence = EvidenceSet.for_model(model, session.observed, step=session.step)
        report = suspicion(model, evidence)
        matching = [
            e.hypothesis
            for e in report.ranking()
            if e.hypothesis[0] == disease and (state is None or e.hypothesis[1] == state)
        ]
        if not matching:
            valid = sorted({str(e.hypothesis[0]) for e in report.entries})
            raise HTTPException(
                status_code=404,
                detail={
                    "message": f"{disease_id} is not in the current hypothesis set",
                    "valid": valid,
                },
            )
        hypothesis = matching[0]
        sub = report.subducgs.get(hypothesis)
        if sub is None:
            raise HTTPException(status_code=404, detail="no explanation available")
        return serialize_subducg(sub, model)

    @app.post("/sessions/{session_id}/disagreement")
    def flag_disagreement(session_id: str, body: DisagreementIn):
        try:
            return store.flag_disagreement(session_id, body.note)
        except SessionNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    return app
