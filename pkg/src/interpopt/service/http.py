"""Versioned HTTP endpoints over a StudyStore (FastAPI)."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, Field

from .state import AdvanceNotReady, StudyConfig, StudyNotFound, StudyStore


class CreateStudyRequest(BaseModel):
    iterations: int = 10
    min_users: int = 7
    questions_per_model: int = 8
    max_rt: float = 60.0
    kappa: float = 1.0
    seed: int = 0
    exclude_extreme_rts: bool = False
    baseline_models: list[int] = []


class CreateSessionRequest(BaseModel):
    participant: str = Field(min_length=1)


class ResponseRequest(BaseModel):
    study_id: str
    session_id: str
    question_id: str
    point_id: int
    chosen_label: int
    rt_ms: float
    shown_at_ms: float
    answered_at_ms: float
    is_practice: bool = False


class AdvanceRequest(BaseModel):
    min_users: int | None = None


def build_app(store: StudyStore) -> FastAPI:
    app = FastAPI(title="interpopt quiz service", version="1")

    @app.post("/v1/studies")
    def create_study(req: CreateStudyRequest):
        config = StudyConfig(
            iterations=req.iterations,
            min_users=req.min_users,
            questions_per_model=req.questions_per_model,
            max_rt=req.max_rt,
            kappa=req.kappa,
            seed=req.seed,
            exclude_extreme_rts=req.exclude_extreme_rts,
            baseline_models=tuple(req.baseline_models),
        )
        try:
            study_id = store.create_study(config)
        except ValueError as err:
            raise HTTPException(status_code=400, detail=str(err))
        return {"study_id": study_id, "status": "awaiting-responses"}

    @app.get("/v1/studies/{study_id}")
    def get_status(study_id: str):
        try:
            return store.get_status(study_id)
        except StudyNotFound:
            raise HTTPException(status_code=404, detail=f"no study {study_id}")

    @app.post("/v1/studies/{study_id}/sessions")
    def create_session(study_id: str, req: CreateSessionRequest):
        try:
            session_id = store.create_session(study_id, req.participant)
        except StudyNotFound:
            raise HTTPException(status_code=404, detail=f"no study {study_id}")
        except RuntimeError as err:
            raise HTTPException(status_code=409, detail=str(err))
        return {"session_id": session_id}

    @app.get("/v1/studies/{study_id}/quiz")
    def get_quiz(study_id: str, session: str = Query(...)):
        try:
            return store.get_quiz(study_id, session)
        except StudyNotFound:
            raise HTTPException(status_code=404, detail=f"no study {study_id}")
        except KeyError as err:
            raise HTTPException(status_code=404, detail=str(err))
        except RuntimeError as err:
            raise HTTPException(status_code=409, detail=str(err))

    @app.post("/v1/responses")
    def submit_response(req: ResponseRequest):
        try:
            result = store.submit_response(
                study_id=req.study_id,
                session_id=req.session_id,
                question_id=req.question_id,
                point_id=req.point_id,
                chosen_label=req.chosen_label,
                rt_ms=req.rt_ms,
                shown_at_ms=req.shown_at_ms,
                answered_at_ms=req.answered_at_ms,
                is_practice=req.is_practice,
            )
        except StudyNotFound:
            raise HTTPException(status_code=404, detail=f"no study {req.study_id}")
        except KeyError as err:
            raise HTTPException(status_code=404, detail=str(err))
        return result

    @app.post("/v1/studies/{study_id}/advance")
    def advance(study_id: str, req: AdvanceRequest | None = None):
        try:
            return store.advance(study_id, None if req is None else req.min_users)
        except StudyNotFound:
            raise HTTPException(status_code=404, detail=f"no study {study_id}")
        except AdvanceNotReady as err:
            raise HTTPException(status_code=409, detail=str(err))
        except RuntimeError as err:
            raise HTTPException(status_code=409, detail=str(err))

    return app
