"""FastAPI service exposing the listening experiment."""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles

from . import __version__
from .bwsdesign import DesignSaturatedError
from .schemas import (
    FinishResponse,
    JudgmentRequest,
    ServiceInfo,
    SessionCreated,
    SubmitAck,
    TrialPayload,
    VerbalizationRequest,
)
from .store import (
    ExperimentStore,
    InvalidJudgmentError,
    PrematureFinishError,
    SessionError,
    SessionFinishedError,
    StaleTrialError,
    UnknownSessionError,
    WrongPhaseError,
)


def _http_error(exc: SessionError) -> HTTPException:
    if isinstance(exc, UnknownSessionError):
        return HTTPException(status_code=404, detail=str(exc))
    if isinstance(exc, InvalidJudgmentError):
        return HTTPException(status_code=400, detail=str(exc))
    # stale, finished, wrong phase, premature finish: state conflicts
    return HTTPException(status_code=409, detail=str(exc))


def create_app(store: ExperimentStore, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="maskmix experiment service", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store

    @app.get("/", response_model=ServiceInfo)
    def info() -> ServiceInfo:
        return ServiceInfo(
            name="maskmix",
            version=__version__,
            stimuli=len(store.stimulus_ids),
            positives=store.positive_ids,
        )

    @app.post("/session", response_model=SessionCreated)
    def create_session() -> SessionCreated:
        try:
            participant_id, payload = store.create_session()
        except DesignSaturatedError as exc:
            raise HTTPException(status_code=503, detail=str(exc))
        except SessionError as exc:
            raise _http_error(exc)
        return SessionCreated(participant_id=participant_id, trial=TrialPayload(**payload))

    @app.get("/session/{participant_id}/trial", response_model=TrialPayload)
    def get_trial(participant_id: int) -> TrialPayload:
        try:
            return TrialPayload(**store.trial_payload(participant_id))
        except SessionError as exc:
            raise _http_error(exc)

    @app.post("/session/{participant_id}/judgment", response_model=SubmitAck)
    def submit_judgment(participant_id: int, body: JudgmentRequest) -> SubmitAck:
        try:
            payload = store.submit_judgment(
                participant_id,
                body.trial_index,
                body.best_id,
                body.worst_id,
                body.response_time_ms,
            )
        except SessionError as exc:
            raise _http_error(exc)
        return SubmitAck(accepted=True, next=TrialPayload(**payload))

    @app.post("/session/{participant_id}/verbalization", response_model=SubmitAck)
    def submit_verbalization(
        participant_id: int, body: VerbalizationRequest
    ) -> SubmitAck:
        try:
            payload = store.submit_verbalization(
                participant_id, body.positive_id, body.text
            )
        except SessionError as exc:
            raise _http_error(exc)
        return SubmitAck(accepted=True, next=TrialPayload(**payload))

    @app.post("/session/{participant_id}/finish", response_model=FinishResponse)
    def finish(participant_id: int) -> FinishResponse:
        try:
            path = store.finish(participant_id)
        except SessionError as exc:
            raise _http_error(exc)
        return FinishResponse(participant_id=participant_id, results_file=str(path))

    @app.get("/audio/{key}")
    def get_audio(key: str) -> FileResponse:
        try:
            path = store.audio_path(key)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"no audio for {key!r}")
        return FileResponse(path, media_type="audio/wav")

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
