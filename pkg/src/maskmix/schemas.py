"""Pydantic request/response models for the experiment service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel


class TrialPayload(BaseModel):
    kind: Literal["judgment", "verbalization", "ready_to_finish", "done"]
    participant_id: int
    trial_index: Optional[int] = None
    n_trials: Optional[int] = None
    stimulus_ids: Optional[list[str]] = None
    audio_urls: Optional[list[str]] = None
    verbalization_index: Optional[int] = None
    n_verbalizations: Optional[int] = None
    positive_id: Optional[str] = None
    audio_url: Optional[str] = None


class SessionCreated(BaseModel):
    participant_id: int
    trial: TrialPayload


class JudgmentRequest(BaseModel):
    trial_index: int
    best_id: str
    worst_id: str
    response_time_ms: Optional[int] = None


class VerbalizationRequest(BaseModel):
    positive_id: str
    text: str


class SubmitAck(BaseModel):
    accepted: bool
    next: TrialPayload


class FinishResponse(BaseModel):
    participant_id: int
    results_file: str


class ServiceInfo(BaseModel):
    name: str
    version: str
    stimuli: int
    positives: list[str]
