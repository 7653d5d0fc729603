"""Experiment session state: event-sourced, crash-safe, replayable.

Every session appends its events (creation with the full design, each
judgment, each verbalization, the finish) to a per-session JSONL file.
The results CSV is a pure function of that log, so replaying a log
reproduces the file byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .bwsdesign import (
    PHASE_TRAINING,
    TrialSpec,
    TupleDesign,
    TupleRegistry,
    design_participant,
    make_training_tuples,
)
from .gengrid import read_manifest

RESULTS_COLUMNS = [
    "record",
    "participant_id",
    "trial_index",
    "phase",
    "s1",
    "s2",
    "s3",
    "s4",
    "best_id",
    "worst_id",
    "rt_ms",
    "positive_id",
    "text",
    "duration_s",
]

N_VERBALIZATIONS = 5


class SessionError(Exception):
    pass


class UnknownSessionError(SessionError):
    pass


class SessionFinishedError(SessionError):
    pass


class StaleTrialError(SessionError):
    pass


class InvalidJudgmentError(SessionError):
    pass


class WrongPhaseError(SessionError):
    pass


class PrematureFinishError(SessionError):
    pass


@dataclass
class _Session:
    participant_id: int
    design: TupleDesign
    verbalization_order: list[str]
    log_path: Path
    created_at: float
    cursor: int = 0
    verbalization_cursor: int = 0
    finished: bool = False
    events: list[dict] = field(default_factory=list)
    last_judgment: dict | None = None
    last_verbalization: dict | None = None

    @property
    def trials(self) -> list[TrialSpec]:
        return self.design.trials

    def in_verbalization_phase(self) -> bool:
        return self.cursor >= len(self.trials)

    def all_done(self) -> bool:
        return (
            self.cursor >= len(self.trials)
            and self.verbalization_cursor >= len(self.verbalization_order)
        )


class ExperimentStore:
    """Owns sessions, the tuple registry, audio lookup, and results files.

    A single lock serializes mutation; stale or repeated requests are
    rejected (or acknowledged idempotently), never queued.
    """

    def __init__(
        self,
        manifest_path,
        audio_dir,
        state_dir,
        base_seed: int = 2024,
    ) -> None:
        self.manifest_path = Path(manifest_path)
        self.audio_dir = Path(audio_dir)
        self.state_dir = Path(state_dir)
        self.base_seed = base_seed
        self.state_dir.mkdir(parents=True, exist_ok=True)
        self.sessions_dir = self.state_dir / "sessions"
        self.sessions_dir.mkdir(exist_ok=True)
        self._lock = threading.RLock()

        rows = [r for r in read_manifest(self.manifest_path) if r["status"] == "ok"]
        if not rows:
            raise ValueError(f"manifest {manifest_path} has no usable stimuli")
        self.stimulus_ids = [r["id"] for r in rows]
        stim_dir = self.manifest_path.parent
        self._audio_paths = {r["id"]: stim_dir / r["file"] for r in rows}
        self.positive_ids = sorted({r["positive_id"] for r in rows})
        for pid in self.positive_ids:
            self._audio_paths.setdefault(pid, self.audio_dir / f"{pid}.wav")

        self.registry_path = self.state_dir / "registry.json"
        self.registry = TupleRegistry.load(self.registry_path)
        self.training = make_training_tuples(self.stimulus_ids)
        self._sessions: dict[int, _Session] = {}
        self._rehydrate()

    # -- lifecycle ---------------------------------------------------------

    def create_session(self) -> tuple[int, dict]:
        with self._lock:
            participant_id = max(self._sessions, default=0) + 1
            seed = self.base_seed + 100003 * participant_id
            design = design_participant(
                self.stimulus_ids,
                seed,
                registry=self.registry,
                participant_id=participant_id,
                training=self.training,
            )
            self.registry.save(self.registry_path)
            order = list(self.positive_ids)
            random.Random(seed + 1).shuffle(order)
            log_path = self.sessions_dir / f"session_{participant_id:04d}.jsonl"
            session = _Session(
                participant_id=participant_id,
                design=design,
                verbalization_order=order,
                log_path=log_path,
                created_at=time.time(),
            )
            self._sessions[participant_id] = session
            self._append_event(
                session,
                {
                    "event": "created",
                    "participant_id": participant_id,
                    "t": session.created_at,
                    "design": design.to_dict(),
                    "verbalization_order": order,
                },
            )
            return participant_id, self.trial_payload(participant_id)

    def _get(self, participant_id: int) -> _Session:
        session = self._sessions.get(participant_id)
        if session is None:
            raise UnknownSessionError(f"unknown session {participant_id}")
        return session

    # -- payloads ------------------------------------------------------------

    def trial_payload(self, participant_id: int) -> dict:
        """Payload for the participant's current step.

        Judgment payloads never carry phase or recording information:
        retest trials are indistinguishable from main trials.
        """
        with self._lock:
            session = self._get(participant_id)
            if session.finished:
                return {"kind": "done", "participant_id": participant_id}
            if not session.in_verbalization_phase():
                trial = session.trials[session.cursor]
                return {
                    "kind": "judgment",
                    "participant_id": participant_id,
                    "trial_index": trial.index,
                    "n_trials": len(session.trials),
                    "stimulus_ids": list(trial.stimuli),
                    "audio_urls": [f"/audio/{s}" for s in trial.stimuli],
                }
            if session.verbalization_cursor < len(session.verbalization_order):
                positive = session.verbalization_order[session.verbalization_cursor]
                return {
                    "kind": "verbalization",
                    "participant_id": participant_id,
                    "verbalization_index": session.verbalization_cursor,
                    "n_verbalizations": len(session.verbalization_order),
                    "positive_id": positive,
                    "audio_url": f"/audio/{positive}",
                }
            return {"kind": "ready_to_finish", "participant_id": participant_id}

    # -- submissions -----------------------------------------------------------

    def submit_judgment(
        self,
        participant_id: int,
        trial_index: int,
        best_id: str,
        worst_id: str,
        response_time_ms: int | None = None,
    ) -> dict:
        with self._lock:
            session = self._get(participant_id)
            if session.finished:
                raise SessionFinishedError(f"session {participant_id} already finished")
            submission = {
                "trial_index": trial_index,
                "best_id": best_id,
                "worst_id": worst_id,
                "rt_ms": response_time_ms,
            }
            if session.last_judgment == submission:
                return self.trial_payload(participant_id)
            if session.in_verbalization_phase() or trial_index != session.cursor:
                raise StaleTrialError(
                    f"expected trial {session.cursor}, got {trial_index}"
                )
            trial = session.trials[trial_index]
            if best_id not in trial.stimuli or worst_id not in trial.stimuli:
                raise InvalidJudgmentError("choices must belong to the current tuple")
            if best_id == worst_id:
                raise InvalidJudgmentError("best and worst must differ")
            self._append_event(
                session,
                {
                    "event": "judgment",
                    "t": time.time(),
                    "trial_index": trial_index,
                    "best_id": best_id,
                    "worst_id": worst_id,
                    "rt_ms": response_time_ms,
                },
            )
            session.cursor += 1
            session.last_judgment = submission
            return self.trial_payload(participant_id)

    def submit_verbalization(
        self, participant_id: int, positive_id: str, text: str
    ) -> dict:
        with self._lock:
            session = self._get(participant_id)
            if session.finished:
                raise SessionFinishedError(f"session {participant_id} already finished")
            submission = {"positive_id": positive_id, "text": text}
            if session.last_verbalization == submission:
                return self.trial_payload(participant_id)
            if not session.in_verbalization_phase():
                raise WrongPhaseError("judgment trials are not complete yet")
            if session.verbalization_cursor >= len(session.verbalization_order):
                raise WrongPhaseError("all verbalizations already submitted")
            expected = session.verbalization_order[session.verbalization_cursor]
            if positive_id != expected:
                raise WrongPhaseError(
                    f"expected verbalization for {expected!r}, got {positive_id!r}"
                )
            self._append_event(
                session,
                {
                    "event": "verbalization",
                    "t": time.time(),
                    "positive_id": positive_id,
                    "text": text,
                },
            )
            session.verbalization_cursor += 1
            session.last_verbalization = submission
            return self.trial_payload(participant_id)

    def finish(self, participant_id: int) -> Path:
        with self._lock:
            session = self._get(participant_id)
            results_path = self.state_dir / f"results{participant_id}.csv"
            if session.finished:
                return results_path
            if not session.all_done():
                raise PrematureFinishError(
                    "finish requires all trials and verbalizations to be complete"
                )
            self._append_event(session, {"event": "finished", "t": time.time()})
            session.finished = True
            results_path.write_bytes(render_results_csv(session.events).encode())
            return results_path

    # -- audio ----------------------------------------------------------------

    def audio_path(self, key: str) -> Path:
        path = self._audio_paths.get(key)
        if path is None or not path.exists():
            raise KeyError(key)
        return path

    # -- persistence ------------------------------------------------------------

    def _append_event(self, session: _Session, event: dict) -> None:
        session.events.append(event)
        with open(session.log_path, "a") as fh:
            fh.write(json.dumps(event, separators=(",", ":")) + "\n")

    def _rehydrate(self) -> None:
        for log_path in sorted(self.sessions_dir.glob("session_*.jsonl")):
            events = load_event_log(log_path)
            if not events or events[0]["event"] != "created":
                continue
            created = events[0]
            design = TupleDesign.from_dict(created["design"])
            session = _Session(
                participant_id=created["participant_id"],
                design=design,
                verbalization_order=list(created["verbalization_order"]),
                log_path=log_path,
                created_at=created["t"],
                events=events,
            )
            for event in events[1:]:
                if event["event"] == "judgment":
                    session.cursor += 1
                    session.last_judgment = {
                        "trial_index": event["trial_index"],
                        "best_id": event["best_id"],
                        "worst_id": event["worst_id"],
                        "rt_ms": event["rt_ms"],
                    }
                elif event["event"] == "verbalization":
                    session.verbalization_cursor += 1
                    session.last_verbalization = {
                        "positive_id": event["positive_id"],
                        "text": event["text"],
                    }
                elif event["event"] == "finished":
                    session.finished = True
            self._sessions[session.participant_id] = session


def load_event_log(path) -> list[dict]:
    events = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(json.loads(line))
    return events


def render_results_csv(events: list[dict]) -> str:
    """Results CSV for one session, derived purely from its event log.

    Judgment rows cover the 39 recorded trials (training is dropped),
    then one row per verbalization, then the whole-second duration row.
    """
    created = events[0]
    if created["event"] != "created":
        raise ValueError("event log must start with a 'created' event")
    design = TupleDesign.from_dict(created["design"])
    participant_id = created["participant_id"]
    trials = {trial.index: trial for trial in design.trials}

    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=RESULTS_COLUMNS, lineterminator="\n")
    writer.writeheader()
    finished_at = None
    for event in events[1:]:
        if event["event"] == "judgment":
            trial = trials[event["trial_index"]]
            if not trial.recorded:
                continue
            writer.writerow(
                {
                    "record": "judgment",
                    "participant_id": participant_id,
                    "trial_index": trial.index,
                    "phase": trial.phase,
                    "s1": trial.stimuli[0],
                    "s2": trial.stimuli[1],
                    "s3": trial.stimuli[2],
                    "s4": trial.stimuli[3],
                    "best_id": event["best_id"],
                    "worst_id": event["worst_id"],
                    "rt_ms": "" if event.get("rt_ms") is None else event["rt_ms"],
                }
            )
        elif event["event"] == "verbalization":
            writer.writerow(
                {
                    "record": "verbalization",
                    "participant_id": participant_id,
                    "positive_id": event["positive_id"],
                    "text": event["text"],
                }
            )
        elif event["event"] == "finished":
            finished_at = event["t"]
    if finished_at is not None:
        writer.writerow(
            {
                "record": "duration",
                "participant_id": participant_id,
                "duration_s": int(finished_at - created["t"]),
            }
        )
    return out.getvalue()


def replay_results_csv(log_path) -> str:
    """Re-derive the results CSV from a persisted event log."""
    return render_results_csv(load_event_log(log_path))
