"""HTTP session service consumed by the browser client.

One guide engine per active session; events flow through the protocol
module's validation; frames, stimuli, stage changes and response feedback
are pushed to the client over a server-sent-event stream. Time is
injected, so tests drive sessions with a virtual clock.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import AsyncIterator, Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from .. import assess, cogtask, protocol
from ..biosignal import IbiSample
from ..errors import PacerlabError, ProtocolViolationError
from ..guide import DynamicMode, GuideState, StaticMode, phase_to_frame, smooth_hr, step
from ..protocol import Condition, EventKind, Feedback, SessionEvent, SessionLog, StageKind
from ..subjectsim import SimulatedSubject, SubjectParams
from .clock import Clock, WallClock

N_LIGHT_POSITIONS = 8


@dataclass
class ServiceConfig:
    port: int = 8077
    data_dir: Optional[Path] = None
    frame_rate_hz: float = 20.0
    questionnaire_path: Optional[Path] = None

    def __post_init__(self):
        if self.frame_rate_hz < 10:
            raise PacerlabError("frame rate must be at least 10 Hz")


class CreateSession(BaseModel):
    participant_id: str
    condition: str
    source: Optional[dict] = None  # {"kind": "simulated", "seed": ...} | None
    seed: int = 0


class PostEvent(BaseModel):
    kind: str
    payload: dict = {}
    t_ms: Optional[float] = None


@dataclass
class _Outbox:
    items: list = field(default_factory=list)

    def push(self, name: str, data: dict) -> None:
        self.items.append((name, data))

    def drain(self):
        items, self.items = self.items, []
        return items


class LiveSession:
    def __init__(self, session_id: str, req: CreateSession, clock: Clock):
        self.id = session_id
        self.clock = clock
        self.condition = Condition.parse(req.condition)
        self.seed = req.seed
        self.log = SessionLog(protocol.build_plan(req.participant_id, self.condition))
        self.log.start(clock.now_ms())
        self.guide_state = GuideState(t_ms=clock.now_ms())
        self.delta = 15.0
        self.outbox = _Outbox()
        self.nback_plan: Optional[cogtask.StimulusPlan] = None
        self._stimulus_iter = None
        self._next_stimulus = None
        self._last_stage = None
        self.subject: Optional[SimulatedSubject] = None
        self._pending_beat: Optional[IbiSample] = None
        if req.source and req.source.get("kind") == "simulated":
            params = SubjectParams(seed=int(req.source.get("seed", req.seed)))
            self.subject = SimulatedSubject(params)

    # -- guide --------------------------------------------------------------

    def _mode(self):
        stage = self.log.current_stage
        in_exercise = stage is not None and stage.kind is StageKind.BREATHING_EXERCISE
        if self.condition.feedback is Feedback.DYNAMIC and in_exercise:
            return DynamicMode(delta=self.delta)
        return StaticMode(6.0)

    def on_ibi(self, sample: IbiSample) -> None:
        self.guide_state = smooth_hr(self.guide_state, sample)

    def tick(self, dt_ms: float) -> None:
        """Advance the guide and any scheduled stimuli by one frame period."""
        self.guide_state = step(self.guide_state, dt_ms, self._mode())
        now = self.clock.now_ms()
        if self.subject is not None:
            while True:
                # hold the beat that crosses the frame boundary until the
                # clock catches up, so log timestamps stay nondecreasing
                beat = self._pending_beat or self.subject.beat(
                    guide_phase=self.guide_state.phase
                )
                if beat.t_ms > now:
                    self._pending_beat = beat
                    break
                self._pending_beat = None
                self.apply_event(
                    PostEvent(
                        kind="ibi_sample",
                        payload={"t_ms": beat.t_ms, "ibi_ms": beat.ibi_ms},
                        t_ms=float(beat.t_ms),
                    )
                )
        self._emit_due_stimulus(now)
        self._announce_stage()

    def _announce_stage(self) -> None:
        stage = self.log.current_stage
        name = stage.name if stage else None
        if name != self._last_stage:
            self._last_stage = name
            if stage is None or stage.kind is not StageKind.NBACK:
                # drop stimuli left over from a task the operator skipped out of
                self._stimulus_iter = None
                self._next_stimulus = None
            if stage is not None:
                self.outbox.push("stage", {"kind": stage.kind.value, "index": stage.index, "name": name})
                if stage.kind is StageKind.NBACK:
                    self._start_nback(stage)

    def _start_nback(self, stage) -> None:
        cfg = cogtask.NBackConfig(
            training_seqs=1 if stage.index == 1 else 0,
            seed=int(np.random.SeedSequence([self.seed, stage.index]).generate_state(1)[0]),
        )
        self.nback_plan = cogtask.generate_plan(cfg)
        protocol.advance(
            self.log,
            SessionEvent(
                self.clock.now_ms(),
                EventKind.NOTE,
                {"stage": stage.name, "nback_plan": protocol.nback_plan_payload(self.nback_plan)},
            ),
        )
        start = self.clock.now_ms()
        sched = []
        t = start
        for si, seq in enumerate(self.nback_plan.sequences):
            for pi, letter in enumerate(seq.letters):
                sched.append((t + pi * cfg.onset_interval_ms, si, pi, letter))
            t += len(seq.letters) * cfg.onset_interval_ms + 5000.0
        self._stimulus_iter = iter(sched)
        self._next_stimulus = next(self._stimulus_iter, None)

    def _emit_due_stimulus(self, now: float) -> None:
        while self._next_stimulus is not None and self._next_stimulus[0] <= now:
            onset, si, pi, letter = self._next_stimulus
            protocol.advance(
                self.log,
                SessionEvent(
                    now,
                    EventKind.STIMULUS_SHOWN,
                    {"seq_index": si, "position": pi, "letter": letter},
                ),
            )
            self.outbox.push(
                "stimulus",
                {"letter": letter, "onset": onset, "seq_index": si, "position": pi},
            )
            self._next_stimulus = next(self._stimulus_iter, None)

    # -- events -------------------------------------------------------------

    def apply_event(self, body: PostEvent) -> None:
        t = body.t_ms if body.t_ms is not None else self.clock.now_ms()
        event = SessionEvent(t, EventKind(body.kind), body.payload)
        protocol.advance(self.log, event)
        if event.kind is EventKind.IBI_SAMPLE:
            self.on_ibi(IbiSample(int(event.payload["t_ms"]), float(event.payload["ibi_ms"])))
        elif event.kind is EventKind.RESPONSE and self.nback_plan is not None:
            si, pi = event.payload["seq_index"], event.payload["position"]
            seq = self.nback_plan.sequences[si]
            key = seq.key[pi]
            correct = (key is cogtask.Key.TARGET) == (event.payload["button"] == "left")
            self.outbox.push("feedback", {"seq_index": si, "position": pi, "correct": correct})
        elif (
            event.kind is EventKind.CALIBRATION_EVENT
            and event.payload.get("action") == "accept"
            and "delta" in event.payload
        ):
            self.delta = float(event.payload["delta"])
        self._announce_stage()

    def advance_stage(self) -> None:
        self.log.complete_stage(self.clock.now_ms())
        self._announce_stage()

    def frame_payload(self) -> dict:
        frame = phase_to_frame(self.guide_state.phase, N_LIGHT_POSITIONS)
        return {
            "phase": round(frame.phase, 6),
            "br_bpm": round(self.guide_state.br_bpm, 4),
            "direction": frame.direction.value,
            "intensities": [round(v, 4) for v in frame.intensities],
        }

    def plan_payload(self) -> dict:
        stage = self.log.current_stage
        return {
            "id": self.id,
            "participant_id": self.log.plan.participant_id,
            "condition": str(self.condition),
            "stages": [s.name for s in self.log.plan.stages],
            "current_stage": stage.name if stage else None,
            "completed": self.log.completed,
        }


def _sse(name: str, data: dict) -> str:
    return f"event: {name}\ndata: {json.dumps(data, separators=(',', ':'))}\n\n"


def create_app(config: Optional[ServiceConfig] = None, clock: Optional[Clock] = None) -> FastAPI:
    config = config or ServiceConfig()
    clock = clock or WallClock()
    app = FastAPI(title="pacerlab session service")
    sessions: dict[str, LiveSession] = {}
    counter = itertools.count(1)

    def get_session(session_id: str) -> LiveSession:
        if session_id not in sessions:
            raise HTTPException(status_code=404, detail="unknown session")
        return sessions[session_id]

    @app.post("/sessions")
    def create_session(req: CreateSession):
        try:
            session = LiveSession(f"s{next(counter)}", req, clock)
        except PacerlabError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        sessions[session.id] = session
        session._announce_stage()
        return session.plan_payload()

    @app.get("/questionnaires")
    def questionnaires():
        return assess.load_questionnaires(config.questionnaire_path)

    @app.get("/sessions/{session_id}")
    def fetch(session_id: str):
        return get_session(session_id).plan_payload()

    @app.post("/sessions/{session_id}/events")
    def post_event(session_id: str, body: PostEvent):
        session = get_session(session_id)
        try:
            session.apply_event(body)
        except ProtocolViolationError as exc:
            raise HTTPException(
                status_code=409, detail={"error": "protocol-violation", "message": str(exc)}
            )
        except (PacerlabError, ValueError, KeyError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        _maybe_persist(session)
        return {"accepted": True, **session.plan_payload()}

    @app.post("/sessions/{session_id}/advance")
    def advance_stage(session_id: str):
        session = get_session(session_id)
        try:
            session.advance_stage()
        except ProtocolViolationError as exc:
            raise HTTPException(
                status_code=409, detail={"error": "protocol-violation", "message": str(exc)}
            )
        _maybe_persist(session)
        return session.plan_payload()

    @app.get("/sessions/{session_id}/stream")
    async def stream(session_id: str, max_events: Optional[int] = None):
        session = get_session(session_id)
        frame_period = 1000.0 / config.frame_rate_hz

        async def gen() -> AsyncIterator[str]:
            sent = 0
            while not session.log.completed:
                await clock.async_sleep_ms(frame_period)
                session.tick(frame_period)
                for name, data in session.outbox.drain():
                    yield _sse(name, data)
                    sent += 1
                yield _sse("guide_frame", session.frame_payload())
                sent += 1
                if max_events is not None and sent >= max_events:
                    return

        return StreamingResponse(gen(), media_type="text/event-stream")

    def _maybe_persist(session: LiveSession) -> None:
        if session.log.completed and config.data_dir is not None:
            config.data_dir.mkdir(parents=True, exist_ok=True)
            path = config.data_dir / f"{session.log.plan.participant_id}.ndjson"
            path.write_text(protocol.serialize_log(session.log), encoding="utf-8")

    return app
