"""Session orchestration for the 2x2 (attention x feedback) study design.

Builds the condition-specific stage timeline, enforces which events are
legal in which stage, and keeps an append-only event log that serializes
to line-delimited JSON (plan header first, one event per line, schema
version "v": 1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

from . import assess, biosignal, cogtask
from .errors import DomainError, ProtocolViolationError

SCHEMA_VERSION = 1
INTERVENTION_DURATION_S = 360  # breathing exercise / reading task


class Attention(Enum):
    AMBIENT = "ambient"
    FOCUS = "focus"


class Feedback(Enum):
    DYNAMIC = "dynamic"
    STATIC = "static"


@dataclass(frozen=True)
class Condition:
    attention: Attention
    feedback: Feedback

    @classmethod
    def parse(cls, text: str) -> "Condition":
        """Parse e.g. 'focus-dynamic' (case-insensitive)."""
        try:
            att, fb = text.lower().split("-")
            return cls(Attention(att), Feedback(fb))
        except ValueError as exc:
            raise DomainError(f"bad condition {text!r}") from exc

    def __str__(self) -> str:
        return f"{self.attention.value}-{self.feedback.value}"


class StageKind(Enum):
    SETUP = "setup"
    CALIBRATION = "calibration"
    STAI = "stai"
    NBACK = "nback"
    BREATHING_EXERCISE = "breathing_exercise"
    READING_TASK = "reading_task"
    USE_QUESTIONNAIRE = "use_questionnaire"


class DeviceState(Enum):
    OFF = "off"
    AMBIENT_ON = "ambient_on"
    FOCUS_ON = "focus_on"


@dataclass(frozen=True)
class Stage:
    kind: StageKind
    index: Optional[int] = None  # stai 1..3, nback 1..2
    planned_duration_s: Optional[int] = None
    device_state: DeviceState = DeviceState.OFF

    @property
    def name(self) -> str:
        return self.kind.value if self.index is None else f"{self.kind.value}{self.index}"


@dataclass(frozen=True)
class SessionPlan:
    participant_id: str
    condition: Condition
    stages: tuple[Stage, ...]
    metadata: dict = field(default_factory=dict)  # demographics etc., opaque


class EventKind(Enum):
    STAGE_STARTED = "stage_started"
    STAGE_COMPLETED = "stage_completed"
    IBI_SAMPLE = "ibi_sample"
    GUIDE_FRAME_EMITTED = "guide_frame_emitted"
    STIMULUS_SHOWN = "stimulus_shown"
    RESPONSE = "response"
    QUESTIONNAIRE_SUBMITTED = "questionnaire_submitted"
    CALIBRATION_EVENT = "calibration_event"
    NOTE = "note"


@dataclass(frozen=True)
class SessionEvent:
    t_ms: float
    kind: EventKind
    payload: dict = field(default_factory=dict)


# events legal in any stage (physiology is recorded continuously)
_ANY_STAGE = {EventKind.IBI_SAMPLE, EventKind.GUIDE_FRAME_EMITTED, EventKind.NOTE}
_STAGE_EVENTS = {
    StageKind.NBACK: {EventKind.STIMULUS_SHOWN, EventKind.RESPONSE},
    StageKind.STAI: {EventKind.QUESTIONNAIRE_SUBMITTED},
    StageKind.USE_QUESTIONNAIRE: {EventKind.QUESTIONNAIRE_SUBMITTED},
    StageKind.CALIBRATION: {EventKind.CALIBRATION_EVENT},
}


def build_plan(participant_id: str, condition: Condition, metadata: Optional[dict] = None) -> SessionPlan:
    """Stage timeline for one participant: the order is fixed per condition."""
    focus = condition.attention is Attention.FOCUS
    ambient_device = DeviceState.AMBIENT_ON if not focus else DeviceState.OFF

    def stage(kind, index=None, duration=None, device=None):
        return Stage(kind, index, duration, device if device is not None else ambient_device)

    stages = [stage(StageKind.SETUP)]
    if focus and condition.feedback is Feedback.DYNAMIC:
        stages.append(stage(StageKind.CALIBRATION))
    stages += [
        stage(StageKind.STAI, 1),
        stage(StageKind.NBACK, 1),
        stage(StageKind.STAI, 2),
    ]
    if focus:
        stages.append(
            stage(
                StageKind.BREATHING_EXERCISE,
                duration=INTERVENTION_DURATION_S,
                device=DeviceState.FOCUS_ON,
            )
        )
    else:
        stages.append(stage(StageKind.READING_TASK, duration=INTERVENTION_DURATION_S))
    stages += [
        stage(StageKind.NBACK, 2),
        stage(StageKind.STAI, 3),
    ]
    if focus:
        stages.append(stage(StageKind.USE_QUESTIONNAIRE))
    return SessionPlan(participant_id, condition, tuple(stages), metadata or {})


class SessionLog:
    """Append-only event record for one session.

    Every stage_started is closed by a stage_completed before the next
    stage begins; timed stages auto-complete when an event arrives past
    their deadline.
    """

    def __init__(self, plan: SessionPlan):
        self.plan = plan
        self.events: list[SessionEvent] = []
        self.stage_idx = -1  # index into plan.stages; -1 = not started
        self._stage_open = False
        self._stage_start_ms = 0.0
        self.completed = False

    @property
    def current_stage(self) -> Optional[Stage]:
        if self._stage_open:
            return self.plan.stages[self.stage_idx]
        return None

    def start(self, t_ms: float = 0.0) -> None:
        if self.stage_idx >= 0:
            raise ProtocolViolationError("session already started")
        self._start_next_stage(t_ms)

    def _append(self, event: SessionEvent) -> None:
        if self.events and event.t_ms < self.events[-1].t_ms:
            raise ProtocolViolationError("event timestamps must be nondecreasing")
        self.events.append(event)

    def _start_next_stage(self, t_ms: float) -> None:
        self.stage_idx += 1
        stage = self.plan.stages[self.stage_idx]
        self._stage_open = True
        self._stage_start_ms = t_ms
        self._append(
            SessionEvent(t_ms, EventKind.STAGE_STARTED, {"stage": stage.name})
        )

    def complete_stage(self, t_ms: float) -> None:
        """Finish the current stage; starts the next one or ends the session."""
        if not self._stage_open:
            raise ProtocolViolationError("no stage in progress")
        stage = self.plan.stages[self.stage_idx]
        self._append(
            SessionEvent(t_ms, EventKind.STAGE_COMPLETED, {"stage": stage.name})
        )
        self._stage_open = False
        if self.stage_idx + 1 < len(self.plan.stages):
            self._start_next_stage(t_ms)
        else:
            self.completed = True

    def _deadline_ms(self) -> Optional[float]:
        stage = self.current_stage
        if stage is None or stage.planned_duration_s is None:
            return None
        return self._stage_start_ms + stage.planned_duration_s * 1000.0


def advance(log: SessionLog, event: SessionEvent) -> SessionLog:
    """Validate an incoming event against the current stage and append it.

    Questionnaire submissions and accepted calibrations complete their
    stage; timed stages complete themselves once the deadline passes.
    """
    if log.stage_idx < 0:
        log.start(event.t_ms)
    deadline = log._deadline_ms()
    if deadline is not None and event.t_ms >= deadline:
        log.complete_stage(deadline)

    stage = log.current_stage
    if stage is None:
        raise ProtocolViolationError("session already completed")
    if event.kind in (EventKind.STAGE_STARTED, EventKind.STAGE_COMPLETED):
        raise ProtocolViolationError("stage transitions are driven internally")
    allowed = _ANY_STAGE | _STAGE_EVENTS.get(stage.kind, set())
    if event.kind not in allowed:
        raise ProtocolViolationError(
            f"{event.kind.value} not allowed during {stage.name}"
        )
    log._append(event)

    if event.kind is EventKind.QUESTIONNAIRE_SUBMITTED:
        log.complete_stage(event.t_ms)
    elif (
        event.kind is EventKind.CALIBRATION_EVENT
        and event.payload.get("action") == "accept"
    ):
        log.complete_stage(event.t_ms)
    return log


# ---------------------------------------------------------------------------
# serialization (line-delimited JSON, schema v1)

def _dumps(obj: Any) -> str:
    return json.dumps(obj, separators=(",", ":"), sort_keys=True, ensure_ascii=False)


def serialize_log(log: SessionLog) -> str:
    header = {
        "v": SCHEMA_VERSION,
        "participant_id": log.plan.participant_id,
        "condition": {
            "attention": log.plan.condition.attention.value,
            "feedback": log.plan.condition.feedback.value,
        },
        "stages": [
            {
                "kind": s.kind.value,
                "index": s.index,
                "planned_duration_s": s.planned_duration_s,
                "device_state": s.device_state.value,
            }
            for s in log.plan.stages
        ],
        "metadata": log.plan.metadata,
        "completed": log.completed,
    }
    lines = [_dumps(header)]
    lines += [
        _dumps({"t_ms": e.t_ms, "kind": e.kind.value, "payload": e.payload})
        for e in log.events
    ]
    return "\n".join(lines) + "\n"


def parse_log(text: str) -> SessionLog:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DomainError("empty session log")
    header = json.loads(lines[0])
    if header.get("v") != SCHEMA_VERSION:
        raise DomainError(f"unsupported log schema version {header.get('v')!r}")
    condition = Condition(
        Attention(header["condition"]["attention"]),
        Feedback(header["condition"]["feedback"]),
    )
    stages = tuple(
        Stage(
            StageKind(s["kind"]),
            s["index"],
            s["planned_duration_s"],
            DeviceState(s["device_state"]),
        )
        for s in header["stages"]
    )
    plan = SessionPlan(header["participant_id"], condition, stages, header.get("metadata", {}))
    log = SessionLog(plan)
    for ln in lines[1:]:
        raw = json.loads(ln)
        log.events.append(
            SessionEvent(raw["t_ms"], EventKind(raw["kind"]), raw.get("payload", {}))
        )
    log.completed = header["completed"]
    # restore stage cursor from the replayed events
    n_completed = sum(1 for e in log.events if e.kind is EventKind.STAGE_COMPLETED)
    n_started = sum(1 for e in log.events if e.kind is EventKind.STAGE_STARTED)
    log.stage_idx = n_started - 1
    log._stage_open = n_started > n_completed
    if log._stage_open:
        starts = [e for e in log.events if e.kind is EventKind.STAGE_STARTED]
        log._stage_start_ms = starts[-1].t_ms
    return log


# ---------------------------------------------------------------------------
# measure extraction

def _stage_windows(log: SessionLog) -> dict[str, tuple[float, float]]:
    windows = {}
    open_stage: Optional[tuple[str, float]] = None
    for e in log.events:
        if e.kind is EventKind.STAGE_STARTED:
            open_stage = (e.payload["stage"], e.t_ms)
        elif e.kind is EventKind.STAGE_COMPLETED and open_stage:
            windows[open_stage[0]] = (open_stage[1], e.t_ms)
            open_stage = None
    return windows


def _ibi_in(log: SessionLog, window: tuple[float, float]) -> biosignal.IbiSeries:
    start, end = window
    samples = [
        biosignal.IbiSample(int(e.payload["t_ms"]), float(e.payload["ibi_ms"]))
        for e in log.events
        if e.kind is EventKind.IBI_SAMPLE and start <= e.t_ms < end
    ]
    return biosignal.IbiSeries(samples)


def _rmssd_or_none(series: biosignal.IbiSeries) -> Optional[float]:
    cleaned = biosignal.artifact_filter(series)
    if len(cleaned) < 2:
        return None
    return biosignal.rmssd(cleaned).value_s


def _nback_score(log: SessionLog, stage_name: str, window: tuple[float, float]) -> Optional[float]:
    start, end = window
    plan_payload = None
    for e in log.events:
        if e.payload.get("stage") == stage_name and "nback_plan" in e.payload:
            plan_payload = e.payload["nback_plan"]
    if plan_payload is None:
        return None
    config = cogtask.NBackConfig(**plan_payload["config"])
    sequences = tuple(
        cogtask.Sequence_(
            tuple(s["letters"]),
            cogtask._key_for(s["letters"], config.n),
            s.get("is_training", False),
        )
        for s in plan_payload["sequences"]
    )
    plan = cogtask.StimulusPlan(sequences, config)
    responses = [
        cogtask.ResponseEvent(
            e.payload["seq_index"],
            e.payload["position"],
            e.payload["button"],
            e.payload.get("latency_ms", 0.0),
        )
        for e in log.events
        if e.kind is EventKind.RESPONSE and start <= e.t_ms < end
    ]
    return cogtask.score(plan, responses).pct_correct


def nback_plan_payload(plan: cogtask.StimulusPlan) -> dict:
    """Stimulus plan as a JSON-safe dict for embedding in stage_started events."""
    cfg = plan.config
    return {
        "config": {
            "n": cfg.n,
            "letters_per_seq": cfg.letters_per_seq,
            "seqs_per_task": cfg.seqs_per_task,
            "training_seqs": cfg.training_seqs,
            "display_ms": cfg.display_ms,
            "onset_interval_ms": cfg.onset_interval_ms,
            "target_fraction": cfg.target_fraction,
            "alphabet": cfg.alphabet,
            "seed": cfg.seed,
        },
        "sequences": [
            {"letters": list(s.letters), "is_training": s.is_training}
            for s in plan.sequences
        ],
    }


def extract_measures(log: SessionLog) -> dict:
    """Per-participant measures: RMSSD at time1/2/3, task accuracy, questionnaires.

    Missing physiology leaves the corresponding RMSSD entry None instead of
    fabricating a value.
    """
    if not log.completed:
        raise ProtocolViolationError("extract_measures needs a completed log")
    windows = _stage_windows(log)
    intervention = "breathing_exercise" if "breathing_exercise" in windows else "reading_task"
    time_windows = {
        "time1": windows.get("nback1"),
        "time2": windows.get(intervention),
        "time3": windows.get("nback2"),
    }
    record: dict[str, Any] = {
        "participant_id": log.plan.participant_id,
        "attention": log.plan.condition.attention.value,
        "feedback": log.plan.condition.feedback.value,
    }
    for label, window in time_windows.items():
        record[f"rmssd_{label}"] = (
            _rmssd_or_none(_ibi_in(log, window)) if window else None
        )
    for i in (1, 2):
        name = f"nback{i}"
        record[f"{name}_pct"] = (
            _nback_score(log, name, windows[name]) if name in windows else None
        )

    for e in log.events:
        if e.kind is not EventKind.QUESTIONNAIRE_SUBMITTED:
            continue
        qid = e.payload.get("questionnaire")
        items = e.payload.get("items", [])
        if qid and qid.startswith("stai"):
            score = assess.score_stai6(assess.StaiShortResponse(tuple(items)))
            record[qid] = score.value
        elif qid == "use":
            record["use_total"] = assess.score_use(assess.UseResponse(tuple(items))).total
    return record
