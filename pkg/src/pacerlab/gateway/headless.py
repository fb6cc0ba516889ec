"""Desk-scale study execution: a simulated subject runs the full session
plan on a virtual clock, producing a completed, persisted session log in
well under real time. Fully deterministic given (condition, params, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .. import cogtask, protocol
from ..biosignal import IbiSample, IbiSeries, mean_hr
from ..guide import (
    DELTA_BOUNDS,
    DynamicMode,
    GuideMode,
    GuideState,
    StaticMode,
    calibrate_resonance,
    smooth_hr,
    step,
)
from ..protocol import Condition, EventKind, Feedback, SessionEvent, SessionLog
from ..subjectsim import SimulatedSubject, SubjectParams

SWEEP_RATES = (4.5, 5.0, 5.5, 6.0, 6.5)
SWEEP_SECONDS_PER_RATE = 60.0
SETUP_SECONDS = 10.0
QUESTIONNAIRE_SECONDS = 30.0
SEQUENCE_GAP_MS = 5000.0
FRAME_LOG_INTERVAL_MS = 1000.0


@dataclass(frozen=True)
class ResponseModel:
    """How the simulated subject fills questionnaires: a central level per
    form, items jittered one step around it."""

    stai_levels: tuple[int, int, int] = (2, 3, 2)
    use_level: int = 3

    def stai_items(self, index: int, rng: np.random.Generator) -> list[int]:
        level = self.stai_levels[index - 1]
        return [int(np.clip(level + rng.integers(-1, 2), 1, 4)) for _ in range(6)]

    def use_items(self, rng: np.random.Generator) -> list[int]:
        return [int(np.clip(self.use_level + rng.integers(-1, 2), 1, 4)) for _ in range(9)]


class _GuideEngine:
    """Per-beat guide integration: phase advances by the beat's duration."""

    def __init__(self, mode: GuideMode):
        self.mode = mode
        self.state = GuideState()

    def on_beat(self, sample: IbiSample) -> None:
        self.state = smooth_hr(self.state, sample)
        self.state = step(self.state, sample.ibi_ms, self.mode)

    @property
    def phase(self) -> float:
        return self.state.phase


class _Runner:
    def __init__(
        self,
        condition: Condition,
        subject_params: SubjectParams,
        seed: int,
        participant_id: str,
        response_model: ResponseModel,
        nback_config: Optional[cogtask.NBackConfig],
    ):
        subject_seed = int(np.random.SeedSequence([subject_params.seed, seed]).generate_state(1)[0])
        self.subject = SimulatedSubject(replace(subject_params, seed=subject_seed))
        self.rng = np.random.default_rng([seed, 1])
        self.response_model = response_model
        self.nback_config = nback_config or cogtask.NBackConfig()
        self.seed = seed
        plan = protocol.build_plan(participant_id, condition)
        self.log = SessionLog(plan)
        self.guide: Optional[_GuideEngine] = None
        self.calibrated_delta: Optional[float] = None
        self._next_frame_ms = 0.0
        self._pending: Optional[IbiSample] = None

    # -- event helpers ------------------------------------------------------

    def emit(self, t_ms: float, kind: EventKind, payload: dict) -> None:
        protocol.advance(self.log, SessionEvent(t_ms, kind, payload))

    def emit_beat(self, sample: IbiSample) -> None:
        self.emit(
            float(sample.t_ms),
            EventKind.IBI_SAMPLE,
            {"t_ms": sample.t_ms, "ibi_ms": sample.ibi_ms},
        )
        if self.guide is not None:
            self.guide.on_beat(sample)
            if sample.t_ms >= self._next_frame_ms:
                st = self.guide.state
                self.emit(
                    float(sample.t_ms),
                    EventKind.GUIDE_FRAME_EMITTED,
                    {"phase": round(st.phase, 6), "br_bpm": round(st.br_bpm, 4)},
                )
                self._next_frame_ms = sample.t_ms + FRAME_LOG_INTERVAL_MS

    def pump(self, until_ms: float, stressed: bool = False) -> list[IbiSample]:
        """Emit heartbeats up to until_ms.

        The beat that crosses the boundary is held back (pending) so later
        events stamped at until_ms keep the log's timestamps nondecreasing.
        """
        out = []
        while True:
            if self._pending is not None:
                sample = self._pending
                self._pending = None
            else:
                phase = self.guide.phase if self.guide is not None else None
                sample = self.subject.beat(guide_phase=phase, stressed=stressed)
            if sample.t_ms > until_ms:
                self._pending = sample
                break
            self.emit_beat(sample)
            out.append(sample)
        return out

    # -- stages -------------------------------------------------------------

    def run(self) -> SessionLog:
        self.log.start(0.0)
        while not self.log.completed:
            stage = self.log.current_stage
            handler = getattr(self, f"_stage_{stage.kind.value}")
            handler(stage)
        return self.log

    def _now(self) -> float:
        # align with the pending beat's (rounded) stamp so later events never
        # precede it once it is flushed
        if self._pending is not None:
            return float(self._pending.t_ms)
        return self.subject.state.t_ms

    def _stage_setup(self, stage) -> None:
        self.pump(self._now() + SETUP_SECONDS * 1000.0)
        self.log.complete_stage(self._now())

    def _stage_calibration(self, stage) -> None:
        series_per_rate = []
        for rate in SWEEP_RATES:
            self.guide = _GuideEngine(StaticMode(rate))
            start = self._now()
            samples = self.pump(start + SWEEP_SECONDS_PER_RATE * 1000.0)
            series = IbiSeries(samples)
            series_per_rate.append(series)
        result = calibrate_resonance(list(SWEEP_RATES), series_per_rate)
        for rate, value in zip(SWEEP_RATES, result.per_candidate_rmssd):
            self.emit(
                self._now(),
                EventKind.CALIBRATION_EVENT,
                {"action": "sweep_candidate", "rate_bpm": rate, "rmssd_s": value},
            )
        all_samples = [s for ser in series_per_rate for s in ser.samples]
        hr = mean_hr(IbiSeries(all_samples))
        delta = min(max(hr / result.rate_bpm, DELTA_BOUNDS[0]), DELTA_BOUNDS[1])
        self.calibrated_delta = delta
        self.guide = None
        # accept completes the stage
        self.emit(
            self._now(),
            EventKind.CALIBRATION_EVENT,
            {"action": "accept", "rate_bpm": result.rate_bpm, "delta": delta},
        )

    def _stage_stai(self, stage) -> None:
        self.pump(self._now() + QUESTIONNAIRE_SECONDS * 1000.0)
        items = self.response_model.stai_items(stage.index, self.rng)
        self.emit(
            self._now(),
            EventKind.QUESTIONNAIRE_SUBMITTED,
            {"questionnaire": stage.name, "items": items},
        )

    def _stage_nback(self, stage) -> None:
        cfg = replace(
            self.nback_config,
            training_seqs=1 if stage.index == 1 else 0,
            seed=int(np.random.SeedSequence([self.seed, 2, stage.index]).generate_state(1)[0]),
        )
        plan = cogtask.generate_plan(cfg)
        self.emit(
            self._now(),
            EventKind.NOTE,
            {"stage": stage.name, "nback_plan": protocol.nback_plan_payload(plan)},
        )
        t = self._now()
        for si, seq in enumerate(plan.sequences):
            for pi, letter in enumerate(seq.letters):
                onset = t + pi * cfg.onset_interval_ms
                self.pump(onset, stressed=True)
                self.emit(
                    onset,
                    EventKind.STIMULUS_SHOWN,
                    {"seq_index": si, "position": pi, "letter": letter},
                )
                if seq.key[pi] is not cogtask.Key.UNDEFINED:
                    button, latency = self.subject.respond(
                        seq.key[pi] is cogtask.Key.TARGET
                    )
                    latency = min(latency, cfg.onset_interval_ms - 1)
                    self.pump(onset + latency, stressed=True)
                    self.emit(
                        onset + latency,
                        EventKind.RESPONSE,
                        {
                            "seq_index": si,
                            "position": pi,
                            "button": button,
                            "latency_ms": round(latency, 3),
                        },
                    )
            t = t + len(seq.letters) * cfg.onset_interval_ms
            self.pump(t, stressed=True)
            t += SEQUENCE_GAP_MS
        self.pump(t, stressed=True)
        self.log.complete_stage(self._now())

    def _intervention_mode(self) -> GuideMode:
        if self.log.plan.condition.feedback is Feedback.DYNAMIC:
            delta = self.calibrated_delta if self.calibrated_delta is not None else 15.0
            return DynamicMode(delta=delta)
        return StaticMode(6.0)

    def _stage_breathing_exercise(self, stage) -> None:
        self.guide = _GuideEngine(self._intervention_mode())
        self._next_frame_ms = self._now()
        deadline = self.log._deadline_ms()
        self.pump(deadline)
        self.guide = None
        self.log.complete_stage(deadline)

    def _stage_reading_task(self, stage) -> None:
        deadline = self.log._deadline_ms()
        self.pump(deadline)
        self.log.complete_stage(deadline)

    def _stage_use_questionnaire(self, stage) -> None:
        self.pump(self._now() + QUESTIONNAIRE_SECONDS * 1000.0)
        items = self.response_model.use_items(self.rng)
        self.emit(
            self._now(),
            EventKind.QUESTIONNAIRE_SUBMITTED,
            {"questionnaire": "use", "items": items},
        )


def run_headless(
    condition: Condition,
    subject_params: SubjectParams,
    seed: int,
    participant_id: Optional[str] = None,
    data_dir: Optional[Path] = None,
    response_model: Optional[ResponseModel] = None,
    nback_config: Optional[cogtask.NBackConfig] = None,
) -> SessionLog:
    """Execute the full session plan with a simulated subject."""
    participant_id = participant_id or f"sim-{condition}-{seed}"
    runner = _Runner(
        condition,
        subject_params,
        seed,
        participant_id,
        response_model or ResponseModel(),
        nback_config,
    )
    log = runner.run()
    if data_dir is not None:
        data_dir = Path(data_dir)
        data_dir.mkdir(parents=True, exist_ok=True)
        (data_dir / f"{participant_id}.ndjson").write_text(
            protocol.serialize_log(log), encoding="utf-8"
        )
    return log


def run_simulated_study(
    n_per_condition: int,
    seed: int,
    data_dir: Optional[Path] = None,
    base_params: Optional[SubjectParams] = None,
) -> list[SessionLog]:
    """One headless session per simulated participant, n per condition cell.

    Participants differ in resonance frequency, skill and RNG stream, all
    derived deterministically from the study seed.
    """
    base = base_params or SubjectParams()
    logs = []
    idx = 0
    for att in protocol.Attention:
        for fb in protocol.Feedback:
            condition = Condition(att, fb)
            for k in range(n_per_condition):
                rng = np.random.default_rng([seed, 3, idx])
                params = replace(
                    base,
                    f_res_hz=float(rng.uniform(0.075, 0.105)),
                    nback_skill=float(rng.uniform(0.7, 0.95)),
                    seed=int(rng.integers(2**31)),
                )
                logs.append(
                    run_headless(
                        condition,
                        params,
                        seed=int(np.random.default_rng([seed, 4, idx]).integers(2**31)),
                        participant_id=f"sim-{condition}-{k + 1:02d}",
                        data_dir=data_dir,
                    )
                )
                idx += 1
    return logs
