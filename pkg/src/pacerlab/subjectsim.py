"""Synthetic physiological subject for closed-loop testing.

Models respiratory sinus arrhythmia with a single-peak (Lorentzian)
resonance: the amplitude of the interval modulation is largest when the
subject breathes at their personal resonance frequency. The subject
follows an external breathing guide with a first-order lag, and responds
to cognitive-task stimuli with a configurable skill level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .biosignal import IbiSample
from .errors import DomainError

SPONTANEOUS_BREATH_HZ = 0.25  # resting rate with no guide to follow


@dataclass(frozen=True)
class SubjectParams:
    ibi_base_ms: float = 850.0
    a_max_ms: float = 60.0
    f_res_hz: float = 0.09
    width_hz: float = 0.02
    noise_sd_ms: float = 5.0
    compliance_lag_s: float = 4.0
    stress_hr_gain_bpm: float = 8.0
    stress_hrv_atten: float = 0.6
    nback_skill: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.ibi_base_ms <= 0:
            raise DomainError("ibi_base_ms must be positive")
        if self.a_max_ms < 0:
            raise DomainError("a_max_ms must be nonnegative")
        if not (0.05 <= self.f_res_hz <= 0.12):
            raise DomainError("f_res_hz must lie in the coherence band [0.05, 0.12]")
        if not (0 < self.nback_skill <= 1):
            raise DomainError("nback_skill must be in (0, 1]")
        if not (0 < self.stress_hrv_atten <= 1):
            raise DomainError("stress_hrv_atten must be in (0, 1]")


@dataclass(frozen=True)
class SubjectState:
    t_ms: float = 0.0
    breath_phase_followed: float = 0.0
    f_followed_hz: float = SPONTANEOUS_BREATH_HZ
    last_guide_phase: Optional[float] = None
    last_ibi_ms: Optional[float] = None
    stressed: bool = False


def amplitude(params: SubjectParams, f_breath_hz: float) -> float:
    """RSA modulation amplitude (ms) at a breathing frequency: Lorentzian peak."""
    if f_breath_hz <= 0:
        raise DomainError("f_breath_hz must be positive")
    x = (f_breath_hz - params.f_res_hz) / params.width_hz
    return params.a_max_ms / (1.0 + x * x)


def _wrap_half(x: float) -> float:
    """Wrap a phase difference into (-0.5, 0.5]."""
    x = x % 1.0
    if x > 0.5:
        x -= 1.0
    return x


def next_ibi(
    params: SubjectParams,
    state: SubjectState,
    guide_phase: Optional[float],
    stressed: bool,
    rng: np.random.Generator,
) -> tuple[IbiSample, SubjectState]:
    """Advance the subject by one heartbeat and emit the interval.

    Breathing: the followed frequency relaxes toward the guide's apparent
    frequency (or the spontaneous rate with no guide) with time constant
    compliance_lag_s, and the followed phase is additionally pulled toward
    the guide phase so the subject ends up phase-locked.
    """
    dt_ms = state.last_ibi_ms if state.last_ibi_ms is not None else params.ibi_base_ms
    dt_s = dt_ms / 1000.0
    gain = 1.0 - math.exp(-dt_s / params.compliance_lag_s)

    if guide_phase is None:
        f_target = SPONTANEOUS_BREATH_HZ
    elif state.last_guide_phase is None:
        f_target = state.f_followed_hz
    else:
        f_target = (guide_phase - state.last_guide_phase) % 1.0 / dt_s

    f = state.f_followed_hz + gain * (f_target - state.f_followed_hz)
    phase = (state.breath_phase_followed + f * dt_s) % 1.0
    if guide_phase is not None:
        phase = (phase + gain * _wrap_half(guide_phase - phase)) % 1.0

    base = params.ibi_base_ms
    if stressed:
        base = 60000.0 / (60000.0 / base + params.stress_hr_gain_bpm)
    amp = amplitude(params, f) * (params.stress_hrv_atten if stressed else 1.0)
    ibi = base - amp * math.sin(2.0 * math.pi * phase)
    if params.noise_sd_ms > 0:
        ibi += params.noise_sd_ms * rng.standard_normal()
    ibi = max(ibi, 300.0)  # physiological floor, keeps the series valid

    t_ms = state.t_ms + ibi
    new_state = SubjectState(
        t_ms=t_ms,
        breath_phase_followed=phase,
        f_followed_hz=f,
        last_guide_phase=guide_phase,
        last_ibi_ms=ibi,
        stressed=stressed,
    )
    return IbiSample(t_ms=int(round(t_ms)), ibi_ms=ibi), new_state


def respond_nback(
    params: SubjectParams, stimulus_is_target: bool, rng: np.random.Generator
) -> tuple[str, float]:
    """One simulated task response: ('left'|'right', latency_ms)."""
    correct = rng.random() < params.nback_skill
    if stimulus_is_target:
        button = "left" if correct else "right"
    else:
        button = "right" if correct else "left"
    latency_ms = rng.uniform(300.0, 1500.0)
    return button, latency_ms


class SimulatedSubject:
    """Stateful wrapper owning the RNG, for session-scale simulation."""

    def __init__(self, params: SubjectParams):
        self.params = params
        self.state = SubjectState()
        self.rng = np.random.default_rng(params.seed)

    def beat(self, guide_phase: Optional[float] = None, stressed: bool = False) -> IbiSample:
        sample, self.state = next_ibi(self.params, self.state, guide_phase, stressed, self.rng)
        return sample

    def respond(self, stimulus_is_target: bool) -> tuple[str, float]:
        return respond_nback(self.params, stimulus_is_target, self.rng)
