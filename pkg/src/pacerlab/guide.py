"""Breathing-guide engine.

Two modes: a fixed-rate guide and a heart-rate-coupled guide where the
breathing rate is the smoothed heart rate divided by a per-user divider,
clamped to a safe band. Phase is a fraction of the breathing cycle in
[0, 1); the first half is the inhale (lights travel center to tip), the
second half the exhale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional, Sequence, Union

from .biosignal import IbiSample, IbiSeries, rmssd
from .errors import CalibrationAbandonedError, DomainError, InsufficientDataError

DEFAULT_DELTA = 15.0
DEFAULT_CLAMP = (4.0, 12.0)
DELTA_BOUNDS = (8.0, 25.0)
DELTA_STEP = 1.1
DEFAULT_SMOOTH_TAU_S = 5.0


@dataclass(frozen=True)
class StaticMode:
    rate_bpm: float = 6.0

    def __post_init__(self):
        if not (0 < self.rate_bpm <= 30):
            raise DomainError(f"static rate must be in (0, 30], got {self.rate_bpm}")


@dataclass(frozen=True)
class DynamicMode:
    delta: float = DEFAULT_DELTA
    clamp: tuple[float, float] = DEFAULT_CLAMP

    def __post_init__(self):
        if self.delta <= 0:
            raise DomainError("delta must be positive")
        if not self.clamp[0] < self.clamp[1]:
            raise DomainError("clamp min must be below max")


GuideMode = Union[StaticMode, DynamicMode]


class Direction(Enum):
    OUTWARD = "outward"  # inhale
    INWARD = "inward"  # exhale


@dataclass(frozen=True)
class GuideState:
    phase: float = 0.0
    br_bpm: float = 6.0
    t_ms: float = 0.0
    smoothed_hr_bpm: Optional[float] = None


@dataclass(frozen=True)
class GuideFrame:
    phase: float
    direction: Direction
    intensities: tuple[float, ...]  # per light position, center -> tip


class CalibrationMethod(Enum):
    INTERACTIVE = "interactive"
    RESONANCE_SWEEP = "resonance_sweep"


@dataclass(frozen=True)
class CalibrationResult:
    method: CalibrationMethod
    delta: Optional[float] = None
    rate_bpm: Optional[float] = None
    per_candidate_rmssd: Optional[tuple[float, ...]] = None


def target_br(
    hr_bpm: float, delta: float, clamp: tuple[float, float] = DEFAULT_CLAMP
) -> float:
    """Coupled breathing rate: heart rate over the divider, clamped."""
    if hr_bpm <= 0 or delta <= 0:
        raise DomainError("hr_bpm and delta must be positive")
    return min(max(hr_bpm / delta, clamp[0]), clamp[1])


def smooth_hr(
    state: GuideState, sample: IbiSample, tau_s: float = DEFAULT_SMOOTH_TAU_S
) -> GuideState:
    """Fold one beat into the exponentially smoothed heart rate.

    The smoothing weight uses the interval itself as the elapsed time, so
    the time constant holds regardless of heart rate.
    """
    hr = sample.hr_bpm
    if state.smoothed_hr_bpm is None:
        return replace(state, smoothed_hr_bpm=hr)
    dt_s = sample.ibi_ms / 1000.0
    alpha = 1.0 - math.exp(-dt_s / tau_s)
    return replace(
        state, smoothed_hr_bpm=state.smoothed_hr_bpm + alpha * (hr - state.smoothed_hr_bpm)
    )


def current_br(state: GuideState, mode: GuideMode) -> float:
    """Breathing rate the guide runs at right now, given its mode."""
    if isinstance(mode, StaticMode):
        return mode.rate_bpm
    hr = state.smoothed_hr_bpm
    if hr is None:
        # no heartbeat seen yet: hold the fixed default until data arrives
        return min(max(6.0, mode.clamp[0]), mode.clamp[1])
    return target_br(hr, mode.delta, mode.clamp)


def step(state: GuideState, dt_ms: float, mode: GuideMode) -> GuideState:
    """Advance the guide by dt_ms. Phase moves by br/60000 * dt and never jumps."""
    if dt_ms < 0:
        raise DomainError("dt_ms must be nonnegative")
    br = current_br(state, mode)
    phase = (state.phase + br / 60000.0 * dt_ms) % 1.0
    return replace(state, phase=phase, br_bpm=br, t_ms=state.t_ms + dt_ms)


def phase_to_frame(
    phase: float, n_positions: int, sigma_positions: float = 0.8
) -> GuideFrame:
    """Render phase as a light bump travelling along a petal.

    The bump centre moves center->tip over the first half cycle and back
    over the second; intensity falls off as a Gaussian around the centre.
    """
    if n_positions < 2:
        raise DomainError("need at least 2 light positions")
    phase = phase % 1.0
    if phase < 0.5:
        pos = phase / 0.5 * (n_positions - 1)
        direction = Direction.OUTWARD
    else:
        pos = (1.0 - phase) / 0.5 * (n_positions - 1)
        direction = Direction.INWARD
    intensities = tuple(
        math.exp(-0.5 * ((i - pos) / sigma_positions) ** 2) for i in range(n_positions)
    )
    return GuideFrame(phase=phase, direction=direction, intensities=intensities)


def calibrate_interactive(
    initial_delta: float, events: Iterable[str]
) -> CalibrationResult:
    """Adjust the divider from a faster/slower/accept event stream.

    'faster' shrinks the divider (guide speeds up), 'slower' grows it; both
    are multiplicative steps and the divider stays within DELTA_BOUNDS.
    """
    if initial_delta <= 0:
        raise DomainError("initial_delta must be positive")
    lo, hi = DELTA_BOUNDS
    delta = min(max(initial_delta, lo), hi)
    for ev in events:
        if ev == "faster":
            delta = max(delta / DELTA_STEP, lo)
        elif ev == "slower":
            delta = min(delta * DELTA_STEP, hi)
        elif ev == "accept":
            return CalibrationResult(CalibrationMethod.INTERACTIVE, delta=delta)
        else:
            raise DomainError(f"unknown calibration event {ev!r}")
    raise CalibrationAbandonedError("calibration stream ended without accept")


def calibrate_resonance(
    candidate_rates: Sequence[float], ibi_per_candidate: Sequence[IbiSeries]
) -> CalibrationResult:
    """Pick the paced breathing rate that maximized RMSSD during the sweep.

    Ties go to the slower rate. Every candidate needs at least 30 s of data.
    """
    if not candidate_rates or len(candidate_rates) != len(ibi_per_candidate):
        raise DomainError("need equal-length, non-empty candidate lists")
    values = []
    for rate, series in zip(candidate_rates, ibi_per_candidate):
        if len(series) < 2:
            raise InsufficientDataError(f"no usable data for rate {rate}")
        span_ms = series.samples[-1].t_ms - series.samples[0].t_ms
        if span_ms < 30000:
            raise InsufficientDataError(
                f"rate {rate}: only {span_ms / 1000:.1f} s of data, need 30 s"
            )
        values.append(rmssd(series).value_s)
    # slower rate wins ties: sort by (-rmssd, rate) and take the head
    best_idx = min(range(len(values)), key=lambda i: (-values[i], candidate_rates[i]))
    return CalibrationResult(
        CalibrationMethod.RESONANCE_SWEEP,
        rate_bpm=candidate_rates[best_idx],
        per_candidate_rmssd=tuple(values),
    )
