"""Inter-beat-interval data model, artifact cleaning and RMSSD computation.

All timestamps are session-relative milliseconds; intervals are stored in
milliseconds and RMSSD is reported in seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from .errors import DomainError, InsufficientDataError


class SignalSource(Enum):
    LIVE = "live"
    REPLAY = "replay"
    SIMULATED = "simulated"


@dataclass(frozen=True)
class IbiSample:
    """One inter-beat interval, stamped at the time the beat was observed."""

    t_ms: int
    ibi_ms: float

    def __post_init__(self):
        if self.ibi_ms <= 0:
            raise DomainError(f"ibi_ms must be positive, got {self.ibi_ms}")

    @property
    def hr_bpm(self) -> float:
        return 60000.0 / self.ibi_ms


@dataclass
class IbiSeries:
    """Ordered inter-beat intervals from one source. May be empty."""

    samples: list[IbiSample] = field(default_factory=list)
    source: SignalSource = SignalSource.LIVE

    def __post_init__(self):
        for a, b in zip(self.samples, self.samples[1:]):
            if b.t_ms <= a.t_ms:
                raise DomainError(
                    f"timestamps must be strictly increasing ({a.t_ms} -> {b.t_ms})"
                )

    def __len__(self) -> int:
        return len(self.samples)

    def append(self, sample: IbiSample) -> None:
        if self.samples and sample.t_ms <= self.samples[-1].t_ms:
            raise DomainError("appended sample must advance the timestamp")
        self.samples.append(sample)

    def ibis_ms(self) -> list[float]:
        return [s.ibi_ms for s in self.samples]

    def window(self, start_ms: float, end_ms: float) -> "IbiSeries":
        """Samples with start_ms <= t_ms < end_ms (half-open)."""
        return IbiSeries(
            [s for s in self.samples if start_ms <= s.t_ms < end_ms], self.source
        )


@dataclass(frozen=True)
class RmssdValue:
    """RMSSD in seconds, with the successive-difference count behind it."""

    value_s: float
    n_intervals: int
    window: Optional[tuple[float, float]] = None


def ibi_from_hr(hr_bpm: float) -> float:
    """Convert an instantaneous heart rate to the interval it implies, in ms."""
    if hr_bpm <= 0:
        raise DomainError(f"hr_bpm must be positive, got {hr_bpm}")
    return 60000.0 / hr_bpm


def rmssd(series: IbiSeries) -> RmssdValue:
    """Root mean square of successive interval differences, in seconds."""
    if len(series) < 2:
        raise InsufficientDataError("rmssd needs at least 2 samples")
    ibis_s = [s.ibi_ms / 1000.0 for s in series.samples]
    diffs = [b - a for a, b in zip(ibis_s, ibis_s[1:])]
    value = math.sqrt(sum(d * d for d in diffs) / len(diffs))
    return RmssdValue(value_s=value, n_intervals=len(diffs))


def sliding_rmssd(
    series: IbiSeries, window_s: float, step_s: float
) -> list[RmssdValue]:
    """RMSSD over half-open windows [start, start+window); sparse windows are skipped."""
    if window_s <= 0 or step_s <= 0:
        raise DomainError("window_s and step_s must be positive")
    if len(series) == 0:
        return []
    t0 = series.samples[0].t_ms
    t_end = series.samples[-1].t_ms
    out: list[RmssdValue] = []
    start = float(t0)
    while start <= t_end:
        end = start + window_s * 1000.0
        chunk = series.window(start, end)
        if len(chunk) >= 2:
            r = rmssd(chunk)
            out.append(RmssdValue(r.value_s, r.n_intervals, window=(start, end)))
        start += step_s * 1000.0
    return out


def artifact_filter(series: IbiSeries, rel_threshold: float = 0.2) -> IbiSeries:
    """Drop intervals deviating from the running median of the last 5 accepted ones.

    The first 5 samples are always accepted. Idempotent: accepted samples form
    the reference for subsequent decisions, so a second pass changes nothing.
    """
    if not (0 < rel_threshold < 1):
        raise DomainError("rel_threshold must be in (0, 1)")
    accepted: list[IbiSample] = []
    for s in series.samples:
        if len(accepted) < 5:
            accepted.append(s)
            continue
        ref = sorted(x.ibi_ms for x in accepted[-5:])[2]
        if abs(s.ibi_ms - ref) <= rel_threshold * ref:
            accepted.append(s)
    return IbiSeries(accepted, series.source)


def mean_hr(series: IbiSeries) -> float:
    """Mean heart rate in bpm over the whole series."""
    if len(series) == 0:
        raise InsufficientDataError("mean_hr needs a non-empty series")
    mean_ibi = sum(series.ibis_ms()) / len(series)
    return 60000.0 / mean_ibi


def series_from_ibis(
    ibis_ms: Iterable[float],
    source: SignalSource = SignalSource.SIMULATED,
    t0_ms: int = 0,
) -> IbiSeries:
    """Build a series whose timestamps accumulate the intervals themselves."""
    samples = []
    t = float(t0_ms)
    for ibi in ibis_ms:
        t += ibi
        samples.append(IbiSample(t_ms=int(round(t)), ibi_ms=float(ibi)))
    return IbiSeries(samples, source)
