"""Inter-beat-interval ingestion.

One wire format for every live sensor: UTF-8 lines of
``{"t_ms":<int>,"ibi_ms":<number>}``. Replay files are CSV with header
``t_ms,ibi_ms``. Malformed lines are counted and skipped; a stream that is
more than 10% garbage is aborted with a diagnostic.
"""

from __future__ import annotations

import csv
import json
import socket
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Optional, Union

from ..biosignal import IbiSample
from ..errors import DomainError, PacerlabError
from ..subjectsim import SimulatedSubject, SubjectParams
from .clock import Clock, VirtualClock

MALFORMED_FRACTION_LIMIT = 0.10
_MALFORMED_CHECK_MIN = 10


class StreamAbortedError(PacerlabError):
    """Too many malformed lines on an ingestion stream."""


class ConnectionFailedError(PacerlabError):
    """The configured source could not be reached or read."""


@dataclass
class TcpSource:
    port: int


@dataclass
class ReplaySource:
    path: Path
    speed: float = 1.0

    def __post_init__(self):
        if self.speed <= 0:
            raise DomainError("replay speed must be positive")


@dataclass
class SimulatedSource:
    params: SubjectParams = field(default_factory=SubjectParams)
    guide_phase: Optional[Callable[[], Optional[float]]] = None  # closes the loop
    stressed: Callable[[], bool] = lambda: False
    duration_ms: float = 300000.0


SourceConfig = Union[TcpSource, ReplaySource, SimulatedSource]


class _MalformedCounter:
    def __init__(self):
        self.total = 0
        self.malformed = 0

    def ok(self) -> None:
        self.total += 1

    def bad(self, line: str) -> None:
        self.total += 1
        self.malformed += 1
        if (
            self.total >= _MALFORMED_CHECK_MIN
            and self.malformed / self.total > MALFORMED_FRACTION_LIMIT
        ):
            raise StreamAbortedError(
                f"{self.malformed}/{self.total} malformed lines "
                f"(last: {line[:80]!r}); aborting stream"
            )


def _parse_wire_line(line: str) -> IbiSample:
    obj = json.loads(line)
    t_ms = obj["t_ms"]
    ibi_ms = obj["ibi_ms"]
    if not isinstance(t_ms, int) or isinstance(t_ms, bool):
        raise ValueError("t_ms must be an integer")
    if not isinstance(ibi_ms, (int, float)) or isinstance(ibi_ms, bool):
        raise ValueError("ibi_ms must be a number")
    return IbiSample(t_ms=t_ms, ibi_ms=float(ibi_ms))


def ingest_lines(lines, counter: Optional[_MalformedCounter] = None) -> Iterator[IbiSample]:
    """Wire-protocol lines -> samples, skipping malformed ones in order."""
    counter = counter or _MalformedCounter()
    last_t: Optional[int] = None
    for line in lines:
        line = line.strip()
        if not line:
            continue
        try:
            sample = _parse_wire_line(line)
            if last_t is not None and sample.t_ms <= last_t:
                raise ValueError("timestamp not increasing")
        except (ValueError, KeyError, TypeError, DomainError, json.JSONDecodeError):
            counter.bad(line)
            continue
        counter.ok()
        last_t = sample.t_ms
        yield sample


def _ingest_replay(source: ReplaySource, clock: Clock) -> Iterator[IbiSample]:
    try:
        fh = open(source.path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ConnectionFailedError(f"cannot open replay file {source.path}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["t_ms", "ibi_ms"]:
            raise ConnectionFailedError(f"bad replay header {header}")
        counter = _MalformedCounter()
        last_t: Optional[float] = None
        for row in reader:
            try:
                t_ms, ibi_ms = int(row[0]), float(row[1])
                sample = IbiSample(t_ms=t_ms, ibi_ms=ibi_ms)
                if last_t is not None and t_ms <= last_t:
                    raise ValueError("timestamp not increasing")
            except (ValueError, IndexError, DomainError):
                counter.bad(",".join(row))
                continue
            counter.ok()
            if last_t is not None:
                clock.sleep_ms((t_ms - last_t) / source.speed)
            last_t = t_ms
            yield sample


def _ingest_simulated(source: SimulatedSource, clock: Clock) -> Iterator[IbiSample]:
    subject = SimulatedSubject(source.params)
    while subject.state.t_ms < source.duration_ms:
        phase = source.guide_phase() if source.guide_phase else None
        sample = subject.beat(guide_phase=phase, stressed=source.stressed())
        clock.sleep_ms(sample.ibi_ms)
        yield sample


def _ingest_tcp(source: TcpSource) -> Iterator[IbiSample]:
    try:
        server = socket.create_server(("127.0.0.1", source.port))
    except OSError as exc:
        raise ConnectionFailedError(f"cannot listen on port {source.port}") from exc
    with server:
        conn, _ = server.accept()
        with conn, conn.makefile("r", encoding="utf-8") as fh:
            yield from ingest_lines(fh)


def ingest(source: SourceConfig, clock: Optional[Clock] = None) -> Iterator[IbiSample]:
    """Stream well-formed samples from a source, in timestamp order."""
    clock = clock or VirtualClock()
    if isinstance(source, ReplaySource):
        return _ingest_replay(source, clock)
    if isinstance(source, SimulatedSource):
        return _ingest_simulated(source, clock)
    if isinstance(source, TcpSource):
        return _ingest_tcp(source)
    raise DomainError(f"unknown source {source!r}")
