"""N-back sequence generation, stimulus timing and scoring.

Letters appear for display_ms every onset_interval_ms. A position is a
target when the letter equals the one n steps before; participants press
left for targets, right otherwise. The first n positions of a sequence
have no defined answer and are never scored, nor is the optional training
sequence at the start of the first task.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, GenerationError

DEFAULT_ALPHABET = "BCDFGHJKLM"


class Key(Enum):
    TARGET = "target"
    NONTARGET = "nontarget"
    UNDEFINED = "undefined"  # first n positions


@dataclass(frozen=True)
class NBackConfig:
    n: int = 2
    letters_per_seq: int = 30
    seqs_per_task: int = 3
    training_seqs: int = 0
    display_ms: int = 500
    onset_interval_ms: int = 2000
    target_fraction: float = 1.0 / 3.0
    alphabet: str = DEFAULT_ALPHABET
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if self.letters_per_seq <= self.n:
            raise DomainError("letters_per_seq must exceed n")
        if not (0 < self.target_fraction < 1):
            raise DomainError("target_fraction must be in (0, 1)")
        if self.display_ms >= self.onset_interval_ms:
            raise DomainError("display_ms must be shorter than onset_interval_ms")
        if self.training_seqs not in (0, 1):
            raise DomainError("training_seqs must be 0 or 1")

    def onset_ms(self, position: int) -> int:
        return position * self.onset_interval_ms

    def offset_ms(self, position: int) -> int:
        return self.onset_ms(position) + self.display_ms


@dataclass(frozen=True)
class Sequence_:
    letters: tuple[str, ...]
    key: tuple[Key, ...]
    is_training: bool = False


@dataclass(frozen=True)
class StimulusPlan:
    sequences: tuple[Sequence_, ...]
    config: NBackConfig

    def scored_sequences(self) -> list[Sequence_]:
        return [s for s in self.sequences if not s.is_training]


@dataclass(frozen=True)
class ResponseEvent:
    seq_index: int
    position: int
    button: str  # "left" | "right"
    latency_ms: float

    def __post_init__(self):
        if self.button not in ("left", "right"):
            raise DomainError(f"button must be left/right, got {self.button!r}")
        if self.latency_ms < 0:
            raise DomainError("latency_ms must be nonnegative")


@dataclass(frozen=True)
class TaskScore:
    pct_correct: float
    per_sequence: tuple[float, ...]
    counts: dict = field(default_factory=dict)  # correct / incorrect / missed


def _key_for(letters: Sequence[str], n: int) -> tuple[Key, ...]:
    out = []
    for i, letter in enumerate(letters):
        if i < n:
            out.append(Key.UNDEFINED)
        elif letter == letters[i - n]:
            out.append(Key.TARGET)
        else:
            out.append(Key.NONTARGET)
    return tuple(out)


def _generate_sequence(config: NBackConfig, rng: np.random.Generator) -> tuple[str, ...]:
    """One letter sequence with exactly the requested number of targets."""
    n, length = config.n, config.letters_per_seq
    n_targets = round(config.target_fraction * (length - n))
    if n_targets > length - n:
        raise GenerationError("target count exceeds scorable positions")
    if len(set(config.alphabet)) < 2:
        raise GenerationError("alphabet must contain at least 2 distinct letters")
    target_positions = set(
        rng.choice(np.arange(n, length), size=n_targets, replace=False).tolist()
    )
    letters: list[str] = []
    for i in range(length):
        if i in target_positions:
            letters.append(letters[i - n])
        else:
            choices = [c for c in config.alphabet if i < n or c != letters[i - n]]
            letters.append(choices[rng.integers(len(choices))])
    return tuple(letters)


def generate_plan(config: NBackConfig) -> StimulusPlan:
    """Deterministic (per seed) stimulus plan: training sequences first."""
    rng = np.random.default_rng(config.seed)
    sequences = []
    for _ in range(config.training_seqs):
        letters = _generate_sequence(config, rng)
        sequences.append(Sequence_(letters, _key_for(letters, config.n), is_training=True))
    for _ in range(config.seqs_per_task):
        letters = _generate_sequence(config, rng)
        sequences.append(Sequence_(letters, _key_for(letters, config.n)))
    return StimulusPlan(tuple(sequences), config)


def score(plan: StimulusPlan, responses: Sequence[ResponseEvent], config: Optional[NBackConfig] = None) -> TaskScore:
    """Percentage correct over scored positions; unanswered positions count as missed and incorrect."""
    config = config or plan.config
    # first response per position wins
    by_pos: dict[tuple[int, int], ResponseEvent] = {}
    for r in responses:
        if r.seq_index >= len(plan.sequences):
            raise DomainError(f"response references sequence {r.seq_index}")
        if r.position >= len(plan.sequences[r.seq_index].letters):
            raise DomainError(f"response references position {r.position}")
        by_pos.setdefault((r.seq_index, r.position), r)

    correct = incorrect = missed = 0
    per_sequence = []
    for si, seq in enumerate(plan.sequences):
        seq_correct = seq_total = 0
        for pi, key in enumerate(seq.key):
            if key is Key.UNDEFINED:
                continue
            resp = by_pos.get((si, pi))
            ok = resp is not None and (
                (key is Key.TARGET and resp.button == "left")
                or (key is Key.NONTARGET and resp.button == "right")
            )
            if seq.is_training:
                continue  # responses accepted but never scored
            seq_total += 1
            if ok:
                seq_correct += 1
                correct += 1
            elif resp is None:
                missed += 1  # missed counts against pct_correct like an error
            else:
                incorrect += 1
        if not seq.is_training:
            per_sequence.append(100.0 * seq_correct / seq_total if seq_total else 0.0)

    scored = correct + incorrect + missed
    pct = 100.0 * correct / scored if scored else 0.0
    return TaskScore(
        pct_correct=pct,
        per_sequence=tuple(per_sequence),
        counts={"correct": correct, "incorrect": incorrect, "missed": missed},
    )


def delta_performance(score1: TaskScore, score2: TaskScore) -> float:
    """Second-task accuracy minus first-task accuracy, in percentage points."""
    return score2.pct_correct - score1.pct_correct
