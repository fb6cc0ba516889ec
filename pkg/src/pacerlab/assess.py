"""Questionnaire scoring: 6-item state-anxiety short form and the 9-item
usability questionnaire (ease of use / ease of learning / satisfaction).

Item texts, reverse-keying and subscale membership ship in
``data/questionnaires.json`` so translations can be swapped without code
changes. Anxiety scores are prorated to the 20-80 range of the 20-item
full form (factor 20/6); higher means more anxious.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .errors import ValidationError

STAI_PRORATE = 20.0 / 6.0
USE_SUBSCALES = ("ease_of_use", "ease_of_learning", "satisfaction")

ANXIETY_PRESENT = "anxiety_present"
ANXIETY_ABSENT = "anxiety_absent"
DEFAULT_STAI_KEYS = (
    ANXIETY_ABSENT,   # calm
    ANXIETY_PRESENT,  # tense
    ANXIETY_PRESENT,  # upset
    ANXIETY_ABSENT,   # relaxed
    ANXIETY_ABSENT,   # content
    ANXIETY_PRESENT,  # worried
)


def load_questionnaires(path: Optional[Path] = None) -> dict:
    """Load questionnaire definitions (bundled file by default)."""
    if path is not None:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    ref = resources.files("pacerlab").joinpath("data/questionnaires.json")
    return json.loads(ref.read_text(encoding="utf-8"))


def _check_items(items: Sequence[int], count: int, label: str) -> None:
    if len(items) != count:
        raise ValidationError(f"{label} needs exactly {count} items, got {len(items)}")
    for v in items:
        if not isinstance(v, int) or not (1 <= v <= 4):
            raise ValidationError(f"{label} item out of range 1..4: {v!r}")


@dataclass(frozen=True)
class StaiShortResponse:
    items: tuple[int, ...]
    item_keys: tuple[str, ...] = DEFAULT_STAI_KEYS

    def __post_init__(self):
        _check_items(self.items, 6, "stai6")
        if len(self.item_keys) != 6:
            raise ValidationError("stai6 needs exactly 6 item keys")
        for k in self.item_keys:
            if k not in (ANXIETY_PRESENT, ANXIETY_ABSENT):
                raise ValidationError(f"unknown item key {k!r}")


@dataclass(frozen=True)
class StaiScore:
    value: float  # prorated to the 20..80 full-form range


@dataclass(frozen=True)
class UseResponse:
    items: tuple[int, ...]  # 3 ease_of_use, 3 ease_of_learning, 3 satisfaction

    def __post_init__(self):
        _check_items(self.items, 9, "use")


@dataclass(frozen=True)
class UseScore:
    total: int
    percent: float
    per_subscale: dict


def score_stai6(response: StaiShortResponse) -> StaiScore:
    """Reverse-key the anxiety-absent items, sum, prorate to 20..80."""
    keyed = [
        (5 - v) if k == ANXIETY_ABSENT else v
        for v, k in zip(response.items, response.item_keys)
    ]
    return StaiScore(value=sum(keyed) * STAI_PRORATE)


def score_use(response: UseResponse) -> UseScore:
    """Sum per subscale and overall; percent is total over the 36 maximum."""
    per = {
        name: sum(response.items[3 * i : 3 * i + 3])
        for i, name in enumerate(USE_SUBSCALES)
    }
    total = sum(per.values())
    return UseScore(total=total, percent=100.0 * total / 36.0, per_subscale=per)
