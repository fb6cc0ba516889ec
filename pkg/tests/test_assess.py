import numpy as np
import pytest

from pacerlab.assess import (
    ANXIETY_ABSENT,
    ANXIETY_PRESENT,
    DEFAULT_STAI_KEYS,
    USE_SUBSCALES,
    StaiShortResponse,
    UseResponse,
    load_questionnaires,
    score_stai6,
    score_use,
)
from pacerlab.errors import ValidationError

# item values that express minimum anxiety: 4 on "I feel calm"-type items,
# 1 on "I am worried"-type items
MIN_ANXIETY = tuple(4 if k == ANXIETY_ABSENT else 1 for k in DEFAULT_STAI_KEYS)
MAX_ANXIETY = tuple(1 if k == ANXIETY_ABSENT else 4 for k in DEFAULT_STAI_KEYS)


def test_stai_anchors():
    assert score_stai6(StaiShortResponse(MIN_ANXIETY)).value == 20.0
    assert score_stai6(StaiShortResponse(MAX_ANXIETY)).value == 80.0


def test_stai_reverse_keying_hand_worked():
    # all items at 2: absent items contribute 5-2=3, present items 2
    items = (2, 2, 2, 2, 2, 2)
    keyed_sum = 3 + 2 + 2 + 3 + 3 + 2
    assert score_stai6(StaiShortResponse(items)).value == pytest.approx(keyed_sum * 20.0 / 6.0)


def test_stai_monotone_in_anxiety_direction():
    rng = np.random.default_rng(21)
    for _ in range(300):
        items = [int(v) for v in rng.integers(1, 5, size=6)]
        base = score_stai6(StaiShortResponse(tuple(items))).value
        i = int(rng.integers(6))
        bumped = list(items)
        # move one item one step in the more-anxious direction when possible
        if DEFAULT_STAI_KEYS[i] == ANXIETY_PRESENT:
            bumped[i] = min(bumped[i] + 1, 4)
        else:
            bumped[i] = max(bumped[i] - 1, 1)
        after = score_stai6(StaiShortResponse(tuple(bumped))).value
        assert after >= base


def test_stai_validation():
    with pytest.raises(ValidationError):
        StaiShortResponse((1, 2, 3))
    with pytest.raises(ValidationError):
        StaiShortResponse((0, 1, 1, 1, 1, 1))
    with pytest.raises(ValidationError):
        StaiShortResponse((1, 1, 1, 1, 1, 1), item_keys=("bogus",) * 6)


def test_use_scoring_and_subscales():
    resp = UseResponse((4, 4, 4, 3, 3, 3, 2, 2, 2))
    out = score_use(resp)
    assert out.per_subscale == {"ease_of_use": 12, "ease_of_learning": 9, "satisfaction": 6}
    assert out.total == 27
    assert out.percent == pytest.approx(75.0)


def test_use_range_and_validation():
    assert score_use(UseResponse((1,) * 9)).total == 9
    assert score_use(UseResponse((4,) * 9)).total == 36
    with pytest.raises(ValidationError):
        UseResponse((1,) * 8)
    with pytest.raises(ValidationError):
        UseResponse((1, 1, 1, 1, 1, 1, 1, 1, 5))


def test_bundled_definitions_match_scoring_constants():
    data = load_questionnaires()
    stai = data["stai6"]
    assert tuple(item["key"] for item in stai["items"]) == DEFAULT_STAI_KEYS
    assert all("text_en" in item and "text_fr" in item for item in stai["items"])
    use = data["use"]
    assert [item["subscale"] for item in use["items"]] == [
        s for s in USE_SUBSCALES for _ in range(3)
    ]
