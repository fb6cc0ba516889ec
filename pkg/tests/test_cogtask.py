import numpy as np
import pytest

from pacerlab.cogtask import (
    Key,
    NBackConfig,
    ResponseEvent,
    delta_performance,
    generate_plan,
    score,
)
from pacerlab.errors import DomainError


def test_config_validation():
    with pytest.raises(DomainError):
        NBackConfig(n=0)
    with pytest.raises(DomainError):
        NBackConfig(letters_per_seq=2)
    with pytest.raises(DomainError):
        NBackConfig(display_ms=2500)
    with pytest.raises(DomainError):
        NBackConfig(target_fraction=0.0)
    with pytest.raises(DomainError):
        NBackConfig(training_seqs=2)


def test_stimulus_timing_contract():
    cfg = NBackConfig()
    assert cfg.onset_ms(0) == 0
    assert cfg.onset_ms(7) == 14000
    assert cfg.offset_ms(7) == 14500


def test_plan_structure():
    plan = generate_plan(NBackConfig(training_seqs=1, seed=4))
    assert len(plan.sequences) == 4
    assert plan.sequences[0].is_training
    assert all(not s.is_training for s in plan.sequences[1:])
    assert all(len(s.letters) == 30 for s in plan.sequences)
    assert len(plan.scored_sequences()) == 3


def test_plan_keys_and_target_count():
    plan = generate_plan(NBackConfig(seed=9))
    for seq in plan.sequences:
        assert seq.key[0] is Key.UNDEFINED and seq.key[1] is Key.UNDEFINED
        for i in range(2, 30):
            expected = Key.TARGET if seq.letters[i] == seq.letters[i - 2] else Key.NONTARGET
            assert seq.key[i] is expected
        # a third of the 28 scorable positions, rounded
        assert sum(k is Key.TARGET for k in seq.key) == round(28 / 3)


def test_plan_deterministic_per_seed():
    assert generate_plan(NBackConfig(seed=3)) == generate_plan(NBackConfig(seed=3))
    assert generate_plan(NBackConfig(seed=3)) != generate_plan(NBackConfig(seed=4))


def _respond_all(plan, invert=False):
    out = []
    for si, seq in enumerate(plan.sequences):
        for pi, key in enumerate(seq.key):
            if key is Key.UNDEFINED:
                continue
            left = key is Key.TARGET
            if invert:
                left = not left
            out.append(ResponseEvent(si, pi, "left" if left else "right", 500.0))
    return out


def test_score_perfect_and_inverted():
    plan = generate_plan(NBackConfig(seed=1))
    assert score(plan, _respond_all(plan)).pct_correct == 100.0
    assert score(plan, _respond_all(plan, invert=True)).pct_correct == 0.0


def test_score_counts_sum_to_scored_positions():
    plan = generate_plan(NBackConfig(seed=2))
    responses = _respond_all(plan)[::2]  # answer only every other position
    s = score(plan, responses)
    assert sum(s.counts.values()) == 3 * 28
    assert s.counts["missed"] == 3 * 28 - len(responses)


def test_missed_positions_count_against_accuracy():
    plan = generate_plan(NBackConfig(seed=5))
    responses = _respond_all(plan)
    half = responses[: len(responses) // 2]
    assert score(plan, half).pct_correct == pytest.approx(50.0, abs=2.0)


def test_first_response_per_position_wins():
    plan = generate_plan(NBackConfig(seed=6))
    seq = plan.sequences[0]
    pi = next(i for i, k in enumerate(seq.key) if k is Key.TARGET)
    first = ResponseEvent(0, pi, "left", 400.0)
    second = ResponseEvent(0, pi, "right", 900.0)
    s = score(plan, [first, second])
    assert s.counts["correct"] == 1


def test_training_sequence_never_scored():
    plan = generate_plan(NBackConfig(training_seqs=1, seed=7))
    only_training = [r for r in _respond_all(plan) if r.seq_index == 0]
    s = score(plan, only_training)
    assert s.counts["correct"] == 0
    assert len(s.per_sequence) == 3


def test_score_rejects_out_of_plan_responses():
    plan = generate_plan(NBackConfig(seed=8))
    with pytest.raises(DomainError):
        score(plan, [ResponseEvent(9, 0, "left", 100.0)])
    with pytest.raises(DomainError):
        score(plan, [ResponseEvent(0, 99, "left", 100.0)])
    with pytest.raises(DomainError):
        ResponseEvent(0, 0, "middle", 100.0)


def test_random_responder_near_chance():
    rng = np.random.default_rng(12)
    total, correct = 0, 0
    seed = 0
    while total < 1000:
        plan = generate_plan(NBackConfig(seed=seed))
        seed += 1
        responses = [
            ResponseEvent(si, pi, "left" if rng.random() < 0.5 else "right", 500.0)
            for si, seq in enumerate(plan.sequences)
            for pi, k in enumerate(seq.key)
            if k is not Key.UNDEFINED
        ]
        s = score(plan, responses)
        correct += s.counts["correct"]
        total += sum(s.counts.values())
    assert 100.0 * correct / total == pytest.approx(50.0, abs=5.0)


def test_delta_performance():
    plan = generate_plan(NBackConfig(seed=1))
    s1 = score(plan, _respond_all(plan)[: 3 * 14])
    s2 = score(plan, _respond_all(plan))
    assert delta_performance(s1, s2) == pytest.approx(s2.pct_correct - s1.pct_correct)
