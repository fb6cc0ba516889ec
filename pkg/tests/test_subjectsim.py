import numpy as np
import pytest

from pacerlab import guide
from pacerlab.biosignal import IbiSeries, rmssd
from pacerlab.errors import DomainError
from pacerlab.subjectsim import (
    SimulatedSubject,
    SubjectParams,
    SubjectState,
    amplitude,
    next_ibi,
    respond_nback,
)


def test_params_validation():
    with pytest.raises(DomainError):
        SubjectParams(ibi_base_ms=0.0)
    with pytest.raises(DomainError):
        SubjectParams(f_res_hz=0.3)
    with pytest.raises(DomainError):
        SubjectParams(nback_skill=0.0)
    with pytest.raises(DomainError):
        SubjectParams(stress_hrv_atten=1.5)


def test_amplitude_peak_and_half_width():
    p = SubjectParams(a_max_ms=60.0, f_res_hz=0.09, width_hz=0.02)
    assert amplitude(p, 0.09) == 60.0
    assert amplitude(p, 0.09 + 0.02) == pytest.approx(30.0)
    assert amplitude(p, 0.09 - 0.02) == pytest.approx(30.0)
    assert amplitude(p, 0.25) < 4.0
    with pytest.raises(DomainError):
        amplitude(p, 0.0)


def test_beats_deterministic_per_seed():
    a = SimulatedSubject(SubjectParams(seed=5))
    b = SimulatedSubject(SubjectParams(seed=5))
    for _ in range(50):
        assert a.beat().ibi_ms == b.beat().ibi_ms
    c = SimulatedSubject(SubjectParams(seed=6))
    assert [c.beat().ibi_ms for _ in range(10)] != [
        SimulatedSubject(SubjectParams(seed=5)).beat().ibi_ms for _ in range(10)
    ]


def test_interval_floor_holds_under_extreme_noise():
    subject = SimulatedSubject(SubjectParams(noise_sd_ms=2000.0, seed=0))
    samples = [subject.beat() for _ in range(500)]
    assert min(s.ibi_ms for s in samples) >= 300.0


def test_stress_raises_heart_rate_and_attenuates_swing():
    calm = SimulatedSubject(SubjectParams(seed=1, noise_sd_ms=0.0))
    tense = SimulatedSubject(SubjectParams(seed=1, noise_sd_ms=0.0))
    calm_ibis = [calm.beat().ibi_ms for _ in range(300)]
    tense_ibis = [tense.beat(stressed=True).ibi_ms for _ in range(300)]
    assert np.mean(tense_ibis) < np.mean(calm_ibis)
    assert np.std(tense_ibis) < np.std(calm_ibis)


def _guided_rmssd(rate_bpm: float, seed: int = 0, seconds: float = 120.0) -> float:
    subject = SimulatedSubject(SubjectParams(seed=seed))
    state = guide.GuideState()
    samples = []
    while subject.state.t_ms < seconds * 1000.0:
        beat = subject.beat(guide_phase=state.phase)
        state = guide.step(state, beat.ibi_ms, guide.StaticMode(rate_bpm))
        samples.append(beat)
    return rmssd(IbiSeries(samples)).value_s


def test_resonant_pacing_maximizes_variability():
    # 5.4 breaths/min = 0.09 Hz, the default resonance frequency
    near = _guided_rmssd(5.4)
    far = _guided_rmssd(10.0)
    assert near > 2.0 * far


def test_subject_tracks_guide_frequency():
    subject = SimulatedSubject(SubjectParams(seed=2, noise_sd_ms=0.0))
    state = guide.GuideState()
    while subject.state.t_ms < 120000.0:
        beat = subject.beat(guide_phase=state.phase)
        state = guide.step(state, beat.ibi_ms, guide.StaticMode(5.5))
    assert subject.state.f_followed_hz == pytest.approx(5.5 / 60.0, rel=0.05)


def test_unguided_subject_breathes_spontaneously():
    subject = SimulatedSubject(SubjectParams(seed=3))
    for _ in range(400):
        subject.beat()
    assert subject.state.f_followed_hz == pytest.approx(0.25, rel=0.05)


def test_respond_nback_skill_extremes():
    rng = np.random.default_rng(0)
    sharp = SubjectParams(nback_skill=1.0)
    for is_target in (True, False):
        for _ in range(20):
            button, latency = respond_nback(sharp, is_target, rng)
            assert button == ("left" if is_target else "right")
            assert 300.0 <= latency <= 1500.0


def test_respond_nback_skill_rate():
    rng = np.random.default_rng(1)
    p = SubjectParams(nback_skill=0.8)
    hits = sum(respond_nback(p, True, rng)[0] == "left" for _ in range(2000))
    assert hits / 2000 == pytest.approx(0.8, abs=0.03)


def test_next_ibi_is_pure_given_rng_state():
    p = SubjectParams(seed=0)
    s0 = SubjectState()
    sample1, _ = next_ibi(p, s0, None, False, np.random.default_rng(9))
    sample2, _ = next_ibi(p, s0, None, False, np.random.default_rng(9))
    assert sample1 == sample2
