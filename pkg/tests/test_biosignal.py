import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pacerlab import biosignal
from pacerlab.biosignal import (
    IbiSample,
    IbiSeries,
    artifact_filter,
    ibi_from_hr,
    mean_hr,
    rmssd,
    series_from_ibis,
    sliding_rmssd,
)
from pacerlab.errors import DomainError, InsufficientDataError


def naive_rmssd_s(ibis_ms):
    """Independent reference: straight transcription of the definition."""
    ibis_s = np.asarray(ibis_ms, dtype=float) / 1000.0
    d = np.diff(ibis_s)
    return float(np.sqrt(np.mean(d * d)))


def test_sample_rejects_nonpositive_interval():
    with pytest.raises(DomainError):
        IbiSample(t_ms=0, ibi_ms=0.0)
    with pytest.raises(DomainError):
        IbiSample(t_ms=0, ibi_ms=-5.0)


def test_sample_hr_roundtrip():
    s = IbiSample(t_ms=800, ibi_ms=800.0)
    assert s.hr_bpm == 75.0
    assert ibi_from_hr(75.0) == 800.0
    with pytest.raises(DomainError):
        ibi_from_hr(0.0)


def test_series_requires_increasing_timestamps():
    with pytest.raises(DomainError):
        IbiSeries([IbiSample(100, 800.0), IbiSample(100, 810.0)])
    series = IbiSeries([IbiSample(100, 800.0)])
    with pytest.raises(DomainError):
        series.append(IbiSample(50, 700.0))


def test_series_window_is_half_open():
    series = series_from_ibis([800.0, 800.0, 800.0])
    assert [s.t_ms for s in series.samples] == [800, 1600, 2400]
    assert len(series.window(800, 2400)) == 2
    assert len(series.window(800, 2401)) == 3


def test_rmssd_hand_worked():
    # intervals 800, 820, 790 ms: diffs +0.020 s and -0.030 s
    series = series_from_ibis([800.0, 820.0, 790.0])
    expected = math.sqrt((0.020**2 + 0.030**2) / 2)
    assert rmssd(series).value_s == pytest.approx(expected, abs=1e-15)
    assert rmssd(series).n_intervals == 2


def test_rmssd_constant_series_is_exactly_zero():
    series = series_from_ibis([850.0] * 50)
    assert rmssd(series).value_s == 0.0


def test_rmssd_needs_two_samples():
    with pytest.raises(InsufficientDataError):
        rmssd(series_from_ibis([800.0]))


def test_rmssd_matches_naive_oracle_on_random_series():
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = int(rng.integers(2, 200))
        ibis = rng.uniform(400.0, 1400.0, size=n)
        ours = rmssd(series_from_ibis(ibis)).value_s
        ref = naive_rmssd_s(ibis)
        assert ours == pytest.approx(ref, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(min_value=350.0, max_value=1500.0), min_size=2, max_size=40))
def test_rmssd_offset_invariant_and_scale_equivariant(ibis):
    base = rmssd(series_from_ibis(ibis)).value_s
    shifted = rmssd(series_from_ibis([x + 100.0 for x in ibis])).value_s
    scaled = rmssd(series_from_ibis([2.0 * x for x in ibis])).value_s
    assert shifted == pytest.approx(base, rel=1e-9, abs=1e-12)
    assert scaled == pytest.approx(2.0 * base, rel=1e-9, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(min_value=350.0, max_value=1500.0), min_size=2, max_size=40))
def test_rmssd_reversal_invariant(ibis):
    fwd = rmssd(series_from_ibis(ibis)).value_s
    rev = rmssd(series_from_ibis(list(reversed(ibis)))).value_s
    assert rev == pytest.approx(fwd, rel=1e-9, abs=1e-12)


def test_sliding_rmssd_windows_and_sparsity():
    series = series_from_ibis([1000.0] * 10)  # beats at 1..10 s
    values = sliding_rmssd(series, window_s=4.0, step_s=2.0)
    assert all(v.value_s == 0.0 for v in values)
    assert values[0].window == (1000.0, 5000.0)
    # a lone sample per window yields nothing
    assert sliding_rmssd(series_from_ibis([1000.0]), 4.0, 2.0) == []
    with pytest.raises(DomainError):
        sliding_rmssd(series, 0.0, 1.0)


def test_artifact_filter_drops_spike():
    ibis = [800.0] * 6 + [1500.0] + [800.0] * 6  # 1500 deviates 87% from the median
    kept = artifact_filter(series_from_ibis(ibis))
    assert 1500.0 not in kept.ibis_ms()
    assert len(kept) == 12


def test_artifact_filter_accepts_first_five_unconditionally():
    ibis = [800.0, 3000.0, 400.0, 2000.0, 900.0]
    kept = artifact_filter(series_from_ibis(ibis))
    assert len(kept) == 5


def test_artifact_filter_idempotent():
    rng = np.random.default_rng(3)
    ibis = rng.uniform(400.0, 1400.0, size=300)
    once = artifact_filter(series_from_ibis(ibis))
    twice = artifact_filter(once)
    assert once.ibis_ms() == twice.ibis_ms()


def test_artifact_filter_threshold_validation():
    with pytest.raises(DomainError):
        artifact_filter(series_from_ibis([800.0]), rel_threshold=1.5)


def test_mean_hr():
    assert mean_hr(series_from_ibis([800.0, 800.0])) == 75.0
    with pytest.raises(InsufficientDataError):
        mean_hr(IbiSeries([]))
