import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ppgtrack.preprocess import (Frame, bandpass, frame_stream, harmonic_bandpass,
                                 normalize_to_max, sum_previous_frames)

FS = 125.0


def amplitude_at(x, f, fs=FS):
    """Single-bin DFT amplitude of ``x`` at ``f`` (exact for on-grid tones)."""
    n = len(x)
    t = np.arange(n) / fs
    return 2 * abs(np.dot(x, np.exp(-2j * np.pi * f * t))) / n


def tone(f, n=1000, amp=1.0):
    return amp * np.sin(2 * np.pi * f * np.arange(n) / FS)


def test_dc_is_removed():
    y = bandpass(np.full(1000, 3.0))
    assert np.max(np.abs(y)) < 0.01 * 3.0


def test_passband_tone_kept():
    assert 0.9 <= amplitude_at(bandpass(tone(5.0)), 5.0) <= 1.1


def test_low_tone_rejected():
    # 0.1 Hz is not on the 8 s DFT grid; use a long signal so it is
    x = tone(0.1, n=12500)
    assert amplitude_at(bandpass(x), 0.1) < 0.1


def test_high_stopband_at_least_20db():
    x = tone(30.0)
    assert amplitude_at(bandpass(x), 30.0) < 0.1


def test_zero_phase():
    x = tone(2.0, n=4000)
    y = bandpass(x)
    inner = slice(1000, 3000)
    lag = np.argmax(np.correlate(y[inner], x[inner], "full")) - (2000 - 1)
    assert lag == 0


def test_bandpass_linearity(rng):
    x, y = rng.normal(size=1000), rng.normal(size=1000)
    lhs = bandpass(2.5 * x - 0.7 * y)
    rhs = 2.5 * bandpass(x) - 0.7 * bandpass(y)
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * np.max(np.abs(rhs))


@pytest.mark.parametrize("lo, hi", [(0, 13), (13, 0.8), (0.8, 62.5), (-1, 5)])
def test_bandpass_invalid_edges(lo, hi):
    with pytest.raises(ValueError):
        bandpass(np.zeros(100), lo, hi)


@pytest.mark.parametrize("n, expected", [(1000, 1), (1250, 2), (1999, 4), (2000, 5)])
def test_frame_count(n, expected):
    frames = frame_stream(np.arange(n, dtype=float))
    assert len(frames) == expected
    assert [f.samples[0] for f in frames] == [250.0 * i for i in range(expected)]


def test_frame_too_short():
    with pytest.raises(ValueError):
        frame_stream(np.zeros(999))


def test_frames_overlap_by_six_seconds(rng):
    frames = frame_stream(rng.normal(size=3000), channel=2)
    for a, b in zip(frames, frames[1:]):
        np.testing.assert_array_equal(a.samples[250:], b.samples[:750])
        assert b.window_index == a.window_index + 1 and a.channel == 2


def test_harmonic_bandpass_rejects_between_bands():
    # 1.875 Hz lies in the gap between [0.75, 1.75] and [2.0, 3.0]
    fr = Frame(tone(1.25) + tone(1.875), 0, 1)
    out = harmonic_bandpass(fr, 1.25)
    assert amplitude_at(out.samples, 1.875) < 0.1 * amplitude_at(fr.samples, 1.875)
    assert amplitude_at(out.samples, 1.25) == pytest.approx(1.0, abs=1e-9)


def test_harmonic_bandpass_keeps_tone_inside_second_band():
    # 2.875 Hz is within 0.5 Hz of 2 * 1.25 Hz, so it is retained
    fr = Frame(tone(1.25) + tone(2.875), 0, 1)
    out = harmonic_bandpass(fr, 1.25)
    assert amplitude_at(out.samples, 2.875) == pytest.approx(1.0, abs=1e-9)


def test_harmonic_bandpass_passes_second_harmonic():
    fr = Frame(tone(2.5), 0, 1)
    out = harmonic_bandpass(fr, 1.25)
    np.testing.assert_allclose(out.samples, fr.samples, atol=1e-9)


def test_harmonic_bandpass_nyquist_check():
    with pytest.raises(ValueError):
        harmonic_bandpass(Frame(np.zeros(1000)), 20.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.6, 4.0), st.integers(0, 2 ** 31))
def test_harmonic_bandpass_idempotent(f_prev, seed):
    x = np.random.default_rng(seed).normal(size=1000)
    once = harmonic_bandpass(Frame(x), f_prev)
    twice = harmonic_bandpass(once, f_prev)
    assert np.max(np.abs(twice.samples - once.samples)) <= 1e-9 * max(1.0, np.max(np.abs(once.samples)))


def test_sum_previous_frames():
    x = Frame(tone(1.25), 3, 1)
    z = Frame(np.zeros(1000), 2, 1)
    np.testing.assert_array_equal(sum_previous_frames(x, z, z).samples, x.samples)
    np.testing.assert_allclose(sum_previous_frames(x, x, x).samples, 3 * x.samples)


def test_sum_previous_frames_mismatch():
    with pytest.raises(ValueError):
        sum_previous_frames(Frame(np.zeros(1000)), Frame(np.zeros(999)), Frame(np.zeros(1000)))
    with pytest.raises(ValueError):
        sum_previous_frames(Frame(np.zeros(10)), Frame(np.zeros(10), channel=2), Frame(np.zeros(10)))


def test_normalize_to_max():
    out = normalize_to_max(Frame(np.array([0.0, 2.0, -4.0])))
    np.testing.assert_array_equal(out.samples, [0, 0.5, -1])
    np.testing.assert_array_equal(normalize_to_max(out).samples, out.samples)
    with pytest.raises(ValueError):
        normalize_to_max(Frame(np.zeros(5)))


def test_frame_channel_validated():
    with pytest.raises(ValueError):
        Frame(np.zeros(4), channel=3)
