import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import tones
from ppgtrack.candidates import (DELTA, locate_harmonic, near_count, refine_location,
                                 select_candidates)
from ppgtrack.spectrum import N_POINTS, SpectrumEstimate, ar_spectrum

FS = 125.0


def bumps(peaks, n=N_POINTS, width=3.0):
    """Symmetric spectrum with Gaussian bumps ``(index, height)`` on a tiny floor."""
    i = np.arange(n // 2 + 1)
    half = np.full(i.shape, 1e-3)
    for c, h in peaks:
        half = np.maximum(half, h * np.exp(-0.5 * ((i - c) / width) ** 2))
    full = np.concatenate([half, half[1:-1][::-1]])
    return SpectrumEstimate(full, FS)


def test_threshold_and_no_dedup():
    s1 = bumps([(500, 1.0), (700, 0.25)])
    s2 = bumps([(505, 0.6)])
    cset = select_candidates(s1, s2)
    assert [(c.origin_channel, c.index) for c in cset] == [(1, 500), (2, 505)]
    assert [p.index for p in cset.cp1] == [500]


def test_only_the_maximum_survives():
    s = bumps([(400, 1.0), (600, 0.3), (800, 0.2)])
    cset = select_candidates(s, bumps([]))
    assert [c.index for c in cset] == [400]


def test_identical_channels_double_the_set():
    s = bumps([(300, 1.0), (620, 0.7), (900, 0.5)])
    cset = select_candidates(s, s)
    assert len(cset) == 2 * len(cset.cp1) == 6
    assert all(m.magnitude > 0.3 for m in cset)


def test_mismatched_spectra():
    with pytest.raises(ValueError):
        select_candidates(bumps([(300, 1.0)]), SpectrumEstimate(np.ones(1024), FS))


def test_harmonic_of_two_tone_frame():
    x = tones([(1.25, 1.0, 0.0), (2.5, 0.6, 0.4)])
    spec = ar_spectrum(x)
    h, mag = locate_harmonic(spec, 328, 1)
    assert 620 <= h <= 692
    oracle = int(np.argmax(np.abs(np.fft.rfft(x, N_POINTS))[620:693])) + 620
    assert abs(h - oracle) <= 2 and abs(h - 655.36) <= 2
    assert mag == spec.magnitudes[h]


def test_flat_spectrum_ties_go_left():
    flat = SpectrumEstimate(np.ones(N_POINTS), FS)
    assert locate_harmonic(flat, 300, 2) == (3 * (300 - DELTA), 1.0)
    assert refine_location(flat, 300) == (300 - DELTA, 1.0)


def test_harmonic_out_of_range():
    spec = bumps([(300, 1.0)])
    assert locate_harmonic(spec, 9000, 1) == (0, 0.0)
    with pytest.raises(ValueError):
        locate_harmonic(spec, 300, 4)


def test_refine_against_own_and_other_channel():
    s1 = bumps([(500, 1.0)])
    s2 = bumps([(505, 0.6)])
    assert refine_location(s1, 500) == (500, 1.0)
    idx, mag = refine_location(s2, 500)
    window = s2.magnitudes[500 - DELTA:500 + DELTA + 1]
    assert idx == 500 - DELTA + int(np.argmax(window)) == 505
    assert mag == pytest.approx(0.6)


@pytest.mark.parametrize("cp, others, expected", [
    (500, [505, 530], 1), (500, [524], 0), (500, [], 0), (500, [476, 477, 523], 2),
])
def test_near_count(cp, others, expected):
    assert near_count(cp, others) == expected


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 300), max_size=12), st.lists(st.integers(0, 300), max_size=12))
def test_near_count_pair_symmetry(a, b):
    # pairs counted from channel 1 equal pairs counted from channel 2
    assert sum(near_count(x, b) for x in a) == sum(near_count(y, a) for y in b)


def test_stored_harmonics_are_consistent(rng):
    x = tones([(1.4, 1.0, 0.0), (2.8, 0.5, 0.2), (4.2, 0.3, 0.1)]) + rng.normal(0, 0.1, 1000)
    y = tones([(1.4, 0.8, 0.5), (2.2, 0.6, 0.2)]) + rng.normal(0, 0.1, 1000)
    s1, s2 = ar_spectrum(x, channel=1), ar_spectrum(y, channel=2)
    cset = select_candidates(s1, s2)
    assert len(cset) >= 2
    for c in cset:
        for i, s in enumerate((s1, s2)):
            assert abs(c.refined_index[i] - c.index) <= DELTA
            assert c.refined_magnitude[i] == s.magnitudes[c.refined_index[i]]
            for k in range(3):
                h = c.harmonic_index[i, k]
                assert (k + 2) * (c.index - DELTA) <= h <= (k + 2) * (c.index + DELTA)
                assert c.harmonic_magnitude[i, k] == s.magnitudes[h]
