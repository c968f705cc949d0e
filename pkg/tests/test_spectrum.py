import numpy as np
import pytest
import scipy.signal
from hypothesis import given, settings, strategies as st

from helpers import brute_force_peaks, tones
from ppgtrack.spectrum import (N_POINTS, ArModel, SpectralFitError, SpectrumEstimate,
                               analyze_peaks, ar_psd, ar_spectrum, bpm_to_index, find_peaks,
                               fit_ar, index_to_bpm, is_stable, step_down)

FS = 125.0


def periodogram_argmax(x, n_points=N_POINTS):
    return int(np.argmax(np.abs(np.fft.rfft(x, n_points))))


def test_order_one_matches_lag_one_ratio(rng):
    e = rng.normal(size=20000)
    x = scipy.signal.lfilter([1.0], [1.0, -0.9], e)
    model = fit_ar(x, order=1)
    oracle = -np.dot(x[1:], x[:-1]) / np.dot(x, x)
    assert model.coefficients[1] == pytest.approx(-0.9, abs=0.05)
    assert model.coefficients[1] == pytest.approx(oracle, abs=0.01)


def test_order_500_is_stable(rng):
    x = rng.normal(size=1000)
    model = fit_ar(x, 500)
    assert len(model.coefficients) == 501 and model.coefficients[0] == 1.0
    # independent stability check: step the polynomial down from scratch
    k = step_down(model.coefficients)
    assert np.all(np.abs(k) < 1)
    np.testing.assert_allclose(k, model.reflection, atol=1e-6)


def test_constant_frame_is_singular():
    with pytest.raises(SpectralFitError):
        fit_ar(np.full(1000, 2.0), 500)


def test_short_frame():
    with pytest.raises(SpectralFitError):
        fit_ar(np.ones(500), 500)


def test_unstable_model_rejected():
    bad = ArModel(np.array([1.0, -2.0]), 1.0, np.array([-2.0]))
    assert not is_stable(bad)
    with pytest.raises(SpectralFitError):
        ar_psd(bad)


def test_two_hertz_tone_peak():
    x = tones([(2.0, 1.0, 0.3)])
    spec = ar_spectrum(x)
    peak = int(np.argmax(spec.half))
    assert abs(peak - 2.0 * N_POINTS / FS) <= 2
    assert abs(peak - periodogram_argmax(x)) <= 2


def test_two_tone_local_maxima():
    spec = ar_spectrum(tones([(1.25, 1.0, 0.0), (3.0, 1.0, 1.0)]))
    idx = [p.index for p in find_peaks(spec, 0.6, 4.0) if p.magnitude > 0.3]
    assert len(idx) == 2
    assert abs(idx[0] - 327.68) <= 2 and abs(idx[1] - 786.43) <= 2


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_spectrum_normalized(seed):
    x = np.random.default_rng(seed).normal(size=1000)
    spec = ar_spectrum(x, order=50)
    assert spec.magnitudes.max() == 1.0
    assert spec.magnitudes.min() >= 0
    assert spec.n_points == N_POINTS
    # real input: the spectrum is symmetric about N/2
    np.testing.assert_array_equal(spec.magnitudes[1:N_POINTS // 2],
                                  spec.magnitudes[:N_POINTS // 2:-1])


def test_find_peaks_small_example():
    spec = SpectrumEstimate(np.array([0.1, 0.5, 0.1, 1.0, 0.1, 0.0, 0.0, 0.0]), rate_hz=8.0)
    peaks = find_peaks(spec, 0.0, 4.0)
    assert [p.index for p in peaks] == [1, 3]
    assert peaks[1].prominence == pytest.approx(0.9)
    assert peaks[0].prominence == pytest.approx(0.4)


def test_monotone_has_no_peaks():
    idx, prom, width = analyze_peaks(np.linspace(0, 1, 50))
    assert idx.size == prom.size == width.size == 0


def test_plateau_reports_left_edge():
    idx, prom, width = analyze_peaks([0.1, 0.8, 0.8, 0.1])
    assert idx.tolist() == [1]
    assert prom[0] == pytest.approx(0.7)
    assert width[0] == pytest.approx(2.0)


def test_find_peaks_band_errors():
    spec = SpectrumEstimate(np.ones(N_POINTS))
    with pytest.raises(ValueError):
        find_peaks(spec, 3.0, 1.0)
    with pytest.raises(ValueError):
        find_peaks(spec, 0.0, 70.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=0, max_size=60))
def test_peaks_match_brute_force_with_ties(values):
    x = np.array(values, dtype=float) / 6
    idx, prom, _ = analyze_peaks(x)
    ref_idx, ref_prom = brute_force_peaks(x)
    assert idx.tolist() == ref_idx
    assert prom.tolist() == ref_prom


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(3, 3000))
def test_widths_match_scipy(seed, n):
    x = np.random.default_rng(seed).random(n)
    idx, prom, width = analyze_peaks(x)
    ref, _ = scipy.signal.find_peaks(x)
    np.testing.assert_array_equal(idx, ref)
    np.testing.assert_array_equal(prom, scipy.signal.peak_prominences(x, ref)[0])
    np.testing.assert_allclose(width, scipy.signal.peak_widths(x, ref, 0.5)[0], rtol=1e-12)


def test_prominence_bounded_by_magnitude(rng):
    spec = ar_spectrum(rng.normal(size=1000), order=100)
    for p in find_peaks(spec):
        assert 0 < p.prominence <= p.magnitude
        assert p.width > 0
        assert p.magnitude == spec.magnitudes[p.index]


def test_index_bpm_conversion():
    assert index_to_bpm(328) == pytest.approx(75.07, abs=0.005)
    assert index_to_bpm(0) == 0
    for i in (1, 328, 1000, N_POINTS // 2):
        assert bpm_to_index(index_to_bpm(i)) == pytest.approx(i, abs=1e-9)
    with pytest.raises(ValueError):
        index_to_bpm(N_POINTS // 2 + 1)
    with pytest.raises(ValueError):
        bpm_to_index(-1)
