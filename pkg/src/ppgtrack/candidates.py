"""
Candidate heart-rate peaks of one window and their spectral measurements.

Candidates are the spectral peaks of either channel whose normalized magnitude
exceeds a threshold. Both channels' peaks are kept as separate entries even
when they sit at nearly the same index, because each is measured against its
own origin channel (width, prominence, uniqueness).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectrum import SEARCH_BAND_HZ, SpectralPeak, SpectrumEstimate, find_peaks

THRESHOLD = 0.3
DELTA = 18
NEAR_RADIUS = 24
N_HARMONICS = 3


@dataclass(frozen=True, eq=False)
class Candidate:
    origin_channel: int
    index: int
    magnitude: float                 # origin spectrum at ``index``
    width: float
    prominence: float
    refined_index: tuple             # (ch1, ch2)
    refined_magnitude: tuple         # (ch1, ch2)
    harmonic_index: np.ndarray       # (2, 3) int, rows = channel, cols = k
    harmonic_magnitude: np.ndarray   # (2, 3)


@dataclass(frozen=True)
class CandidateSet:
    members: list
    cp1: list = field(default_factory=list)
    cp2: list = field(default_factory=list)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def peaks(self, channel):
        return self.cp1 if channel == 1 else self.cp2

    @property
    def indices(self):
        return np.array([c.index for c in self.members], dtype=int)


def _window_argmax(mags, lo, hi):
    half_top = len(mags) // 2
    lo = max(int(lo), 0)
    hi = min(int(hi), half_top)
    if lo > hi:
        return 0, 0.0
    seg = mags[lo:hi + 1]
    j = int(np.argmax(seg))   # first maximum = leftmost on ties
    return lo + j, float(seg[j])


def refine_location(spec: SpectrumEstimate, cp_index, delta=DELTA):
    """Largest spectral sample within ``delta`` indices of ``cp_index``."""
    return _window_argmax(spec.magnitudes, cp_index - delta, cp_index + delta)


def locate_harmonic(spec: SpectrumEstimate, cp_index, k, delta=DELTA):
    """
    Harmonic ``k`` of a candidate: the argmax over
    ``[(k+1)(cp - delta), (k+1)(cp + delta)]``.

    The window is clipped to ``[0, N/2]``; a window entirely above ``N/2``
    gives ``(0, 0.0)``.
    """
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2 or 3")
    m = k + 1
    return _window_argmax(spec.magnitudes, m * (cp_index - delta), m * (cp_index + delta))


def near_count(candidate, other_channel_peaks, radius=NEAR_RADIUS):
    """Number of other-channel peaks strictly closer than ``radius`` indices."""
    idx = candidate.index if hasattr(candidate, "index") else int(candidate)
    return sum(1 for p in other_channel_peaks
               if abs(idx - getattr(p, "index", p)) < radius)


def measure_candidate(origin, peak: SpectralPeak, spectra, delta=DELTA):
    refined = [refine_location(s, peak.index, delta) for s in spectra]
    h_idx = np.zeros((2, N_HARMONICS), dtype=int)
    h_mag = np.zeros((2, N_HARMONICS))
    for i, s in enumerate(spectra):
        for k in range(1, N_HARMONICS + 1):
            h_idx[i, k - 1], h_mag[i, k - 1] = locate_harmonic(s, peak.index, k, delta)
    return Candidate(
        origin_channel=origin,
        index=peak.index,
        magnitude=peak.magnitude,
        width=peak.width,
        prominence=peak.prominence,
        refined_index=(refined[0][0], refined[1][0]),
        refined_magnitude=(refined[0][1], refined[1][1]),
        harmonic_index=h_idx,
        harmonic_magnitude=h_mag,
    )


def select_candidates(spec1: SpectrumEstimate, spec2: SpectrumEstimate,
                      threshold=THRESHOLD, band_hz=SEARCH_BAND_HZ, delta=DELTA):
    """
    Candidate set of a window: peaks of each channel above ``threshold``.

    Returns the measured candidates of channel 1 followed by channel 2, each in
    increasing index order. An empty set is a valid result.
    """
    if spec1.n_points != spec2.n_points or spec1.rate_hz != spec2.rate_hz:
        raise ValueError("spectra differ in size or sample rate")
    spectra = (spec1, spec2)
    cps = [[p for p in find_peaks(s, *band_hz) if p.magnitude > threshold]
           for s in spectra]
    members = [measure_candidate(ch, p, spectra, delta)
               for ch, peaks in ((1, cps[0]), (2, cps[1])) for p in peaks]
    return CandidateSet(members, cps[0], cps[1])
