"""
Band-pass filtering, windowing and the per-frame motion-artifact transforms.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import signal

from .signal_io import SLIDE_S, WINDOW_S

BAND_HZ = (0.8, 13.0)


@dataclass(frozen=True, eq=False)
class Frame:
    """One 8 s analysis window of a single PPG channel."""

    samples: np.ndarray
    window_index: int = 0
    channel: int = 1
    rate_hz: float = 125.0

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))
        if self.channel not in (1, 2):
            raise ValueError("channel must be 1 or 2")

    def __len__(self):
        return len(self.samples)

    def with_samples(self, samples):
        return replace(self, samples=samples)


def bandpass(x, lo_hz=BAND_HZ[0], hi_hz=BAND_HZ[1], rate_hz=125.0, order=4):
    """
    Zero-phase Butterworth band-pass.

    The filter is applied forward and backward (``sosfiltfilt``) so spectral
    peak locations are not shifted; the effective magnitude response is the
    square of the order-``order`` Butterworth response.
    """
    if not 0 < lo_hz < hi_hz < rate_hz / 2:
        raise ValueError(f"invalid band edges ({lo_hz}, {hi_hz}) for rate {rate_hz}")
    x = np.asarray(x, dtype=float)
    sos = signal.butter(order, [lo_hz, hi_hz], btype="bandpass", fs=rate_hz, output="sos")
    return signal.sosfiltfilt(sos, x)


def frame_stream(x, rate_hz=125.0, channel=1):
    """Split ``x`` into 8 s frames at a 2 s slide (6 s overlap)."""
    x = np.asarray(x, dtype=float)
    ws = int(round(WINDOW_S * rate_hz))
    step = int(round(SLIDE_S * rate_hz))
    if len(x) < ws:
        raise ValueError(f"signal of {len(x)} samples is shorter than one {ws}-sample window")
    count = (len(x) - ws) // step + 1
    return [Frame(x[i * step:i * step + ws].copy(), i, channel, rate_hz)
            for i in range(count)]


def harmonic_bandpass(frame: Frame, f_prev_hz, eps_hz=0.5, k_max=4):
    """
    Keep only the content within ``eps_hz`` of the first ``k_max`` multiples
    of ``f_prev_hz``.

    Implemented as an exact spectral mask on the frame's DFT, so the transform
    is a projection (applying it twice equals applying it once).
    """
    rate = frame.rate_hz
    if not f_prev_hz > 0:
        raise ValueError("f_prev_hz must be positive")
    if k_max * f_prev_hz + eps_hz >= rate / 2:
        raise ValueError(f"harmonic band {k_max}*{f_prev_hz}+{eps_hz} Hz exceeds Nyquist")
    x = frame.samples
    spec = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(len(x), d=1.0 / rate)
    keep = np.zeros(freqs.shape, dtype=bool)
    for k in range(1, k_max + 1):
        keep |= np.abs(freqs - k * f_prev_hz) <= eps_hz
    spec[~keep] = 0.0
    return frame.with_samples(np.fft.irfft(spec, n=len(x)))


def sum_previous_frames(current: Frame, prev1: Frame, prev2: Frame):
    """Element-wise sum of the current frame and the two preceding frames."""
    for p in (prev1, prev2):
        if len(p) != len(current):
            raise ValueError("frame lengths differ")
        if p.channel != current.channel:
            raise ValueError("frames come from different channels")
    return current.with_samples(current.samples + prev1.samples + prev2.samples)


def normalize_to_max(frame: Frame):
    peak = np.max(np.abs(frame.samples)) if len(frame) else 0.0
    if peak == 0:
        raise ValueError("cannot normalize an all-zero frame")
    return frame.with_samples(frame.samples / peak)
