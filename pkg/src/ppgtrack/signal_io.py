"""
Recording containers, CSV loaders and a synthetic PPG generator.

Recordings are headered (or headerless) comma-separated files with one row per
sample. Ground truth is one BPM value per line, aligned with the 8 s / 2 s
windowing used everywhere else in the package.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

WINDOW_S = 8.0
SLIDE_S = 2.0
BPM_RANGE = (30.0, 250.0)


class DataError(ValueError):
    """Raised for malformed or out-of-range input files."""


@dataclass(frozen=True, eq=False)
class Recording:
    """Two PPG channels sampled at a fixed rate."""

    ppg1: np.ndarray
    ppg2: np.ndarray
    sample_rate_hz: float = 125.0
    id: str = ""

    def __post_init__(self):
        ppg1 = np.asarray(self.ppg1, dtype=float)
        ppg2 = np.asarray(self.ppg2, dtype=float)
        if ppg1.ndim != 1 or ppg2.ndim != 1:
            raise ValueError("PPG channels must be 1-D")
        if len(ppg1) != len(ppg2) or len(ppg1) == 0:
            raise ValueError("PPG channels must be non-empty and of equal length")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "ppg1", ppg1)
        object.__setattr__(self, "ppg2", ppg2)

    def __len__(self):
        return len(self.ppg1)

    def __eq__(self, other):
        if not isinstance(other, Recording):
            return NotImplemented
        return (self.id == other.id
                and self.sample_rate_hz == other.sample_rate_hz
                and np.array_equal(self.ppg1, other.ppg1)
                and np.array_equal(self.ppg2, other.ppg2))

    @property
    def channels(self):
        return self.ppg1, self.ppg2


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Reference heart rate, one BPM value per analysis window."""

    bpm_per_window: np.ndarray

    def __post_init__(self):
        bpm = np.asarray(self.bpm_per_window, dtype=float).ravel()
        lo, hi = BPM_RANGE
        bad = ~((bpm > lo) & (bpm < hi))
        if np.any(bad):
            raise DataError(f"ground truth BPM outside ({lo:g}, {hi:g}): "
                            f"{bpm[bad][:5].tolist()}")
        object.__setattr__(self, "bpm_per_window", bpm)

    def __len__(self):
        return len(self.bpm_per_window)

    def __eq__(self, other):
        if not isinstance(other, GroundTruth):
            return NotImplemented
        return np.array_equal(self.bpm_per_window, other.bpm_per_window)


@dataclass
class SynthesisSpec:
    """Parameters for :func:`synthesize_recording`.

    ``hr_trajectory`` holds one BPM value per second (linearly interpolated in
    between). ``artifact_tones`` is a list of ``(freq_hz, amplitude, mask)``
    where ``mask`` is a pair of booleans selecting the channels that carry the
    tone; an optional fourth element gives the onset time in seconds.
    """

    duration_s: float
    hr_trajectory: Sequence[float]
    artifact_tones: list = field(default_factory=list)
    harmonic_amplitudes: Sequence[float] = (1.0, 0.5, 0.25)
    noise_std: float = 0.0
    sample_rate_hz: float = 125.0
    seed: int | None = 0
    id: str = "synthetic"

    def validate(self):
        if self.duration_s < WINDOW_S:
            raise ValueError("duration_s must cover at least one 8 s window")
        hr = np.asarray(self.hr_trajectory, dtype=float)
        if hr.size == 0:
            raise ValueError("hr_trajectory is empty")
        if np.any(hr <= BPM_RANGE[0]) or np.any(hr >= BPM_RANGE[1]):
            raise ValueError("hr_trajectory values must lie in (30, 250) BPM")
        if len(self.harmonic_amplitudes) == 0:
            raise ValueError("need at least one harmonic amplitude")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")


def n_windows(n_samples, rate_hz):
    """Number of 8 s windows at a 2 s slide that fit in ``n_samples``."""
    ws = int(round(WINDOW_S * rate_hz))
    step = int(round(SLIDE_S * rate_hz))
    if n_samples < ws:
        return 0
    return (n_samples - ws) // step + 1


def _resolve_columns(header, layout, n_cols):
    if "ppg1" not in layout or "ppg2" not in layout:
        raise DataError("layout must map both 'ppg1' and 'ppg2'")
    cols = []
    for key in ("ppg1", "ppg2"):
        ref = layout[key]
        if isinstance(ref, (int, np.integer)):
            idx = int(ref)
        elif header is not None and ref in header:
            idx = header.index(ref)
        else:
            raise DataError(f"column {ref!r} for {key} not found in header {header}")
        if not 0 <= idx < n_cols:
            raise DataError(f"column index {idx} out of range for {n_cols} columns")
        cols.append(idx)
    return cols


def load_recording(path, layout: Mapping[str, int | str] | None = None,
                   sample_rate_hz=125.0, id=None):
    """
    Read a two-channel PPG recording from a CSV file.

    Parameters
    ----------
    path : str or Path
        CSV file, comma separated, optional header row.
    layout : mapping, optional
        Maps ``'ppg1'`` and ``'ppg2'`` to a column name (header required) or a
        zero-based column index. Defaults to the column names ``ppg1``/``ppg2``
        when a header exists, otherwise columns 0 and 1.
    sample_rate_hz : float
        Declared sampling rate.

    Returns
    -------
    Recording
        Unmapped columns (ECG, accelerometer, ...) are dropped.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty file")

    header = None
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: no data rows")

    width = len(header) if header is not None else len(rows[0])
    for lineno, r in enumerate(rows, start=2 if header else 1):
        if len(r) != width:
            raise DataError(f"{path}:{lineno}: ragged row ({len(r)} cells, expected {width})")
    if width < 2:
        raise DataError(f"{path}: need at least two columns")

    if layout is None:
        if header is not None and "ppg1" in header and "ppg2" in header:
            layout = {"ppg1": "ppg1", "ppg2": "ppg2"}
        else:
            layout = {"ppg1": 0, "ppg2": 1}
    c1, c2 = _resolve_columns(header, layout, width)

    try:
        data = np.array([[float(r[c1]), float(r[c2])] for r in rows])
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric cell ({exc})") from None
    return Recording(data[:, 0], data[:, 1], float(sample_rate_hz),
                     id if id is not None else path.stem)


def write_recording(rec: Recording, path):
    """Write ``rec`` as a headered ``ppg1,ppg2`` CSV that round-trips exactly."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["ppg1", "ppg2"])
        for a, b in zip(rec.ppg1, rec.ppg2):
            w.writerow([repr(float(a)), repr(float(b))])


def load_ground_truth(path):
    """Read one BPM value per line (extra comma-separated cells are ignored)."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(path)
    values = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        cell = line.split(",")[0].strip()
        if not cell:
            continue
        try:
            values.append(float(cell))
        except ValueError:
            if lineno == 1 and not values:
                continue  # header
            raise DataError(f"{path}:{lineno}: non-numeric BPM {cell!r}") from None
    if not values:
        raise DataError(f"{path}: no ground-truth values")
    return GroundTruth(np.array(values))


def write_ground_truth(truth: GroundTruth, path):
    Path(path).write_text("".join(f"{v!r}\n" for v in truth.bpm_per_window.tolist()))


def synthesize_recording(spec: SynthesisSpec):
    """
    Generate a two-channel PPG recording with a known heart-rate trajectory.

    Each channel is a harmonic pulse ``sum_k a_k cos(2 pi k phi(t))`` with
    ``phi`` the integrated instantaneous HR frequency, plus the configured
    artifact tones and white Gaussian noise.

    Returns
    -------
    (Recording, GroundTruth)
        Ground truth is the mean instantaneous BPM over each 8 s window.
    """
    spec.validate()
    fs = float(spec.sample_rate_hz)
    n = int(round(spec.duration_s * fs))
    t = np.arange(n) / fs
    hr = np.asarray(spec.hr_trajectory, dtype=float)
    if hr.size == 1:
        bpm = np.full(n, hr[0])
    else:
        bpm = np.interp(t, np.arange(hr.size), hr)
    # phase[0] = 0; rectangle-rule integral of the per-sample frequency
    phase = np.concatenate(([0.0], np.cumsum(bpm[:-1] / 60.0) / fs))
    pulse = np.zeros(n)
    for k, a in enumerate(spec.harmonic_amplitudes, start=1):
        pulse += a * np.cos(2 * np.pi * k * phase)

    rng = np.random.default_rng(spec.seed)
    channels = [pulse.copy(), pulse.copy()]
    for tone in spec.artifact_tones:
        freq, amp, mask = tone[:3]
        onset = tone[3] if len(tone) > 3 else 0.0
        offset = rng.uniform(0, 2 * np.pi)
        wave = amp * np.cos(2 * np.pi * freq * t + offset) * (t >= onset)
        for ch, on in enumerate(mask):
            if on:
                channels[ch] += wave
    if spec.noise_std > 0:
        for ch in channels:
            ch += rng.normal(0.0, spec.noise_std, n)

    ws = int(round(WINDOW_S * fs))
    step = int(round(SLIDE_S * fs))
    truth = np.array([bpm[i * step:i * step + ws].mean()
                      for i in range(n_windows(n, fs))])
    rec = Recording(channels[0], channels[1], fs, spec.id)
    return rec, GroundTruth(truth)


def exercise_spec(i, duration_s=120.0, max_artifact=3.0, noise_std=0.5):
    """
    Synthesis parameters of the ``i``-th recording of the exercise suite.

    HR rests near 70 BPM for 10 s, climbs to 150 BPM at a random time
    between 45 s and 75 s, then recovers to 90 BPM. One to three artifact
    tones in 1.0–3.2 Hz (amplitude up to ``max_artifact`` times the pulse
    fundamental) start between 10 s and 20 s on one or both channels. All
    draws come from ``default_rng(100 + i)``.
    """
    rng = np.random.default_rng(100 + i)
    peak_t = rng.uniform(45, 75)
    knots = np.arange(int(duration_s) + 1)
    hr = np.interp(knots, [0, 10, peak_t, duration_s],
                   [70, 70 + rng.uniform(0, 5), 150, 90])
    tones = []
    for _ in range(rng.integers(1, 4)):
        freq = rng.uniform(1.0, 3.2)
        amp = rng.uniform(0.5, max_artifact)
        mask = [(True, True), (True, False), (False, True)][rng.integers(0, 3)]
        tones.append((freq, amp, mask, rng.uniform(10, 20)))
    return SynthesisSpec(duration_s, hr, tones, harmonic_amplitudes=(1.0, 0.5, 0.25),
                         noise_std=noise_std, seed=i, id=f"syn{i:02d}")


def exercise_suite(n=10, **kwargs):
    """``[(Recording, GroundTruth), ...]`` for suite members ``0 .. n-1``."""
    return [synthesize_recording(exercise_spec(i, **kwargs)) for i in range(n)]
