"""
Online heart-rate tracking over consecutive windows.

Per window the candidates of both channels are scored by the network. A
window is accepted directly when some candidate clears the confidence gate and
the chosen location stays within ``beta_idx`` of the previous estimate.
Otherwise the frames are enhanced (harmonic band-pass around the previous
HR, then summation with the two previous frames) and re-analysed; when every
attempt fails the mean of the last two estimates is reported. The first
``init_windows`` windows use a history-free model without the confidence
gate, jump check or smoothing.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .candidates import CandidateSet, select_candidates
from .features import GAMMAS, window_features
from .mlp import MlpModel, forward
from .preprocess import (Frame, bandpass, frame_stream, harmonic_bandpass,
                         normalize_to_max, sum_previous_frames)
from .signal_io import Recording
from .spectrum import (AR_ORDER, N_POINTS, SEARCH_BAND_HZ, SpectralFitError,
                       ar_spectrum, bpm_to_index, index_to_bpm)

log = logging.getLogger(__name__)

DIRECT, ENHANCED1, ENHANCED2, FALLBACK, INIT = (
    "direct", "enhanced1", "enhanced2", "fallback", "init")
DEFAULT_BPM = 90.0


@dataclass(frozen=True)
class TrackerConfig:
    confidence_floor: float = 0.4
    eligibility_ratio: float = 0.7
    beta_idx: float = 75
    rho_bpm: float = 10.0
    eps_hz: float = 0.5
    tau_idx: float = 30
    delta_idx: int = 18
    threshold: float = 0.3
    gammas: tuple = GAMMAS
    search_band_hz: tuple = SEARCH_BAND_HZ
    n_points: int = N_POINTS
    rate_hz: float = 125.0
    ar_order: int = AR_ORDER
    init_windows: int = 4
    k_harmonics: int = 4

    def __post_init__(self):
        for name in ("confidence_floor", "beta_idx", "rho_bpm", "eps_hz", "tau_idx",
                     "delta_idx", "threshold", "n_points", "rate_hz", "ar_order",
                     "k_harmonics"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.eligibility_ratio <= 1:
            raise ValueError("eligibility_ratio must lie in (0, 1]")
        if self.init_windows < 0:
            raise ValueError("init_windows must be >= 0")
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "search_band_hz", tuple(float(b) for b in self.search_band_hz))


@dataclass(frozen=True)
class TrackerModels:
    main: MlpModel
    init: MlpModel


@dataclass(frozen=True)
class TrackerState:
    history: tuple = ()       # BPM estimates, most recent first (<= 3)
    prev_frames: tuple = ()   # (frame1, frame2) pairs, most recent first (<= 2)
    window_index: int = 0

    def in_init(self, cfg: TrackerConfig):
        return self.window_index < cfg.init_windows or not self.history


@dataclass(frozen=True)
class Attempt:
    path: str
    n_candidates: int
    max_score: float
    c_out: int | None = None
    valid: bool | None = None


@dataclass(frozen=True)
class HrEstimate:
    bpm: float
    confidence: float
    path: str
    window_index: int
    c_out: int | None = None
    attempts: tuple = field(default=(), compare=False)

    def trace_line(self):
        last = self.attempts[-1] if self.attempts else None
        n = last.n_candidates if last else 0
        mx = last.max_score if last else float("nan")
        c = "-" if self.c_out is None else str(self.c_out)
        tried = ">".join(a.path for a in self.attempts)
        return (f"window={self.window_index} path={self.path} n_cand={n} "
                f"max_score={mx:.3f} c_out={c} hr={self.bpm:.2f} tried={tried}")


def decide(cset, scores, prev_bpm, cfg: TrackerConfig = TrackerConfig()):
    """
    Pick the output location of a window, or ``None`` when no candidate
    reaches ``confidence_floor``.

    Among candidates scoring at least ``eligibility_ratio`` times the best score,
    the one closest to the previous estimate wins (ties: higher score, then
    lower index).

    Returns
    -------
    (int, float) or None
        The chosen index and its score.
    """
    scores = np.asarray(scores, dtype=float)
    idx = cset.indices if isinstance(cset, CandidateSet) else np.asarray(cset, dtype=int)
    if len(scores) != len(idx):
        raise ValueError("one score per candidate required")
    if len(scores) == 0 or scores.max() < cfg.confidence_floor:
        return None
    eligible = np.flatnonzero(scores >= cfg.eligibility_ratio * scores.max())
    target = bpm_to_index(prev_bpm, cfg.n_points, cfg.rate_hz)
    best = min(eligible, key=lambda e: (abs(idx[e] - target), -scores[e], idx[e]))
    return int(idx[best]), float(scores[best])


def validate(c_out_index, prev_bpm, beta_idx=75, n_points=N_POINTS, rate_hz=125.0):
    """False when the jump from the previous estimate exceeds ``beta_idx`` indices."""
    return bool(abs(c_out_index - bpm_to_index(prev_bpm, n_points, rate_hz)) <= beta_idx)


def smooth(c_out_index, prev_bpm, rho_bpm, n_points=N_POINTS, rate_hz=125.0):
    """Clamp the BPM of ``c_out_index`` to ``prev_bpm +- rho_bpm``."""
    if not rho_bpm > 0:
        raise ValueError("rho_bpm must be positive")
    bpm = c_out_index * rate_hz * 60.0 / n_points
    return max(min(bpm, prev_bpm + rho_bpm), prev_bpm - rho_bpm)


def analyze_frames(frames, history, model: MlpModel, cfg: TrackerConfig):
    """Spectra, candidate set, feature matrix and clamped scores of a frame pair."""
    spectra = [ar_spectrum(f, cfg.ar_order, cfg.n_points, cfg.rate_hz, f.channel)
               for f in frames]
    cset = select_candidates(spectra[0], spectra[1], cfg.threshold,
                             cfg.search_band_hz, cfg.delta_idx)
    norm = [normalize_to_max(f) for f in frames] if history else None
    X = window_features(cset, history, norm, cfg.gammas, cfg.tau_idx, cfg.rate_hz,
                        cfg.n_points)
    scores = forward(model, X) if len(cset) else np.zeros(0)
    return cset, X, np.atleast_1d(scores)


def _init_choice(cset, scores, history, cfg):
    """Top score on the first window; afterwards the eligible candidate nearest HR_-1."""
    if not history:
        best = int(np.argmax(scores))
        return int(cset.members[best].index), float(scores[best])
    floor_free = replace(cfg, confidence_floor=min(cfg.confidence_floor, float(scores.max())))
    return decide(cset, scores, history[0], floor_free)


def _fallback_bpm(history):
    if len(history) >= 2:
        return 0.5 * (history[0] + history[1])
    if history:
        return history[0]
    return DEFAULT_BPM


def _enhancements(raw, state: TrackerState, cfg: TrackerConfig):
    """Yield (path, frames) for each enhancement, built lazily in order."""
    f_prev = state.history[0] / 60.0
    try:
        yield ENHANCED1, tuple(harmonic_bandpass(f, f_prev, cfg.eps_hz, cfg.k_harmonics)
                               for f in raw)
    except ValueError as exc:
        log.debug("enhancement 1 skipped: %s", exc)
        return
    if len(state.prev_frames) < 2:
        return
    (p1a, p1b), (p2a, p2b) = state.prev_frames
    summed = (sum_previous_frames(raw[0], p1a, p2a), sum_previous_frames(raw[1], p1b, p2b))
    yield ENHANCED2, tuple(harmonic_bandpass(f, f_prev, cfg.eps_hz, cfg.k_harmonics)
                           for f in summed)


def _advance(state, estimate, raw):
    return TrackerState(
        history=((estimate.bpm,) + state.history)[:3],
        prev_frames=(tuple(raw),) + state.prev_frames[:1],
        window_index=state.window_index + 1,
    )


def step(state: TrackerState, frame1: Frame, frame2: Frame, models: TrackerModels,
         cfg: TrackerConfig = TrackerConfig()):
    """
    Estimate the heart rate of one window.

    Parameters
    ----------
    state : TrackerState
        State after the previous window (``TrackerState()`` to start).
    frame1, frame2 : Frame
        Band-passed frames of the two channels for the current window.
    models : TrackerModels
        ``init`` scores the first ``cfg.init_windows`` windows, ``main`` the rest.

    Returns
    -------
    (HrEstimate, TrackerState)
    """
    raw = (frame1, frame2)
    w = state.window_index
    attempts = []

    if state.in_init(cfg):
        cset, _, scores = analyze_frames(raw, (), models.init, cfg)
        if len(cset):
            c_out, conf = _init_choice(cset, scores, state.history, cfg)
            attempts.append(Attempt(INIT, len(cset), float(scores.max()), c_out, True))
            est = HrEstimate(float(index_to_bpm(c_out, cfg.n_points, cfg.rate_hz)),
                             conf, INIT, w, c_out, tuple(attempts))
        else:
            attempts.append(Attempt(INIT, 0, float("nan")))
            est = HrEstimate(_fallback_bpm(state.history), 0.0, FALLBACK, w, None,
                             tuple(attempts))
        return est, _advance(state, est, raw)

    prev = state.history[0]

    def tries():
        yield DIRECT, raw
        yield from _enhancements(raw, state, cfg)

    for path, frames in tries():
        try:
            cset, _, scores = analyze_frames(frames, state.history, models.main, cfg)
        except SpectralFitError:
            if path == DIRECT:
                raise
            attempts.append(Attempt(path, 0, float("nan")))
            continue
        max_score = float(scores.max()) if len(scores) else float("nan")
        choice = decide(cset, scores, prev, cfg)
        if choice is None:
            attempts.append(Attempt(path, len(cset), max_score))
            continue
        c_out, conf = choice
        ok = validate(c_out, prev, cfg.beta_idx, cfg.n_points, cfg.rate_hz)
        attempts.append(Attempt(path, len(cset), max_score, c_out, ok))
        if ok:
            bpm = smooth(c_out, prev, cfg.rho_bpm, cfg.n_points, cfg.rate_hz)
            est = HrEstimate(float(bpm), conf, path, w, c_out, tuple(attempts))
            return est, _advance(state, est, raw)

    bpm = _fallback_bpm(state.history)
    bpm = max(min(bpm, prev + cfg.rho_bpm), prev - cfg.rho_bpm)
    est = HrEstimate(float(bpm), 0.0, FALLBACK, w, None, tuple(attempts))
    return est, _advance(state, est, raw)


@dataclass
class TrackResult:
    estimates: list
    artpw_ms: float

    @property
    def bpm(self):
        return np.array([e.bpm for e in self.estimates])


def recording_frames(rec: Recording, band_hz=(0.8, 13.0)):
    """Band-pass both channels of ``rec`` and split them into frame pairs."""
    fs = rec.sample_rate_hz
    ch = [frame_stream(bandpass(x, band_hz[0], band_hz[1], fs), fs, channel=i + 1)
          for i, x in enumerate(rec.channels)]
    return list(zip(ch[0], ch[1]))


def track_recording(rec: Recording, models: TrackerModels,
                    cfg: TrackerConfig = TrackerConfig(), trace=None):
    """
    Track a whole recording window by window.

    ``artpw_ms`` is the mean wall-clock time of :func:`step` per window, in
    milliseconds (filtering and framing excluded). ``trace``, if given, is a
    callable receiving one text line per window.
    """
    if rec.sample_rate_hz != cfg.rate_hz:
        cfg = replace(cfg, rate_hz=rec.sample_rate_hz)
    pairs = recording_frames(rec)
    state = TrackerState()
    estimates = []
    elapsed = 0.0
    for f1, f2 in pairs:
        t0 = time.perf_counter()
        est, state = step(state, f1, f2, models, cfg)
        elapsed += time.perf_counter() - t0
        estimates.append(est)
        if trace is not None:
            trace(est.trace_line())
    return TrackResult(estimates, 1000.0 * elapsed / len(pairs))
