"""
Training-set construction, model training and evaluation helpers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .features import (INIT_FEATURES, FeatureReport, LabeledSet, feature_report,
                       label_candidates, mask_from_names, window_features)
from .mlp import TrainConfig, train
from .preprocess import normalize_to_max
from .signal_io import GroundTruth, Recording
from .spectrum import ar_spectrum
from .candidates import select_candidates
from .tracker import TrackerConfig, TrackerModels, recording_frames, track_recording

# Fallback size used for training. On imbalanced data the score is negative for
# every feature, so the threshold alone selects nothing.
TRAIN_FALLBACK = 17


def labeled_windows(rec: Recording, truth: GroundTruth, cfg: TrackerConfig = TrackerConfig()):
    """
    Labeled candidates of every window of a recording.

    The ``f_prev``/``t`` features use the ground truth of the preceding windows
    as the estimate history.
    """
    pairs = recording_frames(rec)
    if len(pairs) != len(truth):
        raise ValueError(f"{rec.id}: {len(pairs)} windows but {len(truth)} ground-truth values")
    hr = truth.bpm_per_window
    parts = []
    for w, frames in enumerate(pairs):
        spectra = [ar_spectrum(f, cfg.ar_order, cfg.n_points, rec.sample_rate_hz, f.channel)
                   for f in frames]
        cset = select_candidates(spectra[0], spectra[1], cfg.threshold,
                                 cfg.search_band_hz, cfg.delta_idx)
        if not len(cset):
            continue
        history = tuple(hr[max(0, w - 3):w][::-1])
        norm = [normalize_to_max(f) for f in frames]
        X = window_features(cset, history, norm, cfg.gammas, cfg.tau_idx,
                            rec.sample_rate_hz, cfg.n_points)
        y = label_candidates(cset, hr[w], rate_hz=rec.sample_rate_hz, n_points=cfg.n_points)
        parts.append(LabeledSet(X, y, np.full(len(y), w), np.full(len(y), rec.id, dtype=object)))
    return LabeledSet.concat(parts)


def build_labeled_set(pairs, cfg: TrackerConfig = TrackerConfig()):
    return LabeledSet.concat(labeled_windows(r, t, cfg) for r, t in pairs)


@dataclass
class TrainingOutcome:
    models: TrackerModels
    report: FeatureReport
    main_report: object = None
    init_report: object = None
    n_examples: int = 0


def train_models(data: LabeledSet, config: TrainConfig | None = None,
                 cfg: TrackerConfig = TrackerConfig(), fallback=TRAIN_FALLBACK):
    """
    Score the features, select the main model's inputs and fit both networks.

    The main network is fitted on windows that have a full three-window
    history; the initialization network on every window, restricted to the
    history-free features. ``fallback`` is the number of top-``|J|`` features
    used when no score clears the selection threshold.
    """
    config = config or TrainConfig()
    if len(data) == 0 or len(np.unique(data.y)) < 2:
        raise ValueError("labeled data must contain both HR and MA candidates")
    report = feature_report(data.X, data.y, fallback=fallback)
    full = data.subset(data.window >= min(3, cfg.init_windows))
    if len(np.unique(full.y)) < 2:
        full = data
    main, main_rep = train(full.X, full.y, report.mask, config)
    init, init_rep = train(data.X, data.y, mask_from_names(INIT_FEATURES), config)
    return TrainingOutcome(TrackerModels(main, init), report, main_rep, init_rep, len(data))


def mae(estimates, truth):
    """Mean absolute error in BPM between two equal-length sequences."""
    est = np.asarray(estimates, dtype=float)
    ref = np.asarray(getattr(truth, "bpm_per_window", truth), dtype=float)
    if est.shape != ref.shape:
        raise ValueError(f"length mismatch: {est.shape} vs {ref.shape}")
    if est.size == 0:
        raise ValueError("empty sequences")
    return float(np.mean(np.abs(est - ref)))


@dataclass
class EvalResult:
    ids: list = field(default_factory=list)
    mae: list = field(default_factory=list)
    artpw_ms: list = field(default_factory=list)
    errors: dict = field(default_factory=dict)

    @property
    def mean_mae(self):
        return float(np.mean(self.mae)) if self.mae else float("nan")

    @property
    def mean_artpw(self):
        return float(np.mean(self.artpw_ms)) if self.artpw_ms else float("nan")

    def format(self):
        """Aligned table: one column per recording plus the mean."""
        head = ["Data"] + list(self.ids) + ["Mean"]
        rows = [
            ["MAE (BPM)"] + [f"{v:.2f}" for v in self.mae] + [f"{self.mean_mae:.2f}"],
            ["ARTPW (ms)"] + [f"{v:.2f}" for v in self.artpw_ms] + [f"{self.mean_artpw:.2f}"],
        ]
        widths = [max(len(r[i]) for r in [head] + rows) for i in range(len(head))]
        lines = ["  ".join(c.rjust(wd) for c, wd in zip(r, widths)) for r in [head] + rows]
        for rid, msg in self.errors.items():
            lines.append(f"error {rid}: {msg}")
        return "\n".join(lines)

    def csv_rows(self):
        rows = [("id", "mae_bpm", "artpw_ms")]
        rows += [(i, repr(m), repr(a)) for i, m, a in zip(self.ids, self.mae, self.artpw_ms)]
        rows.append(("mean", repr(self.mean_mae), repr(self.mean_artpw)))
        return rows


def evaluate(pairs, models: TrackerModels, cfg: TrackerConfig = TrackerConfig(), trace=None):
    """Track every (recording, truth) pair; per-recording failures are recorded, not raised."""
    result = EvalResult()
    for rec, truth in pairs:
        try:
            tr = track_recording(rec, models, cfg, trace)
            err = mae(tr.bpm, truth)
        except ValueError as exc:
            result.errors[rec.id] = str(exc)
            continue
        result.ids.append(rec.id)
        result.mae.append(err)
        result.artpw_ms.append(tr.artpw_ms)
    return result
