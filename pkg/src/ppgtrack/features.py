"""
Per-candidate feature vectors, ground-truth labels and feature scoring.

Every candidate of a window gets a 30-slot vector whose layout is given by
:data:`FEATURE_NAMES`. Slots that need a previous heart-rate estimate
(``f_prev*`` and ``t*``) are zero when that history does not exist yet.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal

from .candidates import N_HARMONICS, CandidateSet, near_count
from .spectrum import N_POINTS, bpm_to_index

FEATURE_NAMES = (
    ["m1", "m2", "l1", "l2", "w", "p"]
    + [f"s{i}_{k}" for i in (1, 2) for k in (1, 2, 3)]
    + [f"d{i}_{k}" for i in (1, 2) for k in (1, 2, 3)]
    + ["near_count", "nabla_size"]
    + [f"f_prev{k}" for k in (1, 2, 3)]
    + ["uniqueness"]
    + [f"t{i}_{g}" for i in (1, 2) for g in (1, 2, 3)]
)
N_FEATURES = len(FEATURE_NAMES)
FEATURE_INDEX = {name: i for i, name in enumerate(FEATURE_NAMES)}

F_PREV_FEATURES = ("f_prev1", "f_prev2", "f_prev3")
# features that do not depend on earlier estimates; used for the first windows
INIT_FEATURES = ("m1", "m2", "l1", "p", "d1_1", "d2_1", "near_count", "nabla_size",
                 "uniqueness")

GAMMAS = (0.3, 0.5, 0.7)
TAU = 30
LABEL_RADIUS = 16
SELECT_THRESHOLD = 0.3


def mask_from_names(names):
    mask = np.zeros(N_FEATURES, dtype=bool)
    for n in names:
        mask[FEATURE_INDEX[n]] = True
    return mask


def time_domain_hr(frame_norm, gamma, prev_hr_bpm, tau_idx=TAU, rate_hz=125.0,
                   n_points=N_POINTS):
    """
    Heart rate from the count of time-domain peaks above ``gamma``.

    Peaks must be at least ``floor(rate * 60 / (prev_hr + tau_bpm))`` samples
    apart, where ``tau_bpm`` is ``tau_idx`` spectral indices expressed in BPM.

    Parameters
    ----------
    frame_norm : array_like or Frame
        Frame normalized to a maximum absolute value of 1.
    gamma : float
        Height threshold in (0, 1).
    prev_hr_bpm : float
        Previous heart-rate estimate.

    Returns
    -------
    float
        ``count / frame_duration_s * 60``.
    """
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    if not prev_hr_bpm > 0:
        raise ValueError("prev_hr_bpm must be positive")
    x = np.asarray(getattr(frame_norm, "samples", frame_norm), dtype=float)
    rate_hz = getattr(frame_norm, "rate_hz", rate_hz)
    tau_bpm = tau_idx * rate_hz * 60.0 / n_points
    d_min = max(1, int(np.floor(rate_hz * 60.0 / (prev_hr_bpm + tau_bpm))))
    peaks, props = signal.find_peaks(x, height=gamma, distance=d_min)
    count = int(np.count_nonzero(props["peak_heights"] > gamma))
    return count / (len(x) / rate_hz) * 60.0


def window_time_domain_hr(frames_norm, history, gammas=GAMMAS, tau_idx=TAU,
                          n_points=N_POINTS):
    """(2, len(gammas)) array of time-domain HR estimates; zeros without history."""
    out = np.zeros((2, len(gammas)))
    if not history:
        return out
    for i, fr in enumerate(frames_norm):
        for g, gamma in enumerate(gammas):
            out[i, g] = time_domain_hr(fr, gamma, history[0], tau_idx, n_points=n_points)
    return out


def extract_features(candidate, cset: CandidateSet, history=(), frames_norm=None,
                     gammas=GAMMAS, tau_idx=TAU, rate_hz=125.0, n_points=N_POINTS,
                     td_hr=None):
    """
    Feature vector of one candidate.

    Parameters
    ----------
    candidate : Candidate
        Member of ``cset``.
    cset : CandidateSet
        The window's candidate set.
    history : sequence of float
        Previous estimates in BPM, most recent first (``HR_-1, HR_-2, HR_-3``).
    frames_norm : pair of Frame, optional
        Max-normalized frames of both channels; needed for the ``t*`` slots
        unless ``td_hr`` supplies the time-domain estimates directly.

    Returns
    -------
    ndarray, shape (30,)
    """
    v = np.zeros(N_FEATURES)
    idx = candidate.index
    origin = candidate.origin_channel - 1
    v[0:2] = candidate.refined_magnitude
    v[2:4] = [abs(r - idx) for r in candidate.refined_index]
    v[4] = candidate.width
    v[5] = candidate.prominence
    v[6:12] = candidate.harmonic_magnitude.ravel()
    multiples = np.arange(2, N_HARMONICS + 2)
    v[12:18] = np.abs(candidate.harmonic_index / multiples - idx).ravel()
    other = cset.cp2 if origin == 0 else cset.cp1
    v[18] = near_count(candidate, other)
    v[19] = len(cset)
    for k, hr in enumerate(list(history)[:3]):
        v[20 + k] = abs(idx - bpm_to_index(hr, n_points, rate_hz))

    own = candidate.refined_magnitude[origin]
    smaller = [p.magnitude for p in cset.peaks(origin + 1)
               if p.index != idx and p.magnitude < own]
    v[23] = own - (max(smaller) if smaller else 0.0)

    if history:
        if td_hr is None:
            if frames_norm is None:
                raise ValueError("frames_norm is required when history is present")
            td_hr = window_time_domain_hr(frames_norm, history, gammas, tau_idx, n_points)
        v[24:30] = np.abs(idx - bpm_to_index(np.asarray(td_hr), n_points, rate_hz)).ravel()
    return v


def window_features(cset: CandidateSet, history=(), frames_norm=None, gammas=GAMMAS,
                    tau_idx=TAU, rate_hz=125.0, n_points=N_POINTS):
    """Feature matrix (n_candidates, 30) for every member of ``cset``."""
    if len(cset) == 0:
        return np.zeros((0, N_FEATURES))
    td_hr = None
    if history:
        td_hr = window_time_domain_hr(frames_norm, history, gammas, tau_idx, n_points)
    return np.array([extract_features(c, cset, history, None, gammas, tau_idx,
                                      rate_hz, n_points, td_hr) for c in cset])


def label_candidates(cset, hr_true_bpm, radius=LABEL_RADIUS, rate_hz=125.0,
                     n_points=N_POINTS):
    """1 for candidates within ``radius`` indices (strict) of the true HR, else 0."""
    if not hr_true_bpm > 0:
        raise ValueError("hr_true_bpm must be positive")
    idx = cset.indices if isinstance(cset, CandidateSet) else np.asarray(cset, dtype=float)
    true_idx = bpm_to_index(hr_true_bpm, n_points, rate_hz)
    return (np.abs(idx - true_idx) < radius).astype(int)


def fisher_score(values, labels):
    """
    Separability score ``((mu_t - mu_0)^2 - (mu_t - mu_1)^2) / (var_0 + var_1)``.

    ``mu_t`` is the overall mean, ``mu_c``/``var_c`` the per-class mean and
    population variance. Note the numerator equals
    ``(mu_1 - mu_0)^2 (n_1^2 - n_0^2) / n^2``, so the sign follows the class
    balance and balanced classes always score exactly 0. The factored form is
    what is evaluated, so that the zero is exact in floating point.
    """
    x = np.asarray(values, dtype=float)
    y = np.asarray(labels)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("values and labels must be 1-D and of equal length")
    x0, x1 = x[y == 0], x[y == 1]
    if len(x0) == 0 or len(x1) == 0:
        raise ValueError("both classes must be present")
    if len(x0) + len(x1) != len(x):
        raise ValueError("labels must be 0 or 1")
    n0, n1 = len(x0), len(x1)
    mu_0, mu_1 = x0.mean(), x1.mean()
    den = x0.var() + x1.var()
    if den == 0:
        raise ValueError("both classes have zero variance")
    return (mu_1 - mu_0) ** 2 * ((n1 - n0) * (n1 + n0)) / ((n0 + n1) ** 2 * den)


def select_features(j_scores, threshold=SELECT_THRESHOLD, fallback=5):
    """
    Feature mask: score above ``threshold``, never the ``f_prev`` slots.

    When nothing passes, the ``fallback`` features with the largest ``|J|``
    (excluding ``f_prev``) are chosen instead; the magnitude is used because
    the sign of the score only reflects the class balance.
    """
    j = np.asarray(j_scores, dtype=float)
    if j.shape != (N_FEATURES,):
        raise ValueError(f"expected {N_FEATURES} scores")
    allowed = ~mask_from_names(F_PREV_FEATURES)
    mask = (np.nan_to_num(j, nan=-np.inf) > threshold) & allowed
    if not mask.any():
        mag = np.where(allowed & np.isfinite(j), np.abs(j), -np.inf)
        order = np.argsort(-mag, kind="stable")
        mask[order[:fallback]] = True
        mask &= allowed
    return mask


@dataclass
class FeatureReport:
    j: np.ndarray
    mask: np.ndarray

    def rows(self):
        return [(n, float(s), bool(m)) for n, s, m in zip(FEATURE_NAMES, self.j, self.mask)]

    def write_csv(self, path):
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["feature", "J", "selected"])
            for name, score, sel in self.rows():
                w.writerow([name, repr(score), int(sel)])

    @classmethod
    def read_csv(cls, path):
        with Path(path).open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        names = [r["feature"] for r in rows]
        if names != FEATURE_NAMES:
            raise ValueError(f"{path}: unexpected feature rows")
        return cls(np.array([float(r["J"]) for r in rows]),
                   np.array([bool(int(r["selected"])) for r in rows]))

    def format(self):
        lines = [f"{'feature':<12}{'J':>12}  selected"]
        for name, score, sel in self.rows():
            lines.append(f"{name:<12}{score:>12.4f}  {'yes' if sel else '-'}")
        return "\n".join(lines)


def feature_report(X, y, threshold=SELECT_THRESHOLD, fallback=5):
    """Score all 30 columns of ``X`` against labels ``y`` and select features."""
    X = np.asarray(X, dtype=float)
    j = np.full(N_FEATURES, np.nan)
    for col in range(N_FEATURES):
        try:
            j[col] = fisher_score(X[:, col], y)
        except ValueError:
            if len(np.unique(y)) < 2:
                raise
    return FeatureReport(j, select_features(j, threshold, fallback))


@dataclass
class LabeledSet:
    """Stacked labeled candidates: features, 0/1 labels, window and subject ids."""

    X: np.ndarray
    y: np.ndarray
    window: np.ndarray
    subject: np.ndarray

    def __len__(self):
        return len(self.y)

    @classmethod
    def concat(cls, parts):
        parts = list(parts)
        if not parts:
            return cls(np.zeros((0, N_FEATURES)), np.zeros(0, int), np.zeros(0, int),
                       np.zeros(0, dtype=object))
        return cls(np.vstack([p.X for p in parts]), np.concatenate([p.y for p in parts]),
                   np.concatenate([p.window for p in parts]),
                   np.concatenate([p.subject for p in parts]))

    def subset(self, keep):
        return LabeledSet(self.X[keep], self.y[keep], self.window[keep], self.subject[keep])

    def write_csv(self, path):
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(FEATURE_NAMES + ["label", "window", "subject"])
            for row, lab, win, sub in zip(self.X, self.y, self.window, self.subject):
                w.writerow([repr(float(v)) for v in row] + [int(lab), int(win), sub])

    @classmethod
    def read_csv(cls, path):
        with Path(path).open(newline="") as fh:
            r = csv.reader(fh)
            header = next(r)
            if header[:N_FEATURES] != FEATURE_NAMES:
                raise ValueError(f"{path}: unexpected header")
            rows = list(r)
        X = np.array([[float(c) for c in row[:N_FEATURES]] for row in rows]).reshape(-1, N_FEATURES)
        return cls(X, np.array([int(row[N_FEATURES]) for row in rows], dtype=int),
                   np.array([int(row[N_FEATURES + 1]) for row in rows], dtype=int),
                   np.array([row[N_FEATURES + 2] for row in rows], dtype=object))
