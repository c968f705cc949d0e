"""
ppgtrack: accelerometer-free heart-rate tracking from two-channel wrist PPG.

The pipeline per 8 s window is: band-pass and frame the signal, fit a
high-order AR model per channel, take the spectral peaks above a threshold as
candidates, describe each candidate with 30 features, score it with a small
MLP, and pick the output with a stateful tracker that falls back on harmonic
band-pass and frame summation when the direct attempt fails.
"""

from .candidates import Candidate, CandidateSet, select_candidates
from .features import (FEATURE_NAMES, FeatureReport, LabeledSet, extract_features,
                       feature_report, fisher_score, label_candidates, select_features)
from .mlp import MlpModel, TrainConfig, forward, load_model, save_model, train
from .pipeline import build_labeled_set, evaluate, mae, train_models
from .preprocess import Frame, bandpass, frame_stream, harmonic_bandpass
from .signal_io import (DataError, GroundTruth, Recording, SynthesisSpec, exercise_spec,
                        exercise_suite, load_ground_truth, load_recording, synthesize_recording)
from .spectrum import (SpectrumEstimate, ar_psd, ar_spectrum, bpm_to_index, find_peaks, fit_ar,
                       index_to_bpm)
from .tracker import (HrEstimate, TrackerConfig, TrackerModels, TrackerState, step,
                      track_recording)

__version__ = "0.1.0"

__all__ = [
    "Candidate", "CandidateSet", "DataError", "FEATURE_NAMES", "FeatureReport", "Frame",
    "GroundTruth", "HrEstimate", "LabeledSet", "MlpModel", "Recording", "SpectrumEstimate",
    "SynthesisSpec", "TrackerConfig", "TrackerModels", "TrackerState", "TrainConfig",
    "ar_psd", "ar_spectrum", "bandpass", "bpm_to_index", "build_labeled_set", "evaluate",
    "exercise_spec", "exercise_suite", "index_to_bpm",
    "extract_features", "feature_report", "find_peaks", "fisher_score", "fit_ar", "forward",
    "frame_stream", "harmonic_bandpass", "label_candidates", "load_ground_truth",
    "load_model", "load_recording", "mae", "save_model", "select_candidates",
    "select_features", "step", "synthesize_recording", "track_recording", "train",
    "train_models",
]
