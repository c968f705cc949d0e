"""
Candidate peaks, their 30 features and ground-truth labels for one window,
then the separability report over a whole recording.

Run: python3 demos/02_candidates_features.py
"""

import numpy as np

from ppgtrack import (FEATURE_NAMES, ar_spectrum, exercise_spec, feature_report,
                      index_to_bpm, label_candidates, select_candidates, synthesize_recording)
from ppgtrack.features import window_features
from ppgtrack.pipeline import labeled_windows
from ppgtrack.preprocess import normalize_to_max
from ppgtrack.tracker import recording_frames

rec, truth = synthesize_recording(exercise_spec(0))
hr = truth.bpm_per_window
# window 5: artifact switching on, HR peak still above the threshold (at window 30
# the HR peak drops below T and the tracker needs its enhancements)
w = 5
frames = recording_frames(rec)[w]
s1, s2 = (ar_spectrum(f, channel=f.channel) for f in frames)
cset = select_candidates(s1, s2)
history = tuple(hr[w - 3:w][::-1])
X = window_features(cset, history, [normalize_to_max(f) for f in frames])
y = label_candidates(cset, hr[w])

print(f"window {w}: true HR {hr[w]:.1f} BPM, {len(cset)} candidates")
shown = ("m1", "m2", "p", "d1_1", "near_count", "f_prev1", "uniqueness", "t1_2")
cols = [FEATURE_NAMES.index(n) for n in shown]
print(f"{'ch':>3} {'BPM':>7} {'label':>5} " + " ".join(f"{n:>10}" for n in shown))
for c, row, lab in zip(cset, X, y):
    vals = " ".join(f"{row[i]:10.3f}" for i in cols)
    print(f"{c.origin_channel:>3} {index_to_bpm(c.index):7.1f} {lab:>5} {vals}")

# J over every window of the recording; with imbalanced classes the sign is negative
data = labeled_windows(rec, truth)
print(f"\n{len(data)} labeled candidates, {int(data.y.sum())} HR, {int((data.y == 0).sum())} MA")
report = feature_report(data.X, data.y, fallback=17)
order = np.argsort(-np.abs(np.nan_to_num(report.j)))
print("features ranked by |J| (selected marked *):")
for i in order[:10]:
    print(f"  {FEATURE_NAMES[i]:<12} {report.j[i]:8.4f} {'*' if report.mask[i] else ''}")
