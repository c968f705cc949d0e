"""
Track the three held-out synthetic recordings and print the evaluation table,
with the path each window took.

Run: python3 demos/04_track_evaluate.py [MODEL_DIR]   (train with 03_train.py first)
"""

import sys
from collections import Counter
from pathlib import Path

import numpy as np

from ppgtrack import TrackerModels, evaluate, exercise_suite, load_model, track_recording

root = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_models")
if not (root / "main.txt").is_file():
    sys.exit(f"no models in {root}; run demos/03_train.py first")
models = TrackerModels(load_model(root / "main.txt"), load_model(root / "init.txt"))
held_out = exercise_suite(10)[7:]

result = evaluate(held_out, models)
print(result.format())

rec, truth = held_out[0]
lines = []
tr = track_recording(rec, models, trace=lines.append)
print(f"\n{rec.id}: paths {dict(Counter(e.path for e in tr.estimates))}")
err = np.abs(tr.bpm - truth.bpm_per_window)
print(f"worst window {int(np.argmax(err))}: error {err.max():.2f} BPM")
print("first trace lines:")
for line in lines[:6]:
    print("  " + line)
