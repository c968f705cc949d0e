import time
from types import SimpleNamespace

import numpy as np
import pytest

from ppgtrack.mlp import TrainConfig
from ppgtrack.pipeline import build_labeled_set, mae, train_models
from ppgtrack.signal_io import exercise_suite
from ppgtrack.tracker import track_recording

# criterion number -> (passed, message); filled by test_acceptance
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def suite_run():
    """
    The synthetic end-to-end run: synthesize 10 recordings, train on the
    first 7, track the last 3. Wall time covers all of it.
    """
    t0 = time.perf_counter()
    pairs = exercise_suite(10)
    train_pairs, test_pairs = pairs[:7], pairs[7:]
    data = build_labeled_set(train_pairs)
    outcome = train_models(data, TrainConfig(seed=0))
    tracks, errors = [], []
    for rec, truth in test_pairs:
        tr = track_recording(rec, outcome.models)
        tracks.append(tr)
        errors.append(mae(tr.bpm, truth))
    elapsed = time.perf_counter() - t0
    return SimpleNamespace(pairs=pairs, data=data, outcome=outcome, models=outcome.models,
                           tracks=tracks, mae=errors, elapsed_s=elapsed)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        status, msg = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{status}] criterion {key}: {msg}")
