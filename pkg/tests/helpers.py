"""Shared fixture builders and independent oracles for the test suite."""

from fractions import Fraction

import numpy as np

from ppgtrack.features import mask_from_names
from ppgtrack.mlp import MlpModel, mse
from ppgtrack.preprocess import Frame
from ppgtrack.tracker import TrackerModels, TrackerState

FS = 125.0
T = np.arange(1000) / FS


def tones(parts, n=1000, fs=FS):
    """Sum of ``(freq_hz, amplitude, phase)`` cosines."""
    t = np.arange(n) / fs
    out = np.zeros(n)
    for f, a, ph in parts:
        out += a * np.cos(2 * np.pi * f * t + ph)
    return out


def frame_pair(parts, rng, noise=0.05, window=10):
    """Two channels of the same tones (channel 2 phase-shifted) plus white noise."""
    a = tones(parts) + rng.normal(0, noise, len(T))
    b = tones([(f, amp, ph + 0.3) for f, amp, ph in parts]) + rng.normal(0, noise, len(T))
    return Frame(a, window, 1, FS), Frame(b, window, 2, FS)


def single_input_model(name, w, theta, v):
    """One hidden unit reading one raw feature: ``v * tanh(w x - theta)``."""
    return MlpModel(mask_from_names([name]), [0.0], [1.0], [[w]], [theta], [v], 0.0)


def proximity_model():
    """Confidence above the gate only within ~31 indices of HR_-1."""
    return single_input_model("f_prev1", -1.0 / 20.0, -2.0, 1.0)


def magnitude_model():
    """Confidence equal to the refined channel-1 magnitude at m1 = 1."""
    return single_input_model("m1", 1.0, 0.0, 1.0 / np.tanh(1.0))


HR_HZ = 75.0 / 60.0


def crafted_window(kind, seed=1):
    """
    ``(state, frame1, frame2, models)`` for a window whose expected path is
    ``kind``:

    ``direct``       clean HR tone near HR_-1.
    ``enhanced1``    a 7 Hz artifact 30x the HR tone owns the normalization,
                     so no in-band peak exists until the harmonic band-pass
                     removes it.
    ``enhanced2``    the current frame holds only an artifact inside the
                     k = 2 pass band; the previous frames carry a strong HR.
    ``fallback``     every frame holds only an artifact; history (74, 76).
    ``revalidate``   a dominant artifact passes the gate but jumps > beta;
                     enhancement 1 then recovers the HR tone.
    """
    rng = np.random.default_rng(seed)
    history = (74.0, 76.0, 75.0)
    models = TrackerModels(proximity_model(), proximity_model())
    clean = [frame_pair([(HR_HZ, 1.0, 0.0)], rng), frame_pair([(HR_HZ, 1.0, 0.0)], rng)]
    if kind == "direct":
        cur = frame_pair([(HR_HZ, 1.0, 0.0), (2.9, 0.3, 1.0)], rng)
    elif kind == "enhanced1":
        cur = frame_pair([(HR_HZ, 0.1, 0.0), (7.0, 3.0, 1.0)], rng)
    elif kind == "enhanced2":
        cur = frame_pair([(2 * HR_HZ + 0.3, 3.0, 1.0)], rng)
        clean = [frame_pair([(HR_HZ, 10.0, 0.0)], rng), frame_pair([(HR_HZ, 10.0, 0.5)], rng)]
    elif kind == "fallback":
        cur = frame_pair([(2.9, 3.0, 1.0)], rng)
        clean = [frame_pair([(2.9, 3.0, 0.0)], rng), frame_pair([(2.9, 3.0, 0.2)], rng)]
    elif kind == "revalidate":
        history = (75.0, 75.0, 75.0)
        models = TrackerModels(magnitude_model(), magnitude_model())
        cur = frame_pair([(HR_HZ, 1.0, 0.0), (1.87, 3.0, 1.0)], rng)
    else:
        raise ValueError(kind)
    state = TrackerState(history=history, prev_frames=tuple(clean), window_index=10)
    return state, cur[0], cur[1], models


def brute_force_peaks(x):
    """
    O(N^2) reference: local maxima (plateaus at their leftmost sample) and
    their topographic prominence, straight from the definition.
    """
    x = [float(v) for v in x]
    n = len(x)
    out_idx, out_prom = [], []
    i = 1
    while i < n - 1:
        if x[i] > x[i - 1]:
            j = i
            while j + 1 < n and x[j + 1] == x[i]:
                j += 1
            if j + 1 < n and x[j + 1] < x[i]:
                left = min(x[k] for k in range(_last_higher(x, i) + 1, i))
                right = min(x[k] for k in range(j + 1, _next_higher(x, j)))
                out_idx.append(i)
                out_prom.append(x[i] - max(left, right))
            i = j + 1
        else:
            i += 1
    return out_idx, out_prom


def _last_higher(x, i):
    k = i - 1
    while k >= 0 and x[k] <= x[i]:
        k -= 1
    return k


def _next_higher(x, j):
    k = j + 1
    while k < len(x) and x[k] <= x[j]:
        k += 1
    return k


def random_model(rng, d=None, hidden=None):
    d = d or int(rng.integers(1, 5))
    hidden = hidden or int(rng.integers(1, 6))
    mask = np.zeros(30, bool)
    mask[rng.choice(30, d, replace=False)] = True
    return MlpModel(mask, rng.normal(size=d), rng.uniform(0.5, 2, d),
                    rng.normal(size=(d, hidden)), rng.normal(size=hidden),
                    rng.normal(size=hidden), float(rng.normal()))


def finite_difference(model, X, y, h=1e-5):
    params = {k: np.array(v, dtype=float) for k, v in model.params().items()}
    out = {}
    for key, arr in params.items():
        g = np.zeros(arr.shape)
        for i in np.ndindex(arr.shape):
            old = arr[i]
            arr[i] = old + h
            up = mse(model.with_params(params), X, y)
            arr[i] = old - h
            down = mse(model.with_params(params), X, y)
            arr[i] = old
            g[i] = (up - down) / (2 * h)
        out[key] = g
    return out


def max_relative_error(a, b, floor=1e-6):
    return max(float(np.max(np.abs(a[k] - b[k]) / np.maximum(np.maximum(np.abs(a[k]), np.abs(b[k])), floor)))
               for k in a)


def exact_fisher(values, labels):
    """The difference-of-squares J form in exact rational arithmetic."""
    xs = [Fraction(float(v)) for v in values]
    c0 = [v for v, l in zip(xs, labels) if l == 0]
    c1 = [v for v, l in zip(xs, labels) if l == 1]
    mu_t, mu_0, mu_1 = sum(xs) / len(xs), sum(c0) / len(c0), sum(c1) / len(c1)
    var_0 = sum((v - mu_0) ** 2 for v in c0) / len(c0)
    var_1 = sum((v - mu_1) ** 2 for v in c1) / len(c1)
    return ((mu_t - mu_0) ** 2 - (mu_t - mu_1) ** 2) / (var_0 + var_1)
