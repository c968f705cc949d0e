"""
Three-layer perceptron that scores candidate peaks.

Hidden units compute ``tanh(w . x - theta)``, the single output unit is linear,
``v . h - theta_out``. Inputs are the masked feature slots, standardized with a
shift/scale fitted on the training data and stored with the model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .features import FEATURE_INDEX, FEATURE_NAMES, N_FEATURES

HIDDEN = 22
FORMAT_VERSION = 1
GATE = 0.4


class ModelFormatError(ValueError):
    pass


class ModelDimensionError(ModelFormatError):
    pass


@dataclass(eq=False)
class MlpModel:
    mask: np.ndarray          # (30,) bool
    shift: np.ndarray         # (d,)
    scale: np.ndarray         # (d,)
    w_hidden: np.ndarray      # (d, H)
    theta_hidden: np.ndarray  # (H,)
    w_out: np.ndarray         # (H,)
    theta_out: float = 0.0

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        d = int(self.mask.sum())
        self.shift = np.asarray(self.shift, dtype=float)
        self.scale = np.asarray(self.scale, dtype=float)
        self.w_hidden = np.asarray(self.w_hidden, dtype=float)
        self.theta_hidden = np.asarray(self.theta_hidden, dtype=float)
        self.w_out = np.asarray(self.w_out, dtype=float)
        self.theta_out = float(self.theta_out)
        h = len(self.theta_hidden)
        if self.mask.shape != (N_FEATURES,):
            raise ModelDimensionError(f"mask must have {N_FEATURES} entries")
        if (self.shift.shape != (d,) or self.scale.shape != (d,)
                or self.w_hidden.shape != (d, h) or self.w_out.shape != (h,)):
            raise ModelDimensionError("inconsistent parameter shapes")
        if np.any(self.scale <= 0):
            raise ModelDimensionError("normalization scales must be positive")

    @property
    def input_dim(self):
        return int(self.mask.sum())

    @property
    def hidden(self):
        return len(self.theta_hidden)

    @property
    def feature_names(self):
        return [n for n, m in zip(FEATURE_NAMES, self.mask) if m]

    def params(self):
        return {"w_hidden": self.w_hidden, "theta_hidden": self.theta_hidden,
                "w_out": self.w_out, "theta_out": np.array(self.theta_out)}

    def with_params(self, p):
        return MlpModel(self.mask, self.shift, self.scale, p["w_hidden"],
                        p["theta_hidden"], p["w_out"], float(p["theta_out"]))

    def __eq__(self, other):
        if not isinstance(other, MlpModel):
            return NotImplemented
        return (np.array_equal(self.mask, other.mask)
                and np.array_equal(self.shift, other.shift)
                and np.array_equal(self.scale, other.scale)
                and np.array_equal(self.w_hidden, other.w_hidden)
                and np.array_equal(self.theta_hidden, other.theta_hidden)
                and np.array_equal(self.w_out, other.w_out)
                and self.theta_out == other.theta_out)


def _inputs(model, features):
    x = np.atleast_2d(np.asarray(features, dtype=float))
    if x.shape[1] == N_FEATURES:
        x = x[:, model.mask]
    elif x.shape[1] != model.input_dim:
        raise ModelDimensionError(
            f"got {x.shape[1]} features, model expects {N_FEATURES} or {model.input_dim}")
    return (x - model.shift) / model.scale


def raw_score(model: MlpModel, features):
    """Unclamped network output for one vector (scalar) or a matrix (1-D array)."""
    single = np.ndim(features) == 1
    xh = _inputs(model, features)
    out = np.tanh(xh @ model.w_hidden - model.theta_hidden) @ model.w_out - model.theta_out
    return float(out[0]) if single else out


def forward(model: MlpModel, features):
    """Candidate confidence: the network output clamped to [0, 1]."""
    return np.clip(raw_score(model, features), 0.0, 1.0)


def gradient(model: MlpModel, X, y):
    """
    Exact gradient of ``mean((raw_score - y)^2)`` over a batch.

    Returns a dict keyed like :meth:`MlpModel.params`.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if len(y) == 0 or len(X) != len(y):
        raise ValueError("batch must be non-empty with one label per row")
    xh = _inputs(model, X)
    hid = np.tanh(xh @ model.w_hidden - model.theta_hidden)
    out = hid @ model.w_out - model.theta_out
    r = 2.0 * (out - y) / len(y)
    dhid = np.outer(r, model.w_out) * (1.0 - hid ** 2)
    return {
        "w_hidden": xh.T @ dhid,
        "theta_hidden": -dhid.sum(axis=0),
        "w_out": hid.T @ r,
        "theta_out": np.array(-r.sum()),
    }


def mse(model, X, y):
    return float(np.mean((raw_score(model, np.atleast_2d(X)) - np.asarray(y, float)) ** 2))


@dataclass
class TrainConfig:
    epochs: int = 200
    learning_rate: float = 0.05
    batch_size: int = 32
    seed: int = 0
    holdout_fraction: float = 0.2
    balance: bool = True
    hidden: int = HIDDEN

    def validate(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0 <= self.holdout_fraction < 1:
            raise ValueError("holdout_fraction must be in [0, 1)")


@dataclass
class TrainReport:
    loss: list = field(default_factory=list)
    n_train: int = 0
    n_holdout: int = 0
    holdout: dict = field(default_factory=dict)


def classification_metrics(scores, y, threshold=GATE):
    pred = np.asarray(scores) >= threshold
    y = np.asarray(y).astype(bool)
    tp = int(np.sum(pred & y))
    fp = int(np.sum(pred & ~y))
    fn = int(np.sum(~pred & y))
    return {
        "accuracy": float(np.mean(pred == y)) if len(y) else float("nan"),
        "precision": tp / (tp + fp) if tp + fp else float("nan"),
        "recall": tp / (tp + fn) if tp + fn else float("nan"),
    }


def init_model(mask, shift, scale, hidden=HIDDEN, rng=None):
    rng = np.random.default_rng(rng)
    d = int(np.sum(mask))
    r_in = 1.0 / np.sqrt(d)
    r_hid = 1.0 / np.sqrt(hidden)
    return MlpModel(mask, shift, scale,
                    rng.uniform(-r_in, r_in, (d, hidden)),
                    rng.uniform(-r_in, r_in, hidden),
                    rng.uniform(-r_hid, r_hid, hidden),
                    float(rng.uniform(-r_hid, r_hid)))


def train(X, y, mask, config: TrainConfig | None = None):
    """
    Fit a network on labeled feature vectors by mini-batch gradient descent.

    Parameters
    ----------
    X : ndarray, shape (n, 30)
        Full feature vectors; only the ``mask`` slots are used.
    y : ndarray of 0/1
    mask : bool array of length 30 or list of feature names

    Returns
    -------
    (MlpModel, TrainReport)
        The report carries the per-epoch training loss and held-out
        accuracy/precision/recall at the 0.4 confidence gate.
    """
    config = config or TrainConfig()
    config.validate()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if len(np.unique(y)) < 2:
        raise ValueError("training data must contain both classes")
    if not isinstance(mask, np.ndarray) or mask.dtype != bool:
        names = list(mask)
        mask = np.zeros(N_FEATURES, dtype=bool)
        mask[[FEATURE_INDEX[n] for n in names]] = True
    rng = np.random.default_rng(config.seed)

    n = len(y)
    order = rng.permutation(n)
    n_hold = int(round(config.holdout_fraction * n))
    hold, fit = order[:n_hold], order[n_hold:]
    if len(np.unique(y[fit])) < 2:
        hold, fit = order[:0], order
    Xs = X[:, mask]
    shift = Xs[fit].mean(axis=0)
    scale = Xs[fit].std(axis=0)
    scale[scale < 1e-12] = 1.0
    model = init_model(mask, shift, scale, config.hidden, rng)

    pos = fit[y[fit] == 1]
    neg = fit[y[fit] == 0]
    report = TrainReport(n_train=len(fit), n_holdout=len(hold))
    params = {k: np.array(v, dtype=float) for k, v in model.params().items()}
    for _ in range(config.epochs):
        if config.balance:
            small, big = (pos, neg) if len(pos) < len(neg) else (neg, pos)
            extra = rng.choice(small, len(big) - len(small), replace=True)
            epoch_idx = rng.permutation(np.concatenate([big, small, extra]))
        else:
            epoch_idx = rng.permutation(fit)
        for start in range(0, len(epoch_idx), config.batch_size):
            b = epoch_idx[start:start + config.batch_size]
            grads = gradient(model, Xs[b], y[b])
            for k in params:
                params[k] -= config.learning_rate * grads[k]
            model = model.with_params(params)
        report.loss.append(mse(model, Xs[fit], y[fit]))
    if len(hold):
        report.holdout = classification_metrics(forward(model, Xs[hold]), y[hold])
    return model, report


def save_model(model: MlpModel, path):
    def row(a):
        return " ".join(repr(float(v)) for v in np.ravel(a))

    lines = [
        "ppgtrack-mlp",
        f"version {FORMAT_VERSION}",
        f"input_dim {model.input_dim}",
        f"hidden {model.hidden}",
        "mask " + " ".join(model.feature_names),
        "shift " + row(model.shift),
        "scale " + row(model.scale),
        "w_hidden",
    ]
    lines += [row(r) for r in model.w_hidden]
    lines += [
        "theta_hidden " + row(model.theta_hidden),
        "w_out " + row(model.w_out),
        f"theta_out {model.theta_out!r}",
        "end",
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path):
    path = Path(path)
    lines = path.read_text().splitlines()
    it = iter(lines)

    def field_line(key):
        try:
            line = next(it)
        except StopIteration:
            raise ModelFormatError(f"{path}: truncated before {key!r}") from None
        head, _, rest = line.partition(" ")
        if head != key:
            raise ModelFormatError(f"{path}: expected {key!r}, found {line[:40]!r}")
        return rest.split()

    def floats(tokens, n, key):
        try:
            vals = np.array([float(t) for t in tokens])
        except ValueError:
            raise ModelFormatError(f"{path}: non-numeric {key}") from None
        if len(vals) != n:
            raise ModelDimensionError(f"{path}: {key} has {len(vals)} values, expected {n}")
        return vals

    if next(it, None) != "ppgtrack-mlp":
        raise ModelFormatError(f"{path}: not a model file")
    version = field_line("version")
    if version != [str(FORMAT_VERSION)]:
        raise ModelFormatError(f"{path}: unsupported version {' '.join(version)}")
    try:
        d = int(field_line("input_dim")[0])
        h = int(field_line("hidden")[0])
    except (IndexError, ValueError):
        raise ModelFormatError(f"{path}: bad dimension header") from None
    names = field_line("mask")
    unknown = [n for n in names if n not in FEATURE_INDEX]
    if unknown:
        raise ModelFormatError(f"{path}: unknown features {unknown}")
    if len(names) != d:
        raise ModelDimensionError(f"{path}: mask lists {len(names)} features, input_dim is {d}")
    mask = np.zeros(N_FEATURES, dtype=bool)
    mask[[FEATURE_INDEX[n] for n in names]] = True
    if names != [n for n in FEATURE_NAMES if n in names]:
        raise ModelFormatError(f"{path}: mask features out of canonical order")
    shift = floats(field_line("shift"), d, "shift")
    scale = floats(field_line("scale"), d, "scale")
    field_line("w_hidden")
    w_rows = []
    for r in range(d):
        line = next(it, None)
        if line is None:
            raise ModelFormatError(f"{path}: truncated weight block")
        w_rows.append(floats(line.split(), h, f"w_hidden row {r}"))
    theta_h = floats(field_line("theta_hidden"), h, "theta_hidden")
    w_out = floats(field_line("w_out"), h, "w_out")
    theta_o = floats(field_line("theta_out"), 1, "theta_out")[0]
    if next(it, None) != "end":
        raise ModelFormatError(f"{path}: missing end marker")
    return MlpModel(mask, shift, scale, np.array(w_rows).reshape(d, h), theta_h, w_out, theta_o)
