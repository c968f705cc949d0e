"""
Command-line interface.

    ppgtrack train    --data DIR --model M --init-model I [--out J.csv]
    ppgtrack track    --data REC.csv --model M --init-model I [--out EST.csv] [--trace T]
    ppgtrack eval     --data DIR --model M --init-model I [--out EVAL.csv] [--trace T]
    ppgtrack features --data DIR [--out J.csv]
    ppgtrack synth    --out DIR [--count N]

A data directory holds ``<id>.csv`` recordings with ``<id>_truth.txt`` ground
truth next to them. ``--config`` names a ``key = value`` text file; any field of
:class:`~ppgtrack.tracker.TrackerConfig` or :class:`~ppgtrack.mlp.TrainConfig`
may be set, plus ``fallback_features``.

Exit status: 0 success, 1 usage, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
from pathlib import Path

from .features import feature_report
from .mlp import ModelFormatError, TrainConfig, load_model, save_model
from .pipeline import TRAIN_FALLBACK, build_labeled_set, evaluate, train_models
from .signal_io import (DataError, exercise_suite, load_ground_truth, load_recording,
                        write_ground_truth, write_recording)
from .spectrum import SpectralFitError
from .tracker import TrackerConfig, TrackerModels, track_recording

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
TRUTH_SUFFIX = "_truth.txt"

log = logging.getLogger("ppgtrack")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _coerce(text, default):
    if isinstance(default, bool):
        low = text.lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise ValueError(f"not a boolean: {text!r}")
        return low in ("true", "1", "yes")
    if isinstance(default, tuple):
        return tuple(float(v) for v in text.replace("(", "").replace(")", "").split(",") if v.strip())
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text


def read_config(path):
    """
    Parse a ``key = value`` file into ``(TrackerConfig, TrainConfig, fallback)``.

    Blank lines and ``#`` comments are ignored; tuple fields take
    comma-separated numbers. Unknown keys are an error.
    """
    tracker, training = TrackerConfig(), TrainConfig()
    fallback = TRAIN_FALLBACK
    if path is None:
        return tracker, training, fallback
    t_over, m_over = {}, {}
    t_fields = {f.name: getattr(tracker, f.name) for f in dataclasses.fields(tracker)}
    m_fields = {f.name: getattr(training, f.name) for f in dataclasses.fields(training)}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (s.strip() for s in line.partition("="))
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        try:
            if key in t_fields:
                t_over[key] = _coerce(value, t_fields[key])
            elif key in m_fields:
                m_over[key] = _coerce(value, m_fields[key])
            elif key == "fallback_features":
                fallback = int(value)
            else:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: {exc}") from None
    try:
        tracker = dataclasses.replace(tracker, **t_over)
        training = dataclasses.replace(training, **m_over)
        training.validate()
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None
    return tracker, training, fallback


def _layout(text):
    if not text:
        return None
    out = {}
    for part in text.split(","):
        key, _, col = part.partition("=")
        out[key.strip()] = int(col) if col.strip().isdigit() else col.strip()
    return out


def scan_data_dir(path, require_truth=True, layout=None, rate_hz=125.0):
    """
    Load every ``<id>.csv`` of a directory, sorted by id, with its truth file.

    Returns ``[(Recording, GroundTruth or None), ...]``.
    """
    root = Path(path)
    if not root.is_dir():
        raise DataError(f"{root}: not a directory")
    files = sorted(p for p in root.glob("*.csv"))
    if not files:
        raise DataError(f"{root}: no recordings (*.csv)")
    pairs = []
    for f in files:
        truth_path = f.with_name(f.stem + TRUTH_SUFFIX)
        if not truth_path.is_file():
            if require_truth:
                raise DataError(f"{f.name}: missing ground truth {truth_path.name}")
            truth = None
        else:
            truth = load_ground_truth(truth_path)
        pairs.append((load_recording(f, layout, rate_hz, id=f.stem), truth))
    return pairs


def _trace_sink(target):
    if target is None:
        return None, None
    if target == "-":
        return (lambda line: print(line, file=sys.stderr)), None
    fh = open(target, "w")
    return (lambda line: fh.write(line + "\n")), fh


def _load_models(args):
    if not args.model or not args.init_model:
        raise UsageError("--model and --init-model are required")
    return TrackerModels(load_model(args.model), load_model(args.init_model))


def cmd_train(args):
    cfg, train_cfg, fallback = read_config(args.config)
    if args.seed is not None:
        train_cfg = dataclasses.replace(train_cfg, seed=args.seed)
    if not args.model or not args.init_model:
        raise UsageError("--model and --init-model are required")
    pairs = scan_data_dir(args.data, True, _layout(args.layout), args.rate)
    data = build_labeled_set(pairs, cfg)
    outcome = train_models(data, train_cfg, cfg, fallback)
    save_model(outcome.models.main, args.model)
    save_model(outcome.models.init, args.init_model)
    report_path = args.out or str(Path(args.model).with_suffix("")) + "_features.csv"
    outcome.report.write_csv(report_path)
    print(f"labeled candidates: {outcome.n_examples} ({int(data.y.sum())} HR)")
    print(f"main model: {outcome.models.main.input_dim} features, "
          f"holdout {_metrics(outcome.main_report.holdout)}")
    print(f"init model: {outcome.models.init.input_dim} features, "
          f"holdout {_metrics(outcome.init_report.holdout)}")
    print(f"wrote {args.model}, {args.init_model}, {report_path}")
    return EXIT_OK


def _metrics(d):
    return " ".join(f"{k}={v:.3f}" for k, v in d.items()) if d else "n/a"


def cmd_track(args):
    cfg, _, _ = read_config(args.config)
    models = _load_models(args)
    rec = load_recording(args.data, _layout(args.layout), args.rate, id=Path(args.data).stem)
    trace, fh = _trace_sink(args.trace)
    try:
        result = track_recording(rec, models, cfg, trace)
    finally:
        if fh:
            fh.close()
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["window", "bpm", "confidence", "path"])
        for e in result.estimates:
            w.writerow([e.window_index, f"{e.bpm:.4f}", f"{e.confidence:.4f}", e.path])
    finally:
        if args.out:
            out.close()
    log.info("ARTPW %.2f ms over %d windows", result.artpw_ms, len(result.estimates))
    return EXIT_OK


def cmd_eval(args):
    cfg, _, _ = read_config(args.config)
    models = _load_models(args)
    pairs = scan_data_dir(args.data, True, _layout(args.layout), args.rate)
    trace, fh = _trace_sink(args.trace)
    try:
        result = evaluate(pairs, models, cfg, trace)
    finally:
        if fh:
            fh.close()
    print(result.format())
    if args.out:
        with open(args.out, "w", newline="") as out:
            csv.writer(out, lineterminator="\n").writerows(result.csv_rows())
    return EXIT_OK if result.ids else EXIT_DATA


def cmd_features(args):
    cfg, _, fallback = read_config(args.config)
    pairs = scan_data_dir(args.data, True, _layout(args.layout), args.rate)
    data = build_labeled_set(pairs, cfg)
    if len(data) == 0:
        raise DataError("no candidates found in the data")
    report = feature_report(data.X, data.y, fallback=fallback)
    print(report.format())
    if args.out:
        report.write_csv(args.out)
    return EXIT_OK


def cmd_synth(args):
    root = Path(args.out)
    root.mkdir(parents=True, exist_ok=True)
    for rec, truth in exercise_suite(args.count):
        write_recording(rec, root / f"{rec.id}.csv")
        write_ground_truth(truth, root / f"{rec.id}{TRUTH_SUFFIX}")
    print(f"wrote {args.count} recordings to {root}")
    return EXIT_OK


def build_parser():
    p = _Parser(prog="ppgtrack", description="PPG heart-rate tracking without accelerometer.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, data_help, model=True):
        sp.add_argument("--data", required=True, help=data_help)
        sp.add_argument("--config", help="key = value configuration file")
        sp.add_argument("--rate", type=float, default=125.0, help="sample rate in Hz")
        sp.add_argument("--layout", help="column map, e.g. 'ppg1=1,ppg2=2'")
        if model:
            sp.add_argument("--model", help="main model file")
            sp.add_argument("--init-model", help="initialization model file")

    sp = sub.add_parser("train", help="train the main and init models")
    common(sp, "directory of recordings and truth files")
    sp.add_argument("--seed", type=int, help="training seed (overrides config)")
    sp.add_argument("--out", help="feature report CSV (default: <model>_features.csv)")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("track", help="track one recording")
    common(sp, "recording CSV")
    sp.add_argument("--trace", help="per-window trace file, '-' for stderr")
    sp.add_argument("--out", help="estimates CSV (default: stdout)")
    sp.set_defaults(func=cmd_track)

    sp = sub.add_parser("eval", help="MAE and ARTPW over a labeled directory")
    common(sp, "directory of recordings and truth files")
    sp.add_argument("--trace", help="per-window trace file, '-' for stderr")
    sp.add_argument("--out", help="results CSV")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("features", help="feature separability report")
    common(sp, "directory of recordings and truth files", model=False)
    sp.add_argument("--out", help="report CSV")
    sp.set_defaults(func=cmd_features)

    sp = sub.add_parser("synth", help="write the synthetic exercise suite")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--count", type=int, default=10)
    sp.set_defaults(func=cmd_synth)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ppgtrack: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SpectralFitError, ArithmeticError, FloatingPointError) as exc:
        print(f"ppgtrack: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, ModelFormatError, OSError, ValueError) as exc:
        print(f"ppgtrack: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
