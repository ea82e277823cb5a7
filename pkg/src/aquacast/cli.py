"""Command-line front end: synth, elbow, train, predict, evaluate, param-count."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from datetime import datetime
from pathlib import Path


from . import clustering, data, evaluate, forecast, models, pipeline
from .errors import DataError, NumericalError, ShapeError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

TRAIN_FRACTION = 0.9
SEED_ENV = "AQUACAST_SEED"

log = logging.getLogger("aquacast")


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def read_config(path) -> dict:
    """Flat ``key=value`` file; blank lines and ``#`` comments are skipped."""
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read config file: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _split_sizes(n: int, args):
    train_n = args.train_n if args.train_n is not None else int(round(TRAIN_FRACTION * n))
    test_n = args.test_n if args.test_n is not None else n - train_n
    return train_n, test_n


def _load_split(args):
    series = data.load_csv(args.data)
    train_n, test_n = _split_sizes(len(series), args)
    return series, data.split(series, train_n, test_n, args.val_frac)


def _add_split_args(p):
    p.add_argument("--train-n", type=int, default=None,
                   help="records used for training + validation (default: first 90%%)")
    p.add_argument("--test-n", type=int, default=None,
                   help="records held out at the end (default: the rest)")
    p.add_argument("--val-frac", type=float, default=0.15)


def cmd_synth(args) -> int:
    cfg = data.SyntheticConfig(
        n_samples=args.n, seed=args.seed, noise_std=args.noise, weekly_amplitude=args.weekly,
        spike_rate=args.spike_rate, spike_magnitude=args.spike_magnitude,
    )
    series = data.generate_synthetic(cfg)
    data.write_csv(series, args.out)
    stats = data.compute_stats(series).as_dict()
    print(f"wrote {len(series)} readings to {args.out}")
    print(f"{'statistic':<16}{'series':>12}{'reference':>12}")
    for key, value in stats.items():
        ref = data.DMA1_TARGETS.get(key)
        ref_txt = "" if ref is None else f"{ref:12.3f}"
        print(f"{key:<16}{value:12.3f}{ref_txt}")
    return EXIT_OK


def cmd_elbow(args) -> int:
    if args.m_min >= args.m_max:
        raise UsageError("--m-min must be smaller than --m-max")
    series, split = _load_split(args)
    values = split.train.values
    if args.classes is not None:
        print(args.classes)
        return EXIT_OK
    curve = clustering.elbow(values, args.m_min, args.m_max, seed=args.seed)
    if args.out:
        curve.to_csv(args.out)
    if curve.low_confidence:
        log.warning("knee is weak (distance %.3g of chord %.3g)", curve.knee_distance, curve.chord_length)
    print(curve.chosen_m)
    return EXIT_OK


def _train_config(args):
    overrides = {"shuffle_seed": args.seed}
    for name in ("learning_rate", "batch_size", "max_epochs", "early_stop_patience", "lr_halving_epochs"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    try:
        return pipeline.default_train_config(args.model, **overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_train(args) -> int:
    if args.model == "edcgru" and args.rho < 1:
        raise UsageError("EDCGRU needs --rho >= 1")
    config = _train_config(args)
    series, split = _load_split(args)
    result = pipeline.fit_forecaster(args.model, series, split, m=args.classes, rho=args.rho,
                                     seed=args.seed, config=config)
    out = Path(args.out)
    pipeline.save_forecaster(out, result.forecaster, config)
    hist = result.history
    history_path = Path(args.history) if args.history else out.with_suffix(".history.csv")
    with history_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "train_loss", "val_loss"])
        for epoch, tr, va in hist.to_rows():
            writer.writerow([epoch, repr(tr), repr(va)])
    timing_path = out.with_name(out.name + ".timing.json")
    timing_path.write_text(json.dumps({"train_s": result.train_seconds}) + "\n", encoding="utf-8")
    if hist.early_stopped:
        print(f"early stop after epoch {hist.stopped_epoch}; restored epoch {hist.best_epoch}")
    else:
        print(f"ran {hist.stopped_epoch} epochs; restored epoch {hist.best_epoch}")
    print(f"model {args.model}: k = {result.forecaster.param_count}, "
          f"train seconds {result.train_seconds:.1f}")
    print(f"checkpoint {out}")
    return EXIT_OK


def _parse_time(text: str) -> datetime:
    try:
        return datetime.fromisoformat(text)
    except ValueError:
        raise UsageError(f"cannot parse timestamp {text!r}") from None


def cmd_predict(args) -> int:
    fc, _ = pipeline.load_forecaster(args.checkpoint)
    series = data.load_csv(args.data)
    values = series.values
    idx = len(series) if args.at is None else series.index_of(_parse_time(args.at))
    if idx < fc.history or idx > len(series):
        raise DataError(f"prediction at index {idx} needs {fc.history} earlier readings inside the series")
    history = values[:idx]
    n = 1 if args.scenario == 1 else models.DAY
    if args.scenario == 1:
        pred = forecast.predict_next(fc, history).predicted
    else:
        pred = forecast.predict_day(fc, history).predicted
    stamps = [series.timestamp(idx + i) for i in range(n)]
    actual = None
    if idx + n <= len(series):
        actual = values[idx : idx + n]
    forecast.write_predictions(args.out, stamps, pred, actual)
    print(f"wrote {n} predictions to {args.out}")
    if actual is not None:
        print(f"mae {evaluate.mae(actual, pred):.4f}  mape {evaluate.mape(actual, pred):.4f}%")
    return EXIT_OK


def _model_names(paths, kinds):
    names = []
    for path, kind in zip(paths, kinds):
        name = kind if kinds.count(kind) == 1 else f"{kind}:{Path(path).stem}"
        names.append(name)
    return names


def cmd_evaluate(args) -> int:
    loaded = [pipeline.load_forecaster(p)[0] for p in args.checkpoints]
    names = _model_names(args.checkpoints, [f.kind for f in loaded])
    series, split = _load_split(args)
    train_s = {}
    for name, path in zip(names, args.checkpoints):
        timing = Path(str(path) + ".timing.json")
        if timing.exists():
            train_s[name] = json.loads(timing.read_text(encoding="utf-8"))["train_s"]
    report = evaluate.build_report(dict(zip(names, loaded)), series.values, split.test_start,
                                   train_seconds=train_s, reps=args.reps,
                                   phase=forecast.day_phase(series.start_time))
    timing = not args.no_timing
    report.write_csv(args.out_csv, timing)
    if args.out_json:
        report.write_json(args.out_json, timing)
    for d in report.to_dicts(timing):
        print("  ".join(f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}" for k, v in d.items()))
    return EXIT_OK


def cmd_param_count(args) -> int:
    if args.checkpoint:
        fc, _ = pipeline.load_forecaster(args.checkpoint)
        print(fc.param_count)
        return EXIT_OK
    if args.model is None:
        raise UsageError("give a checkpoint or --model")
    try:
        spec = models.ModelSpec(args.model, args.classes if args.model in ("dcgru", "edcgru") else 0,
                                args.rho if args.model == "edcgru" else 0)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    k = models.build(spec, 0).param_count
    if args.model == "grun":
        k += models.build_grun_correction(0).param_count
    print(k)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aquacast",
                                     description="Short-term water demand forecasting with GRU models.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log training progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--config", help="flat key=value file; command-line flags take precedence")
        p.add_argument("--seed", type=int, default=None, help=f"random seed (fallback: ${SEED_ENV}, then 0)")
        return p

    p = add("synth", cmd_synth, "write a synthetic demand series")
    p.add_argument("--n", type=int, default=25000)
    p.add_argument("--noise", type=float, default=data.SyntheticConfig.noise_std)
    p.add_argument("--weekly", type=float, default=data.SyntheticConfig.weekly_amplitude)
    p.add_argument("--spike-rate", type=float, default=0.0)
    p.add_argument("--spike-magnitude", type=float, default=data.SyntheticConfig.spike_magnitude)
    p.add_argument("--out", default="synthetic.csv")

    p = add("elbow", cmd_elbow, "distortion curve and chosen class count")
    p.add_argument("--data", required=True)
    p.add_argument("--m-min", type=int, default=2)
    p.add_argument("--m-max", type=int, default=10)
    p.add_argument("--classes", type=int, default=None, help="skip detection and use this count")
    p.add_argument("--out", default=None, help="m,distortion CSV")
    _add_split_args(p)

    p = add("train", cmd_train, "train a model and write a checkpoint")
    p.add_argument("--data", required=True)
    p.add_argument("--model", choices=models.KINDS, default="dcgru")
    p.add_argument("--classes", type=int, default=None, help="class count (default: elbow choice)")
    p.add_argument("--rho", type=int, default=pipeline.DEFAULT_RHO)
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--lr-halving-epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--max-epochs", type=int, default=None)
    p.add_argument("--early-stop-patience", type=int, default=None)
    p.add_argument("--out", default="model.ckpt")
    p.add_argument("--history", default=None, help="per-epoch loss CSV (default: next to the checkpoint)")
    _add_split_args(p)

    p = add("predict", cmd_predict, "forecast one period or one day")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--scenario", type=int, choices=(1, 2), default=1)
    p.add_argument("--at", default=None, help="timestamp of the first predicted period (default: after the data)")
    p.add_argument("--out", default="predictions.csv")

    p = add("evaluate", cmd_evaluate, "metrics, AIC and timing for trained models")
    p.add_argument("checkpoints", nargs="+")
    p.add_argument("--data", required=True)
    p.add_argument("--reps", type=int, default=1000, help="timed repetitions (0 disables timing)")
    p.add_argument("--no-timing", action="store_true", help="omit timing columns from the outputs")
    p.add_argument("--out-csv", default="report.csv")
    p.add_argument("--out-json", default=None)
    _add_split_args(p)

    p = add("param-count", cmd_param_count, "trainable parameter count")
    p.add_argument("checkpoint", nargs="?")
    p.add_argument("--model", choices=models.KINDS, default=None)
    p.add_argument("--classes", type=int, default=pipeline.DEFAULT_M)
    p.add_argument("--rho", type=int, default=pipeline.DEFAULT_RHO)
    return parser


def _apply_config(parser, argv):
    """Reparse with config-file values installed as subcommand defaults."""
    args = parser.parse_args(argv)
    if not args.config:
        return args
    values = read_config(args.config)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, raw in values.items():
        action = actions.get(key)
        if action is None or key in ("config", "func", "help"):
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
            continue
        try:
            defaults[key] = action.type(raw) if action.type else raw
        except ValueError:
            raise UsageError(f"bad value for {key}: {raw!r}") from None
        if action.choices is not None and defaults[key] not in action.choices:
            raise UsageError(f"bad value for {key}: {raw!r}")
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        try:
            args = _apply_config(parser, argv)
        except SystemExit as exc:
            # argparse exits 2 on bad flags and 0 after --help
            return int(exc.code or 0)
        if args.seed is None:
            args.seed = _default_seed()
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"aquacast: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ShapeError) as exc:
        print(f"aquacast: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"aquacast: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"aquacast: I/O error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
