"""Accuracy metrics, AIC scoring, forecast timing and report assembly."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .forecast import Forecaster, day_starts, predict_day, predict_next, scenario1, scenario2

AIC_CORRECTION_LIMIT = 40.0
WARMUP_REPS = 10
REPORT_FIELDS = ("model", "scenario", "mae", "mape", "rss", "aic", "k", "train_s", "forecast_ms")
TIMING_FIELDS = ("train_s", "forecast_ms")


def _pair(actual, predicted):
    a = np.asarray(actual, dtype=np.float64).ravel()
    p = np.asarray(predicted, dtype=np.float64).ravel()
    if a.size != p.size:
        raise DataError(f"length mismatch: {a.size} actual vs {p.size} predicted")
    if a.size == 0:
        raise DataError("need at least one value")
    return a, p


def mae(actual, predicted) -> float:
    a, p = _pair(actual, predicted)
    return float(np.mean(np.abs(a - p)))


def mape(actual, predicted) -> float:
    """Mean absolute percentage error, in percent."""
    a, p = _pair(actual, predicted)
    if np.any(a == 0):
        raise DataError("mape is undefined for zero actual values")
    return float(100.0 * np.mean(np.abs(a - p) / np.abs(a)))


def rss(actual, predicted) -> float:
    a, p = _pair(actual, predicted)
    return float(np.sum((a - p) ** 2))


def aic(n: int, k: int, rss_value: float) -> float:
    """n ln(RSS/n) + 2k, plus 2k(k+1)/(n-k-1) when 1 < n/k < 40."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    if not rss_value > 0:
        raise ValueError("rss must be positive")
    base = n * math.log(rss_value / n) + 2 * k
    ratio = n / k
    if 1 < ratio < AIC_CORRECTION_LIMIT:
        if n <= k + 1:
            raise ValueError(f"small-sample correction needs n > k + 1 (n={n}, k={k})")
        return base + 2 * k * (k + 1) / (n - k - 1)
    return base


def time_forecast(forecaster: Forecaster, scenario: int, history, reps: int = 1000,
                  warmup: int = WARMUP_REPS) -> float:
    """Mean wall-clock milliseconds of one prediction over ``reps`` timed runs.

    Scenario 1 times a single next-period prediction, scenario 2 a full day.
    ``min(warmup, reps)`` untimed runs go first.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    fn = predict_next if scenario == 1 else predict_day
    history = np.asarray(history, dtype=np.float64)
    for _ in range(min(warmup, reps)):
        fn(forecaster, history)
    total = 0.0
    for _ in range(reps):
        t0 = time.perf_counter()
        fn(forecaster, history)
        total += time.perf_counter() - t0
    return 1000.0 * total / reps


@dataclass(frozen=True)
class ReportRow:
    model: str
    scenario: int
    mae: float
    mape: float
    rss: float
    aic: float
    k: int
    train_s: float | None
    forecast_ms: float | None


@dataclass
class EvalReport:
    rows: list

    def to_dicts(self, timing: bool = True) -> list:
        out = []
        for row in self.rows:
            d = asdict(row)
            if not timing:
                for name in TIMING_FIELDS:
                    d.pop(name)
            out.append(d)
        return out

    def row(self, model: str, scenario: int) -> ReportRow:
        for r in self.rows:
            if r.model == model and r.scenario == scenario:
                return r
        raise KeyError((model, scenario))

    def write_csv(self, path, timing: bool = True) -> None:
        fields = [f for f in REPORT_FIELDS if timing or f not in TIMING_FIELDS]
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(fields)
            for d in self.to_dicts(timing):
                writer.writerow(["" if d[f] is None else _fmt(d[f]) for f in fields])

    def write_json(self, path, timing: bool = True) -> None:
        Path(path).write_text(json.dumps(self.to_dicts(timing), indent=2) + "\n", encoding="utf-8")


def _fmt(v):
    return repr(float(v)) if isinstance(v, float) else str(v)


def one_step_all(forecaster: Forecaster, values):
    """(targets, predictions) of one-step prediction at every predictable index."""
    values = np.asarray(values, dtype=np.float64)
    targets = np.arange(forecaster.history, values.size)
    return targets, scenario1(forecaster, values, targets)


def fit_scores(forecaster: Forecaster, values, predictions=None) -> tuple:
    """(n, rss, aic) of one-step predictions over every predictable index of the series."""
    values = np.asarray(values, dtype=np.float64)
    targets = np.arange(forecaster.history, values.size)
    if predictions is None:
        _, predictions = one_step_all(forecaster, values)
    r = rss(values[targets], predictions)
    return int(targets.size), r, aic(int(targets.size), forecaster.param_count, r)


def scenario_errors(forecaster: Forecaster, values, test_start: int, scenario: int,
                    phase: int | None = 0):
    """(actual, predicted) over the test block for the given scenario.

    Scenario 2 covers every complete calendar day (days start at indices
    congruent to ``phase`` modulo 96).
    """
    values = np.asarray(values, dtype=np.float64)
    if scenario == 1:
        targets = np.arange(max(test_start, forecaster.history), values.size)
        return values[targets], scenario1(forecaster, values, targets)
    starts = day_starts(values.size, test_start, forecaster.history, phase)
    if starts.size == 0:
        raise DataError("test block holds no complete day")
    actual = values[starts[:, None] + np.arange(96)]
    return actual, scenario2(forecaster, values, starts)


def build_report(forecasters: dict, values, test_start: int, scenarios=(1, 2),
                 train_seconds: dict | None = None, reps: int = 0,
                 phase: int | None = 0) -> EvalReport:
    """One row per (model, scenario).

    ``forecasters`` maps a model name to a trained forecaster. RSS and AIC
    come from one-step predictions over the whole series and are shared by
    both scenario rows of a model; MAE and MAPE are computed on the test
    block. Timing runs only when ``reps`` > 0. ``phase`` is the index of the
    first 00:15 reading.
    """
    values = np.asarray(values, dtype=np.float64)
    train_seconds = train_seconds or {}
    rows = []
    for name, fc in forecasters.items():
        targets, one_step = one_step_all(fc, values)
        _, r, a = fit_scores(fc, values, one_step)
        for sc in scenarios:
            if sc == 1:
                # test-block slice of the same predictions that feed RSS
                keep = targets >= test_start
                actual, pred = values[targets[keep]], one_step[keep]
            else:
                actual, pred = scenario_errors(fc, values, test_start, sc, phase)
            ms = None
            if reps > 0:
                ms = time_forecast(fc, sc, values[:test_start], reps)
            rows.append(ReportRow(name, int(sc), mae(actual, pred), mape(actual, pred), r, a,
                                  fc.param_count, train_seconds.get(name), ms))
    return EvalReport(rows)
