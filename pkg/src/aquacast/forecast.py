"""Feature windows and the one-step and day-ahead prediction scenarios."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .clustering import KMeansModel
from .data import Scaler
from .errors import DataError, NumericalError, ShapeError
from .expansion import expand_rows
from .models import DAY, GRUN_HISTORY, GRUN_LAGS, ModelSpec

ROLLOUT_CHUNK = 512


@dataclass(frozen=True)
class FeatureWindow:
    """Input rows ``(scaled value, one-hot class...)``, oldest first."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[1] < 1:
            raise ShapeError("window rows must form a (length, 1 + m) matrix")
        if rows.shape[1] > 1 and not np.allclose(rows[:, 1:].sum(axis=1), 1.0):
            raise ShapeError("every class indicator row must sum to 1")
        object.__setattr__(self, "rows", rows)

    def __len__(self):
        return self.rows.shape[0]


@dataclass(frozen=True)
class GRUNFeatureWindow:
    """Scaled lags for the three GRUN branches, each in chronological order.

    ``recent`` holds t-5..t-1, ``near`` t-98..t-94, ``distant`` t-194..t-190.
    """

    recent: np.ndarray
    near: np.ndarray
    distant: np.ndarray

    @property
    def rows(self) -> np.ndarray:
        return np.stack([self.recent, self.near, self.distant]).astype(np.float64)


@dataclass(frozen=True)
class ForecastResult:
    predicted: np.ndarray
    scenario: int
    actual: np.ndarray | None = None
    abs_errors: np.ndarray | None = field(default=None)

    def __post_init__(self):
        expected = 1 if self.scenario == 1 else DAY
        if self.scenario not in (1, 2) or len(self.predicted) != expected:
            raise ShapeError(f"scenario {self.scenario} must hold {expected} predictions")
        if self.actual is not None and self.abs_errors is None:
            err = np.abs(np.asarray(self.actual, dtype=np.float64) - self.predicted)
            object.__setattr__(self, "abs_errors", err)


@dataclass
class Forecaster:
    """A trained network bundled with the scaler and class centers it was trained with."""

    spec: ModelSpec
    network: object
    scaler: Scaler
    kmeans: KMeansModel | None = None
    correction: object | None = None

    def __post_init__(self):
        if self.spec.kind in ("dcgru", "edcgru"):
            if self.kmeans is None or self.kmeans.m != self.spec.m_classes:
                raise ValueError("class-feature models need a k-means model with m_classes centers")

    @property
    def kind(self) -> str:
        return self.spec.kind

    @property
    def rho(self) -> int:
        return self.spec.rho if self.spec.kind == "edcgru" else 0

    @property
    def window(self) -> int:
        return self.spec.window

    @property
    def history(self) -> int:
        """Actual readings needed before the first predicted period."""
        if self.kind == "grun":
            return GRUN_HISTORY
        # one extra reading feeds the interpolated values at the window start
        return DAY + 1 if self.rho else DAY

    @property
    def param_count(self) -> int:
        k = self.network.param_count
        if self.correction is not None:
            k += self.correction.param_count
        return int(k)

    def features(self, raw) -> np.ndarray:
        """Per-position rows for raw values of shape (..., L) → (..., L, 1 + m)."""
        raw = np.asarray(raw, dtype=np.float64)
        scaled = self.scaler.transform(raw)[..., None]
        if self.kmeans is None:
            return scaled
        return np.concatenate([scaled, self.kmeans.one_hot(raw)], axis=-1)

    def inputs(self, raw_windows) -> np.ndarray:
        """Network inputs for raw windows of shape (n, window)."""
        raw_windows = np.asarray(raw_windows, dtype=np.float64)
        if raw_windows.ndim != 2 or raw_windows.shape[1] != self.window:
            raise ShapeError(f"expected windows of length {self.window}, got {raw_windows.shape}")
        if self.kind == "grun":
            return self.scaler.transform(raw_windows[:, GRUN_LAGS + GRUN_HISTORY])
        return self.features(raw_windows)


def assemble_window(history_scaled, kmeans: KMeansModel | None, scaler: Scaler,
                    rho: int = 0) -> FeatureWindow:
    """Pair each scaled value with the one-hot class of its unscaled value.

    ``history_scaled`` must hold exactly ``96 * (rho + 1)`` values. With no
    k-means model the rows carry the value alone.
    """
    h = np.asarray(history_scaled, dtype=np.float64)
    expected = DAY * (rho + 1)
    if h.ndim != 1 or h.size != expected:
        raise ShapeError(f"window needs exactly {expected} values, got {h.size}")
    if kmeans is None:
        return FeatureWindow(h[:, None])
    return FeatureWindow(np.column_stack([h, kmeans.one_hot(scaler.invert(h))]))


def grun_window(history_scaled) -> GRUNFeatureWindow:
    """GRUN lag blocks from the last 194 (or more) scaled values."""
    h = np.asarray(history_scaled, dtype=np.float64)
    if h.ndim != 1 or h.size < GRUN_HISTORY:
        raise ShapeError(f"GRUN needs at least {GRUN_HISTORY} values of history, got {h.size}")
    blocks = h[GRUN_LAGS + h.size]
    return GRUNFeatureWindow(*blocks)


def _to_demand(forecaster: Forecaster, scaled_output) -> np.ndarray:
    out = forecaster.scaler.invert(np.asarray(scaled_output, dtype=np.float64))
    if not np.all(np.isfinite(out)):
        raise NumericalError("model produced a non-finite prediction")
    return np.maximum(out, 0.0)


def predict_one(forecaster: Forecaster, window) -> float:
    """Next-period demand in original units from an assembled window."""
    rows = np.asarray(window.rows, dtype=np.float64)
    if rows.shape != tuple(forecaster.network.input_shape):
        raise ShapeError(f"window shape {rows.shape} does not match model input "
                         f"{tuple(forecaster.network.input_shape)}")
    return float(_to_demand(forecaster, forecaster.network.predict(rows[None])[0, 0]))


def _rollout_chunk(forecaster: Forecaster, histories: np.ndarray, n_periods: int) -> np.ndarray:
    rho = forecaster.rho
    L = forecaster.window
    if rho:
        start = expand_rows(histories[:, -(DAY + 1):], rho)[:, -L:]
    else:
        start = histories[:, -L:]
    steps = n_periods * (rho + 1)
    buf = np.empty((histories.shape[0], L + steps))
    buf[:, :L] = start
    for s in range(steps):
        X = forecaster.inputs(buf[:, s : s + L])
        buf[:, L + s] = _to_demand(forecaster, forecaster.network.predict(X)[:, 0])
    return buf[:, L + rho :: rho + 1]


def rollout(forecaster: Forecaster, histories, n_periods: int) -> np.ndarray:
    """Iterated prediction of ``n_periods`` actual periods for each history row.

    Every prediction is inverse-scaled, clamped at zero, classified and
    appended to the rolling window, whose oldest entry drops out. For an
    expanded model ``n_periods * (rho + 1)`` internal steps are run and every
    ``(rho + 1)``-th value is kept.
    """
    H = np.asarray(histories, dtype=np.float64)
    if H.ndim == 1:
        H = H[None]
    if H.shape[1] < forecaster.history:
        raise DataError(f"need at least {forecaster.history} readings of history, got {H.shape[1]}")
    parts = [_rollout_chunk(forecaster, H[i : i + ROLLOUT_CHUNK], n_periods)
             for i in range(0, H.shape[0], ROLLOUT_CHUNK)]
    if not parts:
        return np.empty((0, n_periods))
    return np.concatenate(parts)


def _histories(forecaster: Forecaster, values, targets) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.int64)
    h = forecaster.history
    if targets.size and (targets.min() < h or targets.max() > values.size):
        raise DataError(f"every target index needs {h} earlier readings inside the series")
    return values[targets[:, None] + np.arange(-h, 0)]


def scenario1(forecaster: Forecaster, values, targets) -> np.ndarray:
    """One-step predictions for each index in ``targets`` from the actual readings before it."""
    return rollout(forecaster, _histories(forecaster, values, targets), 1)[:, 0]


def scenario2(forecaster: Forecaster, values, starts, correct: bool = True) -> np.ndarray:
    """Day-ahead predictions (n_days, 96) starting at each index in ``starts``.

    A model carrying a correction network has it applied once per day unless
    ``correct`` is False.
    """
    days = rollout(forecaster, _histories(forecaster, values, starts), DAY)
    if correct and forecaster.correction is not None:
        days = apply_correction(days, forecaster.correction, forecaster.scaler)
    return days


def predict_next(forecaster: Forecaster, history, actual=None) -> ForecastResult:
    pred = rollout(forecaster, history, 1)[0]
    return ForecastResult(pred, 1, None if actual is None else np.atleast_1d(actual))


def predict_day(forecaster: Forecaster, history, actual=None) -> ForecastResult:
    pred = scenario2(forecaster, np.asarray(history, dtype=np.float64),
                     [np.size(history)])[0]
    return ForecastResult(pred, 2, None if actual is None else np.asarray(actual, dtype=np.float64))


def apply_correction(day_prediction, correction, scaler: Scaler | None = None) -> np.ndarray:
    """Map predicted day(s) of 96 values through the correction network.

    With a scaler the map runs in scaled space and the result is returned in
    original units, clamped at zero.
    """
    x = np.asarray(day_prediction, dtype=np.float64)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.shape[1] != DAY:
        raise ShapeError(f"correction expects {DAY} values per day, got {X.shape[1]}")
    if scaler is None:
        out = correction.predict(X)
    else:
        out = np.maximum(scaler.invert(correction.predict(scaler.transform(X))), 0.0)
    return out[0] if single else out


def day_starts(n_values: int, first: int, history: int = 0, phase: int | None = None) -> np.ndarray:
    """Start indices of the complete days at or after ``first`` with ``history`` readings before them.

    With ``phase`` set, days begin only at indices congruent to it modulo 96
    (calendar days); otherwise they run back to back from the first
    admissible index.
    """
    first = max(first, history)
    if phase is not None:
        first += (phase - first) % DAY
    return np.arange(first, n_values - DAY + 1, DAY, dtype=np.int64)


def day_phase(start_time, interval_minutes: int = 15) -> int:
    """Index of the first reading stamped 00:15, i.e. the first period of a calendar day."""
    minute = start_time.hour * 60 + start_time.minute
    return ((interval_minutes - minute) // interval_minutes) % DAY


def write_predictions(path, timestamps, predicted, actual=None) -> None:
    """CSV ``timestamp,predicted[,actual,abs_error]``."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = ["timestamp", "predicted"]
        if actual is not None:
            header += ["actual", "abs_error"]
        writer.writerow(header)
        for i, (ts, p) in enumerate(zip(timestamps, predicted)):
            row = [ts.isoformat(sep=" "), repr(float(p))]
            if actual is not None:
                row += [repr(float(actual[i])), repr(abs(float(actual[i]) - float(p)))]
            writer.writerow(row)
