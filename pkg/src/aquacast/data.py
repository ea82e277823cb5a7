"""Demand series ingestion, chronological splits, scaling and synthetic data."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .errors import DataError

INTERVAL_MINUTES = 15
PERIODS_PER_DAY = 96
PERIODS_PER_WEEK = 7 * PERIODS_PER_DAY

# Reference summary statistics matched by the synthetic generator defaults.
DMA1_TARGETS = {
    "count": 25000,
    "min": 30.0,
    "q25": 56.0,
    "median": 86.0,
    "q75": 94.0,
    "max": 157.0,
    "mean": 81.4,
    "std": 24.4,
    "mode": 92.0,
    "skewness": -0.478,
    "excess_kurtosis": -1.07,
}


@dataclass(frozen=True)
class DemandSeries:
    """Ordered 15-minute demand readings.

    ``values`` is stored as a read-only float64 array.
    """

    start_time: datetime
    values: np.ndarray
    interval_minutes: int = INTERVAL_MINUTES

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if self.interval_minutes != INTERVAL_MINUTES:
            raise DataError(f"interval must be {INTERVAL_MINUTES} minutes")
        if values.ndim != 1 or values.size == 0:
            raise DataError("series must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(values)):
            raise DataError("series contains non-finite values")
        if np.any(values < 0):
            raise DataError("series contains negative demand values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size

    def timestamp(self, index: int) -> datetime:
        return self.start_time + timedelta(minutes=self.interval_minutes * index)

    def index_of(self, when: datetime) -> int:
        """Index of the reading stamped ``when`` (may lie past the end)."""
        delta = when - self.start_time
        minutes = delta.total_seconds() / 60.0
        idx = minutes / self.interval_minutes
        if idx != int(idx):
            raise DataError(f"{when.isoformat()} is not on the {self.interval_minutes}-minute grid")
        return int(idx)

    def slice(self, start: int, stop: int) -> "DemandSeries":
        return DemandSeries(self.timestamp(start), self.values[start:stop], self.interval_minutes)


@dataclass(frozen=True)
class DatasetSplit:
    train: DemandSeries
    validation: DemandSeries
    test: DemandSeries
    # offsets of each part inside the source series
    train_start: int = 0
    validation_start: int = 0
    test_start: int = 0


@dataclass(frozen=True)
class SeriesStats:
    count: int
    min: float
    q25: float
    median: float
    q75: float
    max: float
    mean: float
    std: float
    mode: float
    skewness: float
    excess_kurtosis: float

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


@dataclass(frozen=True)
class Scaler:
    """Min-max scaler fitted on training data; maps [lo, hi] onto [0, 1]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.hi > self.lo):
            raise DataError(f"degenerate scaling range: lo={self.lo}, hi={self.hi}")

    def transform(self, value):
        return (np.asarray(value, dtype=np.float64) - self.lo) / (self.hi - self.lo)

    def invert(self, value):
        return np.asarray(value, dtype=np.float64) * (self.hi - self.lo) + self.lo


@dataclass(frozen=True)
class SyntheticConfig:
    """Parameters of the synthetic demand generator.

    ``mean`` and ``std`` set the level and spread of the deterministic
    daily/weekly component; ``daily_amplitude`` and ``weekly_amplitude`` are
    the relative weights of the two seasonal shapes inside it.
    """

    n_samples: int = 25000
    mean: float = DMA1_TARGETS["mean"]
    std: float = DMA1_TARGETS["std"]
    daily_amplitude: float = 1.0
    weekly_amplitude: float = 0.15
    noise_std: float = 1.0
    spike_rate: float = 0.0
    spike_magnitude: float = 30.0
    min_value: float = DMA1_TARGETS["min"]
    seed: int = 0
    start_time: datetime = field(default=datetime(2016, 1, 1, 0, 15))

    def __post_init__(self):
        if self.n_samples <= 2 * PERIODS_PER_DAY:
            raise DataError("n_samples must exceed 192")
        if not 0.0 <= self.spike_rate < 0.05:
            raise DataError("spike_rate must lie in [0, 0.05)")
        if self.std < 0 or self.noise_std < 0:
            raise DataError("std and noise_std must be non-negative")
        if self.min_value < 0:
            raise DataError("min_value must be non-negative")


def load_csv(path) -> DemandSeries:
    """Read a ``timestamp,demand`` CSV with a header line.

    Rows are sorted by timestamp; any gap or duplicate on the 15-minute grid
    is rejected.
    """
    path = Path(path)
    stamps: list[datetime] = []
    values: list[float] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise DataError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                stamp = datetime.fromisoformat(row[0].strip())
                value = float(row[1])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: malformed row {row!r}") from exc
            if not math.isfinite(value):
                raise DataError(f"{path}:{lineno}: non-finite value")
            if value < 0:
                raise DataError(f"{path}:{lineno}: negative demand value {value}")
            stamps.append(stamp)
            values.append(value)
    if not values:
        raise DataError(f"{path}: no data rows")

    order = sorted(range(len(stamps)), key=stamps.__getitem__)
    stamps = [stamps[i] for i in order]
    values = [values[i] for i in order]
    step = timedelta(minutes=INTERVAL_MINUTES)
    for prev, cur in zip(stamps, stamps[1:]):
        if cur - prev != step:
            kind = "gap" if cur - prev > step else "duplicate or off-grid"
            raise DataError(f"{path}: {kind} between {prev.isoformat()} and {cur.isoformat()}")
    return DemandSeries(stamps[0], np.array(values))


def write_csv(series: DemandSeries, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["timestamp", "demand"])
        for i, v in enumerate(series.values):
            writer.writerow([series.timestamp(i).isoformat(), repr(float(v))])


def split(series: DemandSeries, train_n: int, test_n: int, val_frac: float = 0.15) -> DatasetSplit:
    """Chronological train/validation/test split.

    The first ``train_n`` readings are divided into training and validation,
    validation being the last ``val_frac`` of them; the test set is the last
    ``test_n`` readings of the series.
    """
    n = len(series)
    if train_n < 1 or test_n < 1 or train_n + test_n > n:
        raise DataError(f"insufficient data: need {train_n} + {test_n} readings, have {n}")
    if not 0.0 < val_frac < 1.0:
        raise DataError("val_frac must lie in (0, 1)")
    n_val = int(round(train_n * val_frac))
    n_fit = train_n - n_val
    if n_fit < 1 or n_val < 1:
        raise DataError("split leaves an empty training or validation part")
    test_start = n - test_n
    return DatasetSplit(
        train=series.slice(0, n_fit),
        validation=series.slice(n_fit, train_n),
        test=series.slice(test_start, n),
        train_start=0,
        validation_start=n_fit,
        test_start=test_start,
    )


def compute_stats(series) -> SeriesStats:
    """Table-1 style summary: sample std (n-1), Fisher skewness, excess kurtosis.

    The mode is taken over values rounded to whole units. Constant series get
    skewness and kurtosis 0.
    """
    x = np.asarray(series.values if isinstance(series, DemandSeries) else series, dtype=np.float64)
    if x.size < 2:
        raise DataError("series too short for statistics (need >= 2 values)")
    mean = float(x.mean())
    dev = x - mean
    m2 = float(np.mean(dev**2))
    if m2 == 0.0:
        skew = 0.0
        kurt = 0.0
    else:
        skew = float(np.mean(dev**3) / m2**1.5)
        kurt = float(np.mean(dev**4) / m2**2 - 3.0)
    q25, median, q75 = (float(q) for q in np.quantile(x, [0.25, 0.5, 0.75]))
    rounded, counts = np.unique(np.round(x), return_counts=True)
    return SeriesStats(
        count=int(x.size),
        min=float(x.min()),
        q25=q25,
        median=median,
        q75=q75,
        max=float(x.max()),
        mean=mean,
        std=float(x.std(ddof=1)),
        mode=float(rounded[np.argmax(counts)]),
        skewness=skew,
        excess_kurtosis=kurt,
    )


def fit_scaler(train) -> Scaler:
    x = np.asarray(train.values if isinstance(train, DemandSeries) else train, dtype=np.float64)
    if x.size < 2:
        raise DataError("need at least 2 training values to fit a scaler")
    return Scaler(float(x.min()), float(x.max()))


def transform(scaler: Scaler, value):
    return scaler.transform(value)


def invert(scaler: Scaler, value):
    return scaler.invert(value)


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def daily_profile() -> np.ndarray:
    """Standardized 96-point residential demand shape (night trough, two peaks)."""
    h = np.arange(PERIODS_PER_DAY) / 4.0
    awake = _sigmoid((h - 6.0) / 0.9) - _sigmoid((h - 22.0) / 1.0)
    shape = (
        awake
        + 0.35 * np.exp(-0.5 * ((h - 8.0) / 1.5) ** 2)
        + 0.45 * np.exp(-0.5 * ((h - 19.5) / 1.8) ** 2)
        - 0.25 * np.exp(-0.5 * ((h - 14.0) / 2.5) ** 2)
    )
    return (shape - shape.mean()) / shape.std()


def weekly_profile() -> np.ndarray:
    """Standardized 672-point day-of-week modulation of daytime demand."""
    h = np.arange(PERIODS_PER_DAY) / 4.0
    awake = _sigmoid((h - 7.0) / 1.0) - _sigmoid((h - 21.0) / 1.0)
    day_level = np.array([0.2, 0.3, 0.25, 0.3, 0.1, -0.6, -0.55])
    shape = (day_level[:, None] * awake[None, :]).ravel()
    return (shape - shape.mean()) / shape.std()


def generate_synthetic(config: SyntheticConfig) -> DemandSeries:
    """Seeded synthetic demand with daily and weekly seasonality, noise and spikes.

    Spikes are single-period excursions of roughly ``spike_magnitude`` (random
    sign, magnitude drawn from [0.6, 1.0] of it), placed independently with
    probability ``spike_rate``. Values are clipped below at ``min_value``.
    """
    n = config.n_samples
    rng = np.random.default_rng(config.seed)
    t = np.arange(n)
    seasonal = (
        config.daily_amplitude * daily_profile()[t % PERIODS_PER_DAY]
        + config.weekly_amplitude * weekly_profile()[t % PERIODS_PER_WEEK]
    )
    spread = seasonal.std()
    if spread > 0:
        base = config.mean + config.std * (seasonal - seasonal.mean()) / spread
    else:
        base = np.full(n, float(config.mean))
    noise = rng.standard_normal(n) * config.noise_std
    hits = rng.random(n) < config.spike_rate
    signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    sizes = config.spike_magnitude * rng.uniform(0.6, 1.0, n)
    values = base
    if config.noise_std > 0:
        values = values + noise
    if config.spike_rate > 0:
        values = values + np.where(hits, signs * sizes, 0.0)
    values = np.maximum(values, config.min_value)
    return DemandSeries(config.start_time, values)


def spike_indices(config: SyntheticConfig) -> np.ndarray:
    """Positions where :func:`generate_synthetic` injected spikes for ``config``."""
    n = config.n_samples
    rng = np.random.default_rng(config.seed)
    rng.standard_normal(n)
    hits = rng.random(n) < config.spike_rate
    return np.flatnonzero(hits)
