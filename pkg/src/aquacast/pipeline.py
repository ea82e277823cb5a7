"""End-to-end fitting of a forecaster on a split series, and its checkpoint format."""

from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass

import numpy as np

from . import clustering, models
from .data import DatasetSplit, DemandSeries, Scaler, fit_scaler
from .errors import DataError
from .expansion import expand
from .forecast import Forecaster, day_starts, rollout
from .models import DAY, GRUN_HISTORY, GRUN_LAGS, ModelSpec
from .nn import checkpoint
from .nn.network import network_from_config
from .nn.train import ArrayDataset, TrainConfig, TrainHistory, WindowSet, train

log = logging.getLogger(__name__)

DEFAULT_M = 4
DEFAULT_RHO = 1
DEFAULT_MAX_EPOCHS = 40

DEFAULT_TRAIN = {
    "bgru": TrainConfig(learning_rate=0.001, batch_size=100, early_stop_patience=2,
                        max_epochs=DEFAULT_MAX_EPOCHS),
    "dcgru": TrainConfig(learning_rate=0.002, batch_size=100, early_stop_patience=2,
                         max_epochs=DEFAULT_MAX_EPOCHS),
    "edcgru": TrainConfig(learning_rate=0.002, lr_halving_epochs=5, batch_size=100,
                          early_stop_patience=4, max_epochs=DEFAULT_MAX_EPOCHS),
    "grun": TrainConfig(learning_rate=0.002, batch_size=60, early_stop_patience=2,
                        max_epochs=DEFAULT_MAX_EPOCHS),
}

CHECKPOINT_FORMAT = "aquacast-forecaster"


@dataclass
class FitResult:
    forecaster: Forecaster
    history: TrainHistory
    correction_history: TrainHistory | None
    train_seconds: float
    train_config: TrainConfig


def default_train_config(kind: str, **overrides) -> TrainConfig:
    return dataclasses.replace(DEFAULT_TRAIN[kind], **overrides)


def _bounds(split: DatasetSplit):
    a = split.train_start
    b = split.validation_start
    c = b + len(split.validation)
    return a, b, c


def window_sets(forecaster: Forecaster, values, split: DatasetSplit):
    """Training and validation sets of (window, next value) pairs in scaled units.

    Training targets lie in the training block; validation targets in the
    validation block, with their windows free to reach back into training
    data. For an expanded model every expanded position is a target.
    """
    values = np.asarray(values, dtype=np.float64)
    a, b, c = _bounds(split)
    scaler = forecaster.scaler
    if forecaster.kind == "grun":
        feats = scaler.transform(values[:c])
        offsets = GRUN_LAGS
        tr = np.arange(a + GRUN_HISTORY, b)
        va = np.arange(b, c)
        drop = True
    elif forecaster.rho:
        step = forecaster.rho + 1
        ex = expand(values[a:c], forecaster.rho).values
        last_train = step * (b - 1 - a)
        feats = forecaster.features(ex)
        scaled = scaler.transform(ex)
        offsets = np.arange(-forecaster.window, 0)
        tr = np.arange(forecaster.window, last_train + 1)
        va = np.arange(last_train + 1, ex.size)
        return WindowSet(feats, scaled, tr, offsets), WindowSet(feats, scaled, va, offsets)
    else:
        feats = forecaster.features(values[:c])
        offsets = np.arange(-forecaster.window, 0)
        tr = np.arange(a + forecaster.window, b)
        va = np.arange(b, c)
        drop = False
    scaled = scaler.transform(values[:c])
    return (WindowSet(feats, scaled, tr, offsets, drop_feature_axis=drop),
            WindowSet(feats, scaled, va, offsets, drop_feature_axis=drop))


def correction_sets(forecaster: Forecaster, values, split: DatasetSplit):
    """(predicted day, actual day) pairs in scaled units from the base model's day-ahead rollouts."""
    values = np.asarray(values, dtype=np.float64)
    a, b, c = _bounds(split)
    out = []
    for lo, hi in ((a, b), (b, c)):
        starts = day_starts(hi, lo, history=a + forecaster.history)
        if starts.size == 0:
            raise DataError("too little data to build day-ahead correction pairs")
        hist = values[starts[:, None] + np.arange(-forecaster.history, 0)]
        pred = rollout(forecaster, hist, DAY)
        actual = values[starts[:, None] + np.arange(DAY)]
        out.append(ArrayDataset(forecaster.scaler.transform(pred), forecaster.scaler.transform(actual)))
    return tuple(out)


def fit_classes(train_values, m: int | None, seed: int, m_range=(2, 10)):
    """k-means model with ``m`` classes, or the elbow choice when ``m`` is None."""
    curve = None
    if m is None:
        curve = clustering.elbow(train_values, m_range[0], m_range[1], seed=seed)
        m = curve.chosen_m
    return clustering.lloyd(train_values, m, seed=seed), curve


def fit_forecaster(kind: str, series: DemandSeries | np.ndarray, split: DatasetSplit, *,
                   m: int | None = DEFAULT_M, rho: int = DEFAULT_RHO, seed: int = 0,
                   config: TrainConfig | None = None,
                   correction_config: TrainConfig | None = None) -> FitResult:
    """Fit scaler, class centers and network on the training block of ``split``."""
    values = np.asarray(getattr(series, "values", series), dtype=np.float64)
    a, b, _ = _bounds(split)
    if kind == "edcgru" and rho < 1:
        raise ValueError("EDCGRU needs rho >= 1")
    train_values = values[a:b]
    scaler = fit_scaler(train_values)
    kmeans = None
    if kind in ("dcgru", "edcgru"):
        kmeans, _ = fit_classes(train_values, m, seed)
        spec = ModelSpec(kind, m_classes=kmeans.m, rho=rho if kind == "edcgru" else 0)
    else:
        spec = ModelSpec(kind)
    if config is None:
        config = default_train_config(kind, shuffle_seed=seed)
    forecaster = Forecaster(spec, models.build(spec, seed), scaler, kmeans)
    t0 = time.perf_counter()
    tr, va = window_sets(forecaster, values, split)
    log.info("%s: %d training and %d validation windows", kind, len(tr), len(va))
    _, history = train(forecaster.network, tr, va, config)
    corr_history = None
    if kind == "grun":
        corr_cfg = correction_config or config
        correction = models.build_grun_correction(seed)
        ctr, cva = correction_sets(forecaster, values, split)
        _, corr_history = train(correction, ctr, cva, corr_cfg)
        forecaster.correction = correction
    seconds = time.perf_counter() - t0
    return FitResult(forecaster, history, corr_history, seconds, config)


def _arrays(prefix, network):
    return {f"{prefix}.{i}": p for i, p in enumerate(network.params)}


def _load_params(network, arrays, prefix):
    for i, p in enumerate(network.params):
        p[...] = arrays[f"{prefix}.{i}"]


def forecaster_header(forecaster: Forecaster, config: TrainConfig | None = None) -> dict:
    header = {
        "format": CHECKPOINT_FORMAT,
        "kind": forecaster.kind,
        "m_classes": forecaster.spec.m_classes,
        "rho": forecaster.spec.rho,
        "scaler": [forecaster.scaler.lo, forecaster.scaler.hi],
        "centers": None if forecaster.kmeans is None else list(forecaster.kmeans.centers),
        "network": forecaster.network.config(),
        "correction": None if forecaster.correction is None else forecaster.correction.config(),
        "param_count": forecaster.param_count,
    }
    if config is not None:
        header["train"] = dataclasses.asdict(config)
    return header


def save_forecaster(path, forecaster: Forecaster, config: TrainConfig | None = None) -> None:
    arrays = _arrays("net", forecaster.network)
    if forecaster.correction is not None:
        arrays.update(_arrays("corr", forecaster.correction))
    checkpoint.save(path, forecaster_header(forecaster, config), arrays)


def load_forecaster(path) -> tuple:
    """Returns ``(forecaster, header)``."""
    header, arrays = checkpoint.load(path)
    if header.get("format") != CHECKPOINT_FORMAT:
        raise DataError("checkpoint does not hold a forecaster")
    spec = ModelSpec(header["kind"], header["m_classes"], header["rho"])
    network = network_from_config(header["network"])
    _load_params(network, arrays, "net")
    correction = None
    if header["correction"] is not None:
        correction = network_from_config(header["correction"])
        _load_params(correction, arrays, "corr")
    kmeans = None
    if header["centers"] is not None:
        kmeans = clustering.KMeansModel(tuple(header["centers"]), float("nan"))
    scaler = Scaler(*header["scaler"])
    return Forecaster(spec, network, scaler, kmeans, correction), header
