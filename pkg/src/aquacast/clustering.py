"""One-dimensional k-means for class features, and elbow selection of the class count."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

DEFAULT_MAX_ITER = 300
DEFAULT_RESTARTS = 10
LOW_CONFIDENCE_FRACTION = 0.05
TRANSFER_TOL = 1e-12


@dataclass(frozen=True)
class KMeansModel:
    """Trained class centers, sorted ascending.

    ``history`` is the per-iteration SSE trace of the run that produced the
    centers (first entry is the SSE of the initial assignment).
    """

    centers: tuple
    sse: float
    history: tuple = ()

    @property
    def m(self) -> int:
        return len(self.centers)

    def assign(self, values) -> np.ndarray:
        return assign_many(values, self.centers)

    def one_hot(self, values) -> np.ndarray:
        idx = self.assign(values)
        out = np.zeros(idx.shape + (self.m,))
        np.put_along_axis(out, idx[..., None], 1.0, axis=-1)
        return out


@dataclass(frozen=True)
class Assignment:
    class_index: int
    indicator: tuple


@dataclass(frozen=True)
class DistortionCurve:
    m_values: tuple
    distortions: tuple
    chosen_m: int
    knee_distance: float = 0.0
    chord_length: float = 0.0
    low_confidence: bool = False

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["m", "distortion"])
            for m, d in zip(self.m_values, self.distortions):
                writer.writerow([m, repr(float(d))])


def init_centers(data_mean: float, data_std: float, m: int, seed) -> np.ndarray:
    """Initial centers: standard-normal draws scaled by the data std, shifted by the mean."""
    if m < 2:
        raise ValueError("need m >= 2 classes")
    if not data_std > 0:
        raise ValueError("data_std must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return rng.standard_normal(m) * data_std + data_mean


def assign_many(values, centers) -> np.ndarray:
    """Index of the nearest center for every value; ties go to the lower index."""
    x = np.asarray(values, dtype=np.float64)
    c = np.asarray(centers, dtype=np.float64)
    if c.size == 0:
        raise ValueError("no centers")
    return np.argmin(np.abs(x[..., None] - c), axis=-1)


def assign(value: float, centers) -> Assignment:
    idx = int(assign_many(value, centers))
    indicator = tuple(1 if j == idx else 0 for j in range(len(centers)))
    return Assignment(idx, indicator)


def sse(data, model) -> float:
    """Within-cluster sum of squared distances to the assigned centers."""
    centers = np.asarray(model.centers if isinstance(model, KMeansModel) else model, dtype=np.float64)
    x = np.asarray(data, dtype=np.float64)
    idx = assign_many(x, centers)
    return float(np.sum((x - centers[idx]) ** 2))


def _best_transfer(x, idx, c, counts):
    """Single-point move that lowers SSE the most, as (gain, point, target); gain 0 if none."""
    d2 = (x[:, None] - c[None, :]) ** 2
    own = idx
    n_own = counts[own].astype(np.float64)
    # SSE drop from removing a point from its cluster, and rise from adding it elsewhere
    removal = np.where(n_own > 1, n_own / np.maximum(n_own - 1, 1) * d2[np.arange(x.size), own], -np.inf)
    addition = counts[None, :] / (counts[None, :] + 1.0) * d2
    addition[np.arange(x.size), own] = np.inf
    gain = removal[:, None] - addition
    i, j = np.unravel_index(np.argmax(gain), gain.shape)
    return float(gain[i, j]), int(i), int(j)


def lloyd_run(data, centers, max_iter: int = DEFAULT_MAX_ITER, rng=None, refine: bool = True):
    """One Lloyd run from the given initial centers.

    Empty clusters are moved onto a uniformly drawn data point. Once the
    assignments are stable, ``refine`` tries single-point moves between
    clusters (Hartigan's criterion); the best improving move is applied and
    Lloyd resumes, until no move lowers the SSE. Returns the final (unsorted)
    centers and the SSE after every assignment step or move.
    """
    x = np.asarray(data, dtype=np.float64)
    c = np.array(centers, dtype=np.float64)
    rng = rng if rng is not None else np.random.default_rng(0)
    idx = assign_many(x, c)
    history = [float(np.sum((x - c[idx]) ** 2))]
    iters = 0
    while iters < max_iter:
        iters += 1
        counts = np.bincount(idx, minlength=c.size)
        sums = np.bincount(idx, weights=x, minlength=c.size)
        filled = counts > 0
        c[filled] = sums[filled] / counts[filled]
        for j in np.flatnonzero(~filled):
            c[j] = x[rng.integers(x.size)]
        new_idx = assign_many(x, c)
        history.append(float(np.sum((x - c[new_idx]) ** 2)))
        if not (np.array_equal(new_idx, idx) and filled.all()):
            idx = new_idx
            continue
        if not refine:
            break
        gain, i, j = _best_transfer(x, idx, c, counts)
        if gain <= TRANSFER_TOL * max(history[-1], 1.0):
            break
        idx = idx.copy()
        idx[i] = j
        c = np.array([x[idx == k].mean() for k in range(c.size)])
        history.append(float(np.sum((x - c[idx]) ** 2)))
    return c, history


def lloyd(data, m: int, seed: int = 0, max_iter: int = DEFAULT_MAX_ITER,
          restarts: int = DEFAULT_RESTARTS, trace: list | None = None) -> KMeansModel:
    """Best-of-``restarts`` k-means; restart ``r`` draws its initial centers with seed ``seed + r``.

    When ``trace`` is a list, the SSE history of every restart is appended to it.
    """
    x = np.asarray(data, dtype=np.float64).ravel()
    if m < 2:
        raise ValueError("need m >= 2 classes")
    if x.size < m:
        raise DataError(f"insufficient data: {x.size} values for {m} classes")
    mean = float(x.mean())
    std = float(x.std())
    best = None
    for r in range(max(1, restarts)):
        rng = np.random.default_rng(seed + r)
        if std > 0:
            init = init_centers(mean, std, m, rng)
        else:
            init = np.full(m, mean)
        centers, history = lloyd_run(x, init, max_iter, rng)
        if trace is not None:
            trace.append(history)
        value = sse(x, centers)
        if best is None or value < best[0]:
            best = (value, centers, history)
    value, centers, history = best
    return KMeansModel(tuple(float(c) for c in np.sort(centers)), float(value), tuple(history))


def total_sum_of_squares(data) -> float:
    x = np.asarray(data, dtype=np.float64)
    return float(np.sum((x - x.mean()) ** 2))


def knee(m_values, distortions, anchor=None, log_scale: bool = True):
    """Knee of a distortion curve by maximum distance to the chord.

    Distortions are compared on a log scale by default (relative drops), and
    both axes are rescaled to [0, 1] over the chord's span. ``anchor`` is an
    optional ``(m, distortion)`` point placed before the curve as the chord's
    first end, which lets the first curve point itself be chosen.
    Returns ``(chosen_m, max_distance, chord_length)``.
    """
    ms = np.asarray(m_values, dtype=np.float64)
    ds = np.asarray(distortions, dtype=np.float64)
    if anchor is not None:
        ms_all = np.concatenate([[anchor[0]], ms])
        ds_all = np.concatenate([[anchor[1]], ds])
    else:
        ms_all, ds_all = ms, ds
    if log_scale:
        # zero distortion (exact fit) is floored to keep the logarithm finite
        floor = max(float(ds_all.max()) * 1e-12, np.finfo(float).tiny)
        ds_all = np.log(np.maximum(ds_all, floor))
    x_span = ms_all[-1] - ms_all[0]
    d_span = ds_all.max() - ds_all.min()
    if d_span <= 0:
        return int(ms[0]), 0.0, 1.0
    x = (ms_all - ms_all[0]) / x_span
    y = (ds_all - ds_all.min()) / d_span
    p0 = np.array([x[0], y[0]])
    p1 = np.array([x[-1], y[-1]])
    chord = p1 - p0
    length = float(np.hypot(*chord))
    # perpendicular distance of each curve point from the chord
    dist = np.abs(chord[0] * (y - p0[1]) - chord[1] * (x - p0[0])) / length
    offset = 1 if anchor is not None else 0
    k = int(np.argmax(dist[offset:])) + offset
    return int(ms_all[k]), float(dist[k]), length


def elbow(data, m_min: int = 2, m_max: int = 10, seed: int = 0,
          max_iter: int = DEFAULT_MAX_ITER, restarts: int = DEFAULT_RESTARTS) -> DistortionCurve:
    """Distortion curve over ``m_min..m_max`` and the knee-chosen class count.

    The chord is anchored at ``m_min - 1`` classes (for ``m_min = 2`` that is
    the total sum of squares), so a knee at ``m_min`` is detectable. The
    choice is flagged low-confidence when the knee lies within 5% of the
    chord length from the chord.
    """
    x = np.asarray(data, dtype=np.float64).ravel()
    if not 2 <= m_min < m_max:
        raise ValueError("need 2 <= m_min < m_max")
    if x.size < m_max:
        raise DataError(f"insufficient data: {x.size} values for up to {m_max} classes")
    ms = list(range(m_min, m_max + 1))
    dist = [lloyd(x, m, seed, max_iter, restarts).sse for m in ms]
    if m_min - 1 == 1:
        anchor = (1, total_sum_of_squares(x))
    else:
        anchor = (m_min - 1, lloyd(x, m_min - 1, seed, max_iter, restarts).sse)
    chosen, distance, length = knee(ms, dist, anchor)
    return DistortionCurve(
        m_values=tuple(ms),
        distortions=tuple(float(d) for d in dist),
        chosen_m=chosen,
        knee_distance=distance,
        chord_length=length,
        low_confidence=distance < LOW_CONFIDENCE_FRACTION * length,
    )
