"""Virtual-value expansion of demand series around extreme points."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class ExpandedSeries:
    values: np.ndarray
    rho: int
    origin_mask: np.ndarray

    @property
    def source_length(self) -> int:
        return int(self.origin_mask.sum())


def expand(series, rho: int = 1) -> ExpandedSeries:
    """Insert ``rho`` linearly interpolated values between consecutive readings.

    The k-th value inserted between ``x[i]`` and ``x[i+1]`` is
    ``x[i] + k * (x[i+1] - x[i]) / (rho + 1)``. Actual readings are copied
    unchanged, so they sit at every ``(rho + 1)``-th position.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise DataError("expansion needs at least 2 values")
    if rho < 0:
        raise ValueError("rho must be >= 0")
    step = rho + 1
    n = x.size
    out = np.empty(n + (n - 1) * rho)
    out[::step] = x
    if rho:
        diff = (x[1:] - x[:-1]) / step
        lo = np.minimum(x[:-1], x[1:])
        hi = np.maximum(x[:-1], x[1:])
        for k in range(1, step):
            # clip guards against rounding past the segment ends
            out[k::step] = np.clip(x[:-1] + k * diff, lo, hi)
    mask = np.zeros(out.size, dtype=bool)
    mask[::step] = True
    return ExpandedSeries(out, rho, mask)


def collapse(expanded: ExpandedSeries) -> np.ndarray:
    """Values at the actual (non-virtual) positions."""
    return np.asarray(expanded.values)[np.asarray(expanded.origin_mask, dtype=bool)]


def local_linearity(series) -> float:
    """Mean absolute second difference over interior points; 0 for an affine series."""
    x = np.asarray(series, dtype=np.float64)
    if x.size < 3:
        raise DataError("need at least 3 values")
    return float(np.mean(np.abs(x[2:] - 2.0 * x[1:-1] + x[:-2])))


def expand_rows(windows, rho: int = 1) -> np.ndarray:
    """Row-wise :func:`expand` of a (n_windows, length) matrix; same arithmetic per row."""
    X = np.asarray(windows, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] < 2:
        raise DataError("expected a (n_windows, length >= 2) matrix")
    if rho < 0:
        raise ValueError("rho must be >= 0")
    step = rho + 1
    n = X.shape[1]
    out = np.empty((X.shape[0], n + (n - 1) * rho))
    out[:, ::step] = X
    if rho:
        a, b = X[:, :-1], X[:, 1:]
        diff = (b - a) / step
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        for k in range(1, step):
            out[:, k::step] = np.clip(a + k * diff, lo, hi)
    return out
