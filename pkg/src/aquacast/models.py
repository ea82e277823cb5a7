"""Builders for the BGRU, DCGRU, EDCGRU and GRUN architectures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn.layers import GRU, Dense
from .nn.network import Branched, Sequential

DAY = 96
KINDS = ("bgru", "dcgru", "edcgru", "grun")

# Recent, near and distant lags feeding the three GRUN branches, oldest first.
GRUN_LAGS = np.array([
    [-5, -4, -3, -2, -1],
    [-98, -97, -96, -95, -94],
    [-194, -193, -192, -191, -190],
])
GRUN_HISTORY = 194


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    m_classes: int = 0
    rho: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind in ("dcgru", "edcgru") and self.m_classes < 2:
            raise ValueError("class-feature models need m_classes >= 2")
        if self.rho < 0:
            raise ValueError("rho must be >= 0")

    @property
    def window(self) -> int:
        """Input sequence length in (possibly expanded) series positions."""
        if self.kind == "edcgru":
            return DAY * (self.rho + 1)
        if self.kind == "grun":
            return GRUN_HISTORY
        return DAY

    @property
    def input_shape(self) -> tuple:
        if self.kind == "bgru":
            return (DAY, 1)
        if self.kind == "grun":
            return GRUN_LAGS.shape
        return (self.window, self.m_classes + 1)


def _gru_block(seed_rng):
    return [
        GRU(1, 32, "sigmoid", "tanh", return_sequences=True, seed=seed_rng),
        GRU(32, 1, "sigmoid", "linear", seed=seed_rng),
    ]


def build_bgru(seed=0) -> Sequential:
    """GRU(32) over 96 scalar steps into a single linear-output GRU cell."""
    rng = np.random.default_rng(seed)
    return Sequential(_gru_block(rng), ModelSpec("bgru").input_shape)


def _dcgru_layers(m, rng):
    return [
        Dense(m + 1, 50, "relu", seed=rng),
        Dense(50, 10, "relu", seed=rng),
        Dense(10, 1, "linear", seed=rng),
        *_gru_block(rng),
    ]


def build_dcgru(m: int = 4, seed=0) -> Sequential:
    """Time-distributed dense 50-10-1 over (96, m+1) rows, then the GRU block."""
    spec = ModelSpec("dcgru", m_classes=m)
    return Sequential(_dcgru_layers(m, np.random.default_rng(seed)), spec.input_shape)


def build_edcgru(m: int = 4, rho: int = 1, seed=0) -> Sequential:
    """DCGRU layers over an expanded window of 96 * (rho + 1) rows."""
    spec = ModelSpec("edcgru", m_classes=m, rho=rho)
    return Sequential(_dcgru_layers(m, np.random.default_rng(seed)), spec.input_shape)


def build_grun(seed=0) -> Branched:
    """Three GRU branches (48, 32, 32; relu gates, tanh output) and a 64-32-16-8-4-2-1 dense head."""
    rng = np.random.default_rng(seed)
    branches = [GRU(1, units, "relu", "tanh", seed=rng) for units in (48, 32, 32)]
    widths = [sum(b.units for b in branches), 64, 32, 16, 8, 4, 2, 1]
    head = [
        Dense(a, b, "linear" if b == 1 else "relu", seed=rng)
        for a, b in zip(widths[:-1], widths[1:])
    ]
    return Branched(branches, head, GRUN_LAGS.shape)


def build_grun_correction(seed=0, init: str = "identity") -> Sequential:
    """One linear dense layer mapping a predicted day (96 values) to a corrected day.

    ``init="identity"`` starts from the identity map; ``"xavier"`` uses the
    Glorot-uniform draw.
    """
    layer = Dense(DAY, DAY, "linear", seed=np.random.default_rng(seed))
    if init == "identity":
        layer.W[...] = np.eye(DAY)
    elif init != "xavier":
        raise ValueError(f"unknown init {init!r}")
    return Sequential([layer], (DAY,))


def build(spec: ModelSpec, seed=0):
    if spec.kind == "bgru":
        return build_bgru(seed)
    if spec.kind == "dcgru":
        return build_dcgru(spec.m_classes, seed)
    if spec.kind == "edcgru":
        return build_edcgru(spec.m_classes, spec.rho, seed)
    return build_grun(seed)


def expected_param_count(spec: ModelSpec) -> int:
    """Closed-form weight + bias count."""
    def gru(n_in, u):
        return 3 * u * (n_in + u + 1)

    def dense(n_in, n_out):
        return n_out * (n_in + 1)

    gru_block = gru(1, 32) + gru(32, 1)
    if spec.kind == "bgru":
        return gru_block
    if spec.kind in ("dcgru", "edcgru"):
        m = spec.m_classes
        return dense(m + 1, 50) + dense(50, 10) + dense(10, 1) + gru_block
    widths = [112, 64, 32, 16, 8, 4, 2, 1]
    return gru(1, 48) + 2 * gru(1, 32) + sum(dense(a, b) for a, b in zip(widths[:-1], widths[1:]))
