"""Layer containers: a sequential stack and the three-branch GRUN topology."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError
from .layers import layer_from_config


class Network:
    """Base container; subclasses define ``layers``, ``forward`` and ``backward``."""

    layers: list
    input_shape: tuple

    @property
    def params(self) -> list:
        return [p for layer in self.layers for p in layer.params]

    @property
    def grads(self) -> list:
        return [g for layer in self.layers for g in layer.grads]

    @property
    def param_count(self) -> int:
        return int(sum(layer.param_count for layer in self.layers))

    def _check_input(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[1:] != tuple(self.input_shape):
            raise ShapeError(f"expected input of shape (batch, {', '.join(map(str, self.input_shape))}), "
                             f"got {x.shape}")
        return x

    def get_flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat(self, vector) -> None:
        vector = np.asarray(vector, dtype=np.float64)
        if vector.size != self.param_count:
            raise ShapeError(f"expected {self.param_count} parameters, got {vector.size}")
        offset = 0
        for p in self.params:
            p[...] = vector[offset : offset + p.size].reshape(p.shape)
            offset += p.size

    def predict(self, x, batch_size: int = 2048) -> np.ndarray:
        """Forward pass in chunks, without caching."""
        x = self._check_input(x)
        if x.shape[0] <= batch_size:
            return self.forward(x)
        return np.concatenate([self.forward(x[i : i + batch_size])
                               for i in range(0, x.shape[0], batch_size)])


class Sequential(Network):
    def __init__(self, layers, input_shape):
        self.layers = list(layers)
        self.input_shape = tuple(int(d) for d in input_shape)

    def forward(self, x, train: bool = False):
        x = self._check_input(x)
        for layer in self.layers:
            x = layer.forward(x, train)
        return x

    def backward(self, dy):
        for layer in reversed(self.layers):
            dy = layer.backward(dy)
        return dy

    def config(self) -> dict:
        return {"topology": "sequential", "input_shape": list(self.input_shape),
                "layers": [layer.config() for layer in self.layers]}


class Branched(Network):
    """Parallel recurrent branches whose final states are concatenated into a head.

    Input shape is (n_branches, steps); branch ``i`` reads ``x[:, i, :]`` as a
    sequence of scalars.
    """

    def __init__(self, branches, head, input_shape):
        self.branches = list(branches)
        self.head = list(head)
        self.input_shape = tuple(int(d) for d in input_shape)
        if len(self.branches) != self.input_shape[0]:
            raise ShapeError("one branch per input row is required")

    @property
    def layers(self):
        return self.branches + self.head

    def forward(self, x, train: bool = False):
        x = self._check_input(x)
        parts = [branch.forward(x[:, i, :, None], train) for i, branch in enumerate(self.branches)]
        y = np.concatenate(parts, axis=1)
        for layer in self.head:
            y = layer.forward(y, train)
        return y

    def backward(self, dy):
        for layer in reversed(self.head):
            dy = layer.backward(dy)
        grads_in = []
        offset = 0
        for branch in self.branches:
            width = branch.units
            grads_in.append(branch.backward(dy[:, offset : offset + width])[:, :, 0])
            offset += width
        return np.stack(grads_in, axis=1)

    def config(self) -> dict:
        return {"topology": "branched", "input_shape": list(self.input_shape),
                "branches": [b.config() for b in self.branches],
                "layers": [layer.config() for layer in self.head]}


def network_from_config(cfg: dict) -> Network:
    if cfg["topology"] == "sequential":
        return Sequential([layer_from_config(c) for c in cfg["layers"]], cfg["input_shape"])
    if cfg["topology"] == "branched":
        return Branched([layer_from_config(c) for c in cfg["branches"]],
                        [layer_from_config(c) for c in cfg["layers"]], cfg["input_shape"])
    raise ValueError(f"unknown topology {cfg['topology']!r}")


def param_count(model) -> int:
    """Number of trainable weights and biases of a layer or network."""
    return int(model.param_count)
