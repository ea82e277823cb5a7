"""Dense and GRU layers with cached forward state for backpropagation."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError
from . import kernels
from ._gru_py import activate, derivative

ACTIVATIONS = tuple(kernels.ACTIVATIONS)


def _as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def xavier_uniform(fan_in: int, fan_out: int, seed=None) -> np.ndarray:
    """Glorot-uniform matrix of shape (fan_out, fan_in), bound sqrt(6 / (fan_in + fan_out))."""
    if fan_in < 1 or fan_out < 1:
        raise ValueError("fan_in and fan_out must be >= 1")
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return _as_rng(seed).uniform(-limit, limit, size=(fan_out, fan_in))


def _check_activation(name):
    if name not in kernels.ACTIVATIONS:
        raise ValueError(f"unknown activation {name!r}; expected one of {ACTIVATIONS}")
    return name


class Layer:
    """Common parameter bookkeeping."""

    param_names: tuple = ()

    @property
    def params(self):
        return [getattr(self, n) for n in self.param_names]

    @property
    def param_count(self) -> int:
        return int(sum(p.size for p in self.params))

    def zero_grads(self):
        self.grads = [np.zeros_like(p) for p in self.params]


class Dense(Layer):
    """Affine map plus activation over the last axis.

    Leading axes are treated as independent rows, so a (batch, T, in) input
    is the time-distributed case: one weight set shared by all T rows.
    """

    kind = "dense"
    param_names = ("W", "b")

    def __init__(self, in_units: int, out_units: int, activation: str = "linear", seed=None):
        self.in_units = int(in_units)
        self.out_units = int(out_units)
        self.activation = _check_activation(activation)
        self._code = kernels.ACTIVATIONS[activation]
        self.W = xavier_uniform(self.in_units, self.out_units, seed)
        self.b = np.zeros(self.out_units)
        self.zero_grads()
        self._cache = None

    def config(self) -> dict:
        return {"type": self.kind, "in_units": self.in_units, "out_units": self.out_units,
                "activation": self.activation}

    def forward(self, x, train: bool = False):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.in_units:
            raise ShapeError(f"dense layer expects last axis {self.in_units}, got {x.shape[-1]}")
        y = activate(x @ self.W.T + self.b, self._code)
        if train:
            self._cache = (x, y)
        return y

    def backward(self, dy):
        x, y = self._cache
        da = dy * derivative(y, self._code)
        x2 = x.reshape(-1, self.in_units)
        da2 = da.reshape(-1, self.out_units)
        self.grads = [da2.T @ x2, da2.sum(axis=0)]
        return da @ self.W


class GRU(Layer):
    """Gated recurrent unit layer.

    Per step: z = g(W_z x + U_z h + b_z), r = g(W_r x + U_r h + b_r),
    h' = (1 - z) * h + z * f(W_h x + U_h (r * h) + b_h), with g the inner
    (gate) activation and f the output activation. ``W`` stacks (W_z, W_r,
    W_h) row-wise, ``U`` and ``b`` likewise; the initial state is zero.
    """

    kind = "gru"
    param_names = ("W", "U", "b")

    def __init__(self, in_dim: int, units: int, inner_activation: str = "sigmoid",
                 output_activation: str = "tanh", return_sequences: bool = False, seed=None):
        rng = _as_rng(seed)
        self.in_dim = int(in_dim)
        self.units = int(units)
        self.inner_activation = _check_activation(inner_activation)
        self.output_activation = _check_activation(output_activation)
        self.return_sequences = bool(return_sequences)
        self._inner = kernels.ACTIVATIONS[inner_activation]
        self._outer = kernels.ACTIVATIONS[output_activation]
        self.W = xavier_uniform(self.in_dim, 3 * self.units, rng)
        self.U = xavier_uniform(self.units, 3 * self.units, rng)
        self.b = np.zeros(3 * self.units)
        self.zero_grads()
        self._cache = None

    def config(self) -> dict:
        return {"type": self.kind, "in_dim": self.in_dim, "units": self.units,
                "inner_activation": self.inner_activation,
                "output_activation": self.output_activation,
                "return_sequences": self.return_sequences}

    def forward(self, x, train: bool = False):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 3 or x.shape[-1] != self.in_dim:
            raise ShapeError(f"GRU expects (batch, T, {self.in_dim}) input, got {x.shape}")
        B, T, _ = x.shape
        xw = np.ascontiguousarray(x @ self.W.T + self.b)
        h0 = np.zeros((B, self.units))
        H, Z, R, C = kernels.gru_forward(xw, self.U, h0, self._inner, self._outer)
        if train:
            self._cache = (x, h0, H, Z, R, C)
        return H if self.return_sequences else H[:, -1, :]

    def backward(self, dy):
        x, h0, H, Z, R, C = self._cache
        B, T, u = H.shape
        if self.return_sequences:
            dH = np.ascontiguousarray(dy, dtype=np.float64)
        else:
            dH = np.zeros((B, T, u))
            dH[:, -1, :] = dy
        dA, _ = kernels.gru_backward(dH, self.U, h0, H, Z, R, C, self._inner, self._outer)
        h_prev = np.concatenate([h0[:, None, :], H[:, :-1, :]], axis=1)
        dA2 = dA.reshape(-1, 3 * u)
        hp2 = h_prev.reshape(-1, u)
        dU = np.empty_like(self.U)
        dU[: 2 * u] = dA2[:, : 2 * u].T @ hp2
        dU[2 * u :] = dA2[:, 2 * u :].T @ (R.reshape(-1, u) * hp2)
        dW = dA2.T @ x.reshape(-1, self.in_dim)
        self.grads = [dW, dU, dA2.sum(axis=0)]
        return dA @ self.W


def gru_cell_forward(x_t, h_prev, layer: GRU) -> np.ndarray:
    """One GRU step for a single (unbatched) input vector, written out gate by gate."""
    x_t = np.asarray(x_t, dtype=np.float64)
    h_prev = np.asarray(h_prev, dtype=np.float64)
    u = layer.units
    if x_t.shape != (layer.in_dim,) or h_prev.shape != (u,):
        raise ShapeError(f"expected x_t of shape ({layer.in_dim},) and h_prev of shape ({u},)")
    W_z, W_r, W_h = layer.W[:u], layer.W[u : 2 * u], layer.W[2 * u :]
    U_z, U_r, U_h = layer.U[:u], layer.U[u : 2 * u], layer.U[2 * u :]
    b_z, b_r, b_h = layer.b[:u], layer.b[u : 2 * u], layer.b[2 * u :]
    z = activate(W_z @ x_t + U_z @ h_prev + b_z, layer._inner)
    r = activate(W_r @ x_t + U_r @ h_prev + b_r, layer._inner)
    candidate = activate(W_h @ x_t + U_h @ (r * h_prev) + b_h, layer._outer)
    return (1.0 - z) * h_prev + z * candidate


def dense_forward(x, layer: Dense) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError("dense_forward takes a single vector")
    return layer.forward(x)


def time_distributed_forward(X, layer: Dense) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError("time_distributed_forward takes a (T, features) matrix")
    return layer.forward(X)


def layer_from_config(cfg: dict) -> Layer:
    cfg = dict(cfg)
    kind = cfg.pop("type")
    if kind == Dense.kind:
        return Dense(cfg["in_units"], cfg["out_units"], cfg["activation"], seed=0)
    if kind == GRU.kind:
        return GRU(cfg["in_dim"], cfg["units"], cfg["inner_activation"],
                   cfg["output_activation"], cfg["return_sequences"], seed=0)
    raise ValueError(f"unknown layer type {kind!r}")
