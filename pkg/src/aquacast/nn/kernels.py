"""Backend selection for the GRU recurrence kernels.

The compiled extension is used when importable; setting the environment
variable ``AQUACAST_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os

from . import _gru_py

LINEAR, RELU, SIGMOID, TANH = _gru_py.LINEAR, _gru_py.RELU, _gru_py.SIGMOID, _gru_py.TANH
ACTIVATIONS = {"linear": LINEAR, "relu": RELU, "sigmoid": SIGMOID, "tanh": TANH}


def _load_compiled():
    try:
        from . import _gru_ext
    except ImportError:
        return None
    return _gru_ext


_compiled = None if os.environ.get("AQUACAST_PURE_PYTHON") else _load_compiled()

BACKEND = "compiled" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _gru_py


def available_backends():
    names = ["python"]
    if _load_compiled() is not None:
        names.append("compiled")
    return names


def get_backend(name):
    """Kernel module for ``name`` ('python' or 'compiled')."""
    if name == "python":
        return _gru_py
    if name == "compiled":
        mod = _load_compiled()
        if mod is None:
            raise ImportError("compiled GRU extension is not built")
        return mod
    raise ValueError(f"unknown backend {name!r}")


def gru_forward(xw, U, h0, inner, outer):
    return _impl.gru_forward(xw, U, h0, inner, outer)


def gru_backward(dH, U, h0, H, Z, R, C, inner, outer):
    return _impl.gru_backward(dH, U, h0, H, Z, R, C, inner, outer)
