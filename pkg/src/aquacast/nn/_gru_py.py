"""Pure-numpy GRU recurrence kernels (fallback for the compiled extension).

Both kernels work on precomputed input projections ``xw = x @ W.T + b`` of
shape (batch, T, 3u), gate order (z, r, h). Activation codes: 0 linear,
1 relu, 2 sigmoid, 3 tanh.
"""

import numpy as np

LINEAR, RELU, SIGMOID, TANH = 0, 1, 2, 3


def activate(a, code):
    if code == SIGMOID:
        with np.errstate(over="ignore"):
            return 1.0 / (1.0 + np.exp(-a))
    if code == TANH:
        return np.tanh(a)
    if code == RELU:
        return np.maximum(a, 0.0)
    return a


def derivative(y, code):
    """Activation derivative expressed through the activation output ``y``."""
    if code == SIGMOID:
        return y * (1.0 - y)
    if code == TANH:
        return 1.0 - y * y
    if code == RELU:
        return (y > 0.0).astype(y.dtype)
    return np.ones_like(y)


def gru_forward(xw, U, h0, inner, outer):
    B, T, G = xw.shape
    u = G // 3
    U_zr = U[: 2 * u]
    U_h = U[2 * u :]
    H = np.empty((B, T, u))
    Z = np.empty((B, T, u))
    R = np.empty((B, T, u))
    C = np.empty((B, T, u))
    h = h0
    for t in range(T):
        zr = activate(xw[:, t, : 2 * u] + h @ U_zr.T, inner)
        z = zr[:, :u]
        r = zr[:, u:]
        c = activate(xw[:, t, 2 * u :] + (r * h) @ U_h.T, outer)
        h = (1.0 - z) * h + z * c
        H[:, t] = h
        Z[:, t] = z
        R[:, t] = r
        C[:, t] = c
    return H, Z, R, C


def gru_backward(dH, U, h0, H, Z, R, C, inner, outer):
    """Backpropagation through time.

    ``dH`` holds the loss gradient w.r.t. every hidden output h_t. Returns the
    gradient w.r.t. the gate pre-activations (batch, T, 3u) and w.r.t. h0.
    """
    B, T, u = H.shape
    U_zr = U[: 2 * u]
    U_h = U[2 * u :]
    dA = np.empty((B, T, 3 * u))
    dh = np.zeros((B, u))
    for t in range(T - 1, -1, -1):
        hp = H[:, t - 1] if t > 0 else h0
        z = Z[:, t]
        r = R[:, t]
        c = C[:, t]
        dh = dh + dH[:, t]
        dz = dh * (c - hp)
        dah = dh * z * derivative(c, outer)
        dhp = dh * (1.0 - z)
        ds = dah @ U_h
        dar = ds * hp * derivative(r, inner)
        dhp = dhp + ds * r
        daz = dz * derivative(z, inner)
        dA[:, t, :u] = daz
        dA[:, t, u : 2 * u] = dar
        dA[:, t, 2 * u :] = dah
        dh = dhp + dA[:, t, : 2 * u] @ U_zr
    return dA, dh
