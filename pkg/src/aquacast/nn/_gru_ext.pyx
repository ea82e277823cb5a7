# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled GRU recurrence kernels.

Same contract as ``_gru_py``: inputs are the precomputed projections
``xw = x @ W.T + b`` of shape (batch, T, 3u), gate order (z, r, h).
Per-step matrix products go through BLAS dgemm on strided views; the
element-wise gate algebra runs in branch-free row loops (vectorizable)
without the GIL.
"""

import numpy as np

from scipy.linalg.cython_blas cimport dgemm

cdef extern from "_gru_math.h" nogil:
    void _act_sum "act_sum"(double *out, const double *a, const double *b, int n, int code)
    void _dact_mul "dact_mul"(double *out, const double *g, const double *y, int n, int code)


def gru_forward(double[:, :, ::1] xw, double[:, ::1] U, double[:, ::1] h0, int inner, int outer):
    cdef int B = xw.shape[0]
    cdef int T = xw.shape[1]
    cdef int u = xw.shape[2] // 3
    cdef int u2 = 2 * u
    cdef int ldh
    cdef int ldH = T * u
    cdef int t, b, j
    cdef double one = 1.0, zero = 0.0
    cdef char tr = b'T'
    cdef char nt = b'N'
    cdef double *hp
    cdef double *hrow
    cdef double *zrow
    cdef double *rrow
    cdef double *crow
    cdef double *srow
    cdef double *zr

    H_arr = np.empty((B, T, u))
    Z_arr = np.empty((B, T, u))
    R_arr = np.empty((B, T, u))
    C_arr = np.empty((B, T, u))
    cdef double[:, :, ::1] H = H_arr
    cdef double[:, :, ::1] Z = Z_arr
    cdef double[:, :, ::1] R = R_arr
    cdef double[:, :, ::1] C = C_arr
    cdef double[:, ::1] pre = np.empty((B, u2))
    cdef double[:, ::1] act_zr = np.empty((B, u2))
    cdef double[:, ::1] pre_h = np.empty((B, u))
    cdef double[:, ::1] s = np.empty((B, u))
    if B == 0 or T == 0:
        return H_arr, Z_arr, R_arr, C_arr

    with nogil:
        for t in range(T):
            if t == 0:
                hp = &h0[0, 0]
                ldh = u
            else:
                hp = &H[0, t - 1, 0]
                ldh = ldH
            # pre = h_prev @ U_zr.T
            dgemm(&tr, &nt, &u2, &B, &u, &one, &U[0, 0], &u, hp, &ldh, &zero, &pre[0, 0], &u2)
            for b in range(B):
                zr = &act_zr[b, 0]
                _act_sum(zr, &xw[b, t, 0], &pre[b, 0], u2, inner)
                hrow = hp + b * ldh
                zrow = &Z[b, t, 0]
                rrow = &R[b, t, 0]
                srow = &s[b, 0]
                for j in range(u):
                    zrow[j] = zr[j]
                    rrow[j] = zr[u + j]
                    srow[j] = zr[u + j] * hrow[j]
            # pre_h = (r * h_prev) @ U_h.T
            dgemm(&tr, &nt, &u, &B, &u, &one, &U[u2, 0], &u, &s[0, 0], &u, &zero, &pre_h[0, 0], &u)
            for b in range(B):
                crow = &C[b, t, 0]
                _act_sum(crow, &xw[b, t, u2], &pre_h[b, 0], u, outer)
                hrow = hp + b * ldh
                zrow = &Z[b, t, 0]
                srow = &H[b, t, 0]
                for j in range(u):
                    srow[j] = (1.0 - zrow[j]) * hrow[j] + zrow[j] * crow[j]
    return H_arr, Z_arr, R_arr, C_arr


def gru_backward(double[:, :, ::1] dH, double[:, ::1] U, double[:, ::1] h0,
                 double[:, :, ::1] H, double[:, :, ::1] Z, double[:, :, ::1] R,
                 double[:, :, ::1] C, int inner, int outer):
    cdef int B = H.shape[0]
    cdef int T = H.shape[1]
    cdef int u = H.shape[2]
    cdef int u2 = 2 * u
    cdef int u3 = 3 * u
    cdef int ldA = T * u3
    cdef int ldh
    cdef int ldH = T * u
    cdef int t, b, j
    cdef double one = 1.0, zero = 0.0
    cdef char nt = b'N'
    cdef double *hp
    cdef double *hrow
    cdef double *zrow
    cdef double *rrow
    cdef double *crow
    cdef double *arow
    cdef double *dhrow
    cdef double *dhprow
    cdef double *dsrow
    cdef double *grow
    cdef double *tmp

    dA_arr = np.empty((B, T, u3))
    dh_arr = np.zeros((B, u))
    cdef double[:, :, ::1] dA = dA_arr
    cdef double[:, ::1] dh = dh_arr
    cdef double[:, ::1] dhp = np.empty((B, u))
    cdef double[:, ::1] ds = np.empty((B, u))
    cdef double[:, ::1] g1 = np.empty((B, u))
    cdef double[:, ::1] g2 = np.empty((B, u))
    if B == 0 or T == 0:
        return dA_arr, dh_arr

    with nogil:
        for t in range(T - 1, -1, -1):
            if t == 0:
                hp = &h0[0, 0]
                ldh = u
            else:
                hp = &H[0, t - 1, 0]
                ldh = ldH
            for b in range(B):
                hrow = hp + b * ldh
                zrow = &Z[b, t, 0]
                crow = &C[b, t, 0]
                arow = &dA[b, t, 0]
                dhrow = &dh[b, 0]
                dhprow = &dhp[b, 0]
                grow = &dH[b, t, 0]
                tmp = &g1[b, 0]
                for j in range(u):
                    dhrow[j] = dhrow[j] + grow[j]
                    tmp[j] = dhrow[j] * (crow[j] - hrow[j])
                    dhprow[j] = dhrow[j] * (1.0 - zrow[j])
                _dact_mul(arow, tmp, zrow, u, inner)
                for j in range(u):
                    tmp[j] = dhrow[j] * zrow[j]
                _dact_mul(arow + u2, tmp, crow, u, outer)
            # ds = dA_h @ U_h
            dgemm(&nt, &nt, &u, &B, &u, &one, &U[u2, 0], &u, &dA[0, t, u2], &ldA, &zero, &ds[0, 0], &u)
            for b in range(B):
                hrow = hp + b * ldh
                rrow = &R[b, t, 0]
                dsrow = &ds[b, 0]
                dhprow = &dhp[b, 0]
                tmp = &g2[b, 0]
                for j in range(u):
                    tmp[j] = dsrow[j] * hrow[j]
                    dhprow[j] = dhprow[j] + dsrow[j] * rrow[j]
                _dact_mul(&dA[b, t, u], tmp, rrow, u, inner)
            # dh_prev += dA_zr @ U_zr
            dgemm(&nt, &nt, &u, &B, &u2, &one, &U[0, 0], &u, &dA[0, t, 0], &ldA, &one, &dhp[0, 0], &u)
            for b in range(B):
                dhrow = &dh[b, 0]
                dhprow = &dhp[b, 0]
                for j in range(u):
                    dhrow[j] = dhprow[j]
    return dA_arr, dh_arr
