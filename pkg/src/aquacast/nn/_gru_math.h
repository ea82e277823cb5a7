/* Element-wise gate helpers for _gru_ext; kept in C for restrict + simd. */
#ifndef AQUACAST_GRU_MATH_H
#define AQUACAST_GRU_MATH_H

#include <math.h>

enum { ACT_LINEAR = 0, ACT_RELU = 1, ACT_SIGMOID = 2, ACT_TANH = 3 };

/* out[j] = act(a[j] + b[j]) */
static inline void act_sum(double *restrict out, const double *restrict a,
                           const double *restrict b, int n, int code)
{
    int j;
    switch (code) {
    case ACT_SIGMOID:
#pragma omp simd
        for (j = 0; j < n; j++) out[j] = 1.0 / (1.0 + exp(-(a[j] + b[j])));
        break;
    case ACT_TANH:
#pragma omp simd
        for (j = 0; j < n; j++) out[j] = tanh(a[j] + b[j]);
        break;
    case ACT_RELU:
#pragma omp simd
        for (j = 0; j < n; j++) {
            double v = a[j] + b[j];
            out[j] = v > 0.0 ? v : 0.0;
        }
        break;
    default:
#pragma omp simd
        for (j = 0; j < n; j++) out[j] = a[j] + b[j];
    }
}

/* out[j] = g[j] * act'(y[j]), derivative written through the output y */
static inline void dact_mul(double *restrict out, const double *restrict g,
                            const double *restrict y, int n, int code)
{
    int j;
    switch (code) {
    case ACT_SIGMOID:
#pragma omp simd
        for (j = 0; j < n; j++) out[j] = g[j] * y[j] * (1.0 - y[j]);
        break;
    case ACT_TANH:
#pragma omp simd
        for (j = 0; j < n; j++) out[j] = g[j] * (1.0 - y[j] * y[j]);
        break;
    case ACT_RELU:
#pragma omp simd
        for (j = 0; j < n; j++) out[j] = y[j] > 0.0 ? g[j] : 0.0;
        break;
    default:
#pragma omp simd
        for (j = 0; j < n; j++) out[j] = g[j];
    }
}

#endif
