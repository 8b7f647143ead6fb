# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loop of the variable-order recurrence."""

import numpy as np

from libc.math cimport fabs, isfinite


def run_recurrence(const double[:, ::1] tables, double x0, double c0, double lead,
                   double rm1, Py_ssize_t horizon, double threshold):
    """``x[t+1] = c0 + lead x[t] + rm1 sum_{n=1}^{min(t,L)} K[t % T, n] x[t-n]``."""
    cdef Py_ssize_t period = tables.shape[0]
    cdef Py_ssize_t depth = tables.shape[1] - 1
    cdef double[::1] x
    cdef Py_ssize_t t, n, m
    cdef double s0, s1, s2, s3, v
    cdef const double[::1] k

    out = np.empty(horizon + 1, dtype=np.float64)
    x = out
    x[0] = x0
    for t in range(horizon):
        k = tables[t % period]
        m = t if t < depth else depth
        s0 = 0.0
        s1 = 0.0
        s2 = 0.0
        s3 = 0.0
        n = 1
        while n + 3 <= m:
            s0 += k[n] * x[t - n]
            s1 += k[n + 1] * x[t - n - 1]
            s2 += k[n + 2] * x[t - n - 2]
            s3 += k[n + 3] * x[t - n - 3]
            n += 4
        while n <= m:
            s0 += k[n] * x[t - n]
            n += 1
        v = c0 + lead * x[t] + rm1 * ((s0 + s1) + (s2 + s3))
        x[t + 1] = v
        if not isfinite(v) or fabs(v) > threshold:
            return out[: t + 2], t + 1
    return out, horizon
