"""Pure numpy implementation of the recurrence, used when the extension is absent."""

from __future__ import annotations

import numpy as np


def run_recurrence(tables, x0, c0, lead, rm1, horizon, threshold):
    tables = np.ascontiguousarray(tables, dtype=np.float64)
    period, length = tables.shape
    depth = length - 1
    x = np.empty(horizon + 1, dtype=np.float64)
    x[0] = x0
    for t in range(horizon):
        m = min(t, depth)
        k = tables[t % period]
        # x[t-1], ..., x[t-m] pairs with k[1], ..., k[m]
        hist = x[t - m: t][::-1]
        v = c0 + lead * x[t] + rm1 * float(np.dot(k[1: m + 1], hist))
        x[t + 1] = v
        if not np.isfinite(v) or abs(v) > threshold:
            return x[: t + 2], t + 1
    return x, horizon
