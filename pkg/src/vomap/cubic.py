"""Closed-form real roots of cubic polynomials, vectorized over numpy arrays.

Roots come from Cardano's formula, or from the trigonometric form when the
discriminant says there are three real roots. Each root then gets Newton
steps on the original polynomial to recover digits lost to cancellation.
"""

from __future__ import annotations

import numpy as np


#: Discriminants below this fraction of their scale count as repeated real roots.
DISC_RTOL = 1e-10


#: Largest Newton correction accepted while polishing, relative to ``max(1, |x|)``.
MAX_POLISH_STEP = 1e-4


def polyval3(coef, x):
    """Evaluate ``a x^3 + b x^2 + c x + d`` for ``coef = (a, b, c, d)`` by Horner's rule."""
    a, b, c, d = coef
    return ((a * x + b) * x + c) * x + d


def polish(coef, x, steps: int = 2):
    """Newton-refine roots ``x`` of the cubic ``coef``; NaN entries pass through.

    A step is kept only if it is small relative to ``x`` and does not
    increase ``|f|``. Near a repeated root the derivative vanishes and a full
    Newton step could land on a different root.
    """
    a, b, c, _ = coef
    x = np.array(x, dtype=np.float64, copy=True)
    for _ in range(steps):
        f = polyval3(coef, x)
        df = (3.0 * a * x + 2.0 * b) * x + c
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            dx = np.where(df != 0.0, f / df, 0.0)
            trial = x - np.where(np.isfinite(dx), dx, 0.0)
            better = ((np.abs(polyval3(coef, trial)) <= np.abs(f))
                      & (np.abs(trial - x) <= MAX_POLISH_STEP * np.maximum(1.0, np.abs(x))))
        x = np.where(better, trial, x)
    return x


def real_cubic_roots(a, b, c, d, newton_steps: int = 2) -> np.ndarray:
    """Real roots of ``a x^3 + b x^2 + c x + d = 0`` with ``a != 0``.

    Returns an array of shape ``broadcast(a, b, c, d).shape + (3,)`` sorted in
    ascending order; slots for complex roots are NaN.
    """
    a, b, c, d = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (a, b, c, d)))
    if np.any(a == 0.0):
        raise ValueError("leading coefficient must be nonzero")
    bn, cn, dn = b / a, c / a, d / a
    shift = bn / 3.0
    p = cn - bn * bn / 3.0
    q = 2.0 * bn ** 3 / 27.0 - bn * cn / 3.0 + dn
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3

    with np.errstate(invalid="ignore", divide="ignore"):
        # one real root; this form avoids cancellation between the cube roots
        big = -np.sign(q) * np.cbrt(np.abs(q) / 2.0 + np.sqrt(np.maximum(disc, 0.0)))
        big = np.where(q == 0.0, np.cbrt(np.sqrt(np.maximum(disc, 0.0))), big)
        small = np.where(big != 0.0, -p / (3.0 * big), 0.0)
        single = big + small

        # three real roots
        m = 2.0 * np.sqrt(np.maximum(-p / 3.0, 0.0))
        arg = np.where(p < 0.0, 3.0 * q / (p * m), 0.0)
        theta = np.arccos(np.clip(arg, -1.0, 1.0)) / 3.0
        trig = np.stack([m * np.cos(theta - 2.0 * np.pi * k / 3.0) for k in range(3)], axis=-1)

    # near-zero discriminants are repeated roots, all of them real
    scale = (q / 2.0) ** 2 + np.abs(p / 3.0) ** 3
    three = disc <= DISC_RTOL * scale
    nan = np.full(single.shape, np.nan)
    one = np.stack([single, nan, nan], axis=-1)
    y = np.where(three[..., None], trig, one)
    roots = polish((np.ones_like(p)[..., None], np.zeros_like(p)[..., None],
                    p[..., None], q[..., None]), y, newton_steps) - shift[..., None]
    roots = polish((a[..., None], b[..., None], c[..., None], d[..., None]), roots, newton_steps)
    return np.sort(roots, axis=-1)
