r"""Binomial convolution weights of the discrete fractional sum.

The weights are

.. math::

    \tilde\phi_\alpha(n) = \frac{\Gamma(n + \alpha)}{\Gamma(\alpha)\Gamma(n + 1)}
        = \binom{n + \alpha - 1}{n},

evaluated by the forward recurrence
:math:`\tilde\phi_\alpha(n + 1) = \tilde\phi_\alpha(n) (n + \alpha) / (n + 1)`
starting from :math:`\tilde\phi_\alpha(0) = 1`. The gamma quotient itself
overflows near ``n = 170``; the recurrence does not.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from vomap.errors import CapacityError, DomainError

#: Upper bound, in bytes, for any single weight table or trajectory buffer.
MEMORY_BUDGET_BYTES = 1 << 30


def check_order(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"order must lie in (0, 1], got {alpha!r}")
    return alpha


def check_capacity(n_values: int, what: str = "table") -> None:
    if n_values * 8 > MEMORY_BUDGET_BYTES:
        raise CapacityError(
            f"{what} of {n_values} doubles exceeds the memory budget "
            f"of {MEMORY_BUDGET_BYTES} bytes"
        )


def _weights(alpha: float, n_max: int) -> np.ndarray:
    k = np.arange(n_max, dtype=np.float64)
    out = np.empty(n_max + 1, dtype=np.float64)
    out[0] = 1.0
    # sequential product, so entry n is the n-fold recurrence exactly
    np.cumprod((k + alpha) / (k + 1.0), out=out[1:])
    return out


@dataclass(frozen=True, eq=False)
class WeightTable:
    """Immutable table ``weights[n] = phi_alpha(n)`` for ``n = 0..n_max``."""

    alpha: float
    weights: np.ndarray

    @property
    def n_max(self) -> int:
        return len(self.weights) - 1

    def __len__(self) -> int:
        return len(self.weights)

    def __getitem__(self, n):
        return self.weights[n]


def weight_table(alpha: float, n_max: int) -> WeightTable:
    """Build the weight table of order ``alpha`` up to index ``n_max``.

    Raises :class:`~vomap.errors.CapacityError` when the table would not fit
    in :data:`MEMORY_BUDGET_BYTES`.
    """
    alpha = check_order(alpha)
    n_max = int(n_max)
    if n_max < 0:
        raise DomainError(f"n_max must be nonnegative, got {n_max}")
    check_capacity(n_max + 1, "weight table")
    weights = _weights(alpha, n_max)
    weights.setflags(write=False)
    return WeightTable(alpha=alpha, weights=weights)


def binom_weight(alpha: float, n: int) -> float:
    """Return :math:`\\tilde\\phi_\\alpha(n)` for ``0 < alpha <= 1`` and ``n >= 0``."""
    alpha = check_order(alpha)
    n = int(n)
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    value = 1.0
    for k in range(n):
        value *= (k + alpha) / (k + 1.0)
    return value
