"""Empirical stability thresholds by bisection on the growth parameter.

Each probe simulates the map and classifies the run. A run that neither
diverges nor settles is re-simulated with twice the horizon, up to
``horizon_cap``. A point still undecided at the cap counts as "not seen to
diverge" and marks the estimate ``HorizonLimited``.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, replace
from typing import Optional

from vomap.errors import BracketingError, DomainError
from vomap.simulator import MapConfig, OrderSchedule, Status, simulate

log = logging.getLogger(__name__)

DEFAULT_HORIZON = 10_000
HORIZON_CAP = 100_000

#: Divergence cutoff used while bisecting, as a multiple of ``|x0|``.
BISECT_DIVERGENCE_FACTOR = 1e3

#: Settling tolerance used while bisecting, as a multiple of ``|x0|``.
BISECT_CYCLE_TOL_FACTOR = 1e-3


class Confidence(enum.Enum):
    RESOLVED = "Resolved"
    HORIZON_LIMITED = "HorizonLimited"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ThresholdEstimate:
    r_star: float
    bracket: tuple[float, float]
    horizon_used: int
    confidence: Confidence
    evaluations: int = 0

    @property
    def width(self) -> float:
        return self.bracket[1] - self.bracket[0]


def bisect_config(x0: float = 0.1, horizon: int = DEFAULT_HORIZON) -> MapConfig:
    """Template config used by :func:`threshold_bisect` (``r`` is overwritten)."""
    scale = abs(x0) if x0 else 1.0
    return MapConfig(
        r=0.0,
        x0=x0,
        horizon=horizon,
        divergence_threshold=BISECT_DIVERGENCE_FACTOR * scale,
        cycle_tol=BISECT_CYCLE_TOL_FACTOR * scale,
    )


def classify_r(schedule: OrderSchedule, r: float, horizon: int,
               config: Optional[MapConfig] = None) -> Status:
    """Simulate at ``r`` for ``horizon`` steps and return the verdict.

    Without ``config`` the bisection settings of :func:`bisect_config` apply.
    """
    base = config if config is not None else bisect_config(horizon=horizon)
    return simulate(replace(base, r=float(r), horizon=int(horizon)), schedule).status


def _verdict(schedule, r, horizon, cap, config, counter):
    h = horizon
    while True:
        counter[0] += 1
        status = classify_r(schedule, r, h, config)
        if status is not Status.UNDECIDED or h >= cap:
            return status, h
        h = min(2 * h, cap)


def threshold_bisect(schedule: OrderSchedule, r_lo: float, r_hi: float,
                     tol: float = 1e-3, horizon: int = DEFAULT_HORIZON,
                     config: Optional[MapConfig] = None,
                     horizon_cap: int = HORIZON_CAP) -> ThresholdEstimate:
    """Locate the left stability threshold in ``(r_lo, r_hi)``.

    ``r_lo`` must classify Unstable and ``r_hi`` Stable, otherwise
    :class:`~vomap.errors.BracketingError` is raised. The returned
    ``r_star`` is the bracket midpoint.
    """
    if not r_lo < r_hi:
        raise DomainError("need r_lo < r_hi")
    if not tol > 0:
        raise DomainError("tol must be positive")
    if config is None:
        config = bisect_config(horizon=horizon)
    horizon_cap = max(horizon_cap, horizon)
    counter = [0]
    limited = False

    lo_status, h_lo = _verdict(schedule, r_lo, horizon, horizon_cap, config, counter)
    hi_status, h_hi = _verdict(schedule, r_hi, horizon, horizon_cap, config, counter)
    if lo_status is not Status.UNSTABLE or hi_status is not Status.STABLE:
        raise BracketingError(
            f"bracket [{r_lo}, {r_hi}] classifies as ({lo_status}, {hi_status}); "
            "expected (Unstable, Stable)"
        )
    used = max(h_lo, h_hi)
    while r_hi - r_lo > tol:
        mid = 0.5 * (r_lo + r_hi)
        status, h = _verdict(schedule, mid, horizon, horizon_cap, config, counter)
        used = max(used, h)
        if status is Status.UNSTABLE:
            r_lo = mid
        else:
            if status is Status.UNDECIDED:
                limited = True
            r_hi = mid
    confidence = Confidence.HORIZON_LIMITED if limited else Confidence.RESOLVED
    log.debug("threshold %s: [%g, %g] after %d runs (%s)",
              schedule.alphas, r_lo, r_hi, counter[0], confidence)
    return ThresholdEstimate(
        r_star=0.5 * (r_lo + r_hi),
        bracket=(r_lo, r_hi),
        horizon_used=used,
        confidence=confidence,
        evaluations=counter[0],
    )
