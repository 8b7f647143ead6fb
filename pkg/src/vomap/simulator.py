r"""Simulation of the linear map with periodic fractional order.

The recurrence is

.. math::

    x(t + 1) = x(0) + (r - 1) \sum_{j=0}^{t} \tilde\phi_{\alpha(t)}(t - j)\, x(j),
    \qquad \alpha(t) = \alpha_{t \bmod T},

so every step consumes the whole history. :func:`simulate` is the reference
implementation. :func:`simulate_decomposed_T2` and :func:`simulate_decomposed_T3`
rewrite the same map as coupled recurrences for the residue classes
``x(Tm + s)`` and serve as independent checks.

When every step has the same order, :func:`simulate` evaluates the
difference of consecutive steps instead,

.. math::

    x(t + 1) = r\,x(t) + (r - 1) \sum_{n=1}^{t}
        \bigl(\tilde\phi_{\alpha}(n) - \tilde\phi_{\alpha}(n - 1)\bigr)\, x(t - n),

which avoids the cancellation between ``x(0)`` and the full sum once the
trajectory has decayed far below ``x(0)``. With distinct orders the
differenced kernel no longer decays and the direct sum is more accurate.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from vomap import _backend
from vomap.errors import DomainError
from vomap.kernel import check_capacity, check_order, weight_table

#: Number of trailing periods that must agree before a trajectory counts as converged.
CONVERGENCE_PERIODS = 10

DEFAULT_CYCLE_TOL = 1e-6


class Status(enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    UNDECIDED = "Undecided"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class OrderSchedule:
    """Periodic order sequence; step ``t`` uses ``alphas[t % period]``."""

    alphas: tuple[float, ...]

    def __post_init__(self):
        alphas = tuple(check_order(a) for a in self.alphas)
        if not alphas:
            raise DomainError("an order schedule needs at least one order")
        object.__setattr__(self, "alphas", alphas)

    @classmethod
    def of(cls, *alphas: float) -> "OrderSchedule":
        return cls(tuple(alphas))

    @property
    def period(self) -> int:
        return len(self.alphas)

    @property
    def mean_order(self) -> float:
        return sum(self.alphas) / len(self.alphas)

    def order_at(self, t: int) -> float:
        return self.alphas[t % len(self.alphas)]


@dataclass(frozen=True)
class MapConfig:
    """Parameters of one simulation run.

    ``divergence_threshold`` defaults to ``1e6 * max(|x0|, 1)``. A
    ``memory_window`` truncates the convolution to the most recent terms
    (short-memory approximation); leave it as ``None`` for exact runs.
    """

    r: float
    x0: float = 0.1
    horizon: int = 1000
    divergence_threshold: Optional[float] = None
    memory_window: Optional[int] = None
    cycle_tol: float = DEFAULT_CYCLE_TOL

    def __post_init__(self):
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "x0", float(self.x0))
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise DomainError(f"horizon must be a positive integer, got {self.horizon!r}")
        object.__setattr__(self, "horizon", int(self.horizon))
        if self.divergence_threshold is None:
            object.__setattr__(
                self, "divergence_threshold", 1e6 * max(abs(self.x0), 1.0)
            )
        if not self.divergence_threshold > 0:
            raise DomainError("divergence_threshold must be positive")
        if self.memory_window is not None:
            if not 1 <= self.memory_window <= self.horizon:
                raise DomainError("memory_window must lie in [1, horizon]")
            object.__setattr__(self, "memory_window", int(self.memory_window))
        if not self.cycle_tol > 0:
            raise DomainError("cycle_tol must be positive")

    @property
    def approximate(self) -> bool:
        return self.memory_window is not None


@dataclass
class Trajectory:
    values: np.ndarray
    status: Status
    steps_computed: int
    config: MapConfig
    period: int
    cycle: Optional[tuple[float, ...]] = None
    backend: str = field(default=_backend.BACKEND)

    @property
    def approximate(self) -> bool:
        """True when the run used a truncated memory window."""
        return self.config.approximate

    @property
    def final_value(self) -> float:
        return float(self.values[-1])


def _finish(values: np.ndarray, steps: int, config: MapConfig, period: int,
            backend: str = _backend.BACKEND) -> Trajectory:
    traj = Trajectory(values=values, status=Status.UNDECIDED, steps_computed=steps,
                      config=config, period=period, backend=backend)
    traj.status = classify(traj)
    if traj.status is Status.STABLE:
        traj.cycle = extract_cycle(traj, period, config.cycle_tol)
    return traj


def order_tables(schedule: OrderSchedule, n_max: int) -> np.ndarray:
    """Stack one weight table per residue into a ``(period, n_max + 1)`` array.

    Each distinct order is tabulated once.
    """
    check_capacity((schedule.period + 1) * (n_max + 1), "order tables")
    cache = {}
    rows = []
    for a in schedule.alphas:
        if a not in cache:
            cache[a] = weight_table(a, n_max).weights
        rows.append(cache[a])
    return np.ascontiguousarray(np.vstack(rows))


def recurrence_tables(schedule: OrderSchedule, horizon: int,
                      memory_window: Optional[int] = None) -> tuple[np.ndarray, bool]:
    """Kernels for the compiled loop and whether they are in difference form.

    Row ``k`` serves steps ``t`` with ``t % period == k``; entry ``n >= 1``
    multiplies ``x(t - n)`` and entry 0 is unused. The direct form keeps
    ``phi(n)`` for ``n < W`` (``W`` the window, or everything). The
    difference form, used for single-order schedules, keeps
    ``phi(n) - phi(n-1)`` and, under a window, ends with ``-phi(W-1)`` at
    ``n = W``.
    """
    diff = len(set(schedule.alphas)) == 1
    if memory_window is None:
        depth = horizon
    else:
        depth = memory_window if diff else memory_window - 1
    weights = order_tables(schedule, max(depth, 1))[:, : depth + 1]
    if not diff:
        out = weights.copy()
        out[:, 0] = 0.0
        return np.ascontiguousarray(out), False
    out = np.zeros_like(weights)
    out[:, 1:] = weights[:, 1:] - weights[:, :-1]
    if memory_window is not None:
        out[:, depth] = -weights[:, depth - 1]
    return np.ascontiguousarray(out), True


def simulate(config: MapConfig, schedule: OrderSchedule, *, kernel=None) -> Trajectory:
    """Run the variable-order map for ``config.horizon`` steps.

    Stops at the first value whose magnitude exceeds the divergence
    threshold. ``kernel`` overrides the backend recurrence (used by the
    benchmark and the backend cross-checks).
    """
    n = config.horizon
    tables, diff = recurrence_tables(schedule, n, config.memory_window)
    rm1 = config.r - 1.0
    c0, lead = (0.0, config.r) if diff else (config.x0, rm1)
    run = kernel if kernel is not None else _backend.run_recurrence
    values, steps = run(tables, config.x0, c0, lead, rm1, n,
                        float(config.divergence_threshold))
    backend = _backend.BACKEND if kernel is None else getattr(kernel, "__module__", "custom")
    return _finish(np.asarray(values), int(steps), config, schedule.period, backend)


def _conv(kernel: np.ndarray, seq: np.ndarray, m: int) -> float:
    """Return ``sum_{k=0}^{m} kernel[m - k] * seq[k]``."""
    return float(np.dot(kernel[m::-1], seq[: m + 1]))


def _diverged(v: float, threshold: float) -> bool:
    return not np.isfinite(v) or abs(v) > threshold


def simulate_decomposed_T2(config: MapConfig, alpha1: float, alpha2: float) -> Trajectory:
    """Period-2 map as coupled recurrences for ``a(m) = x(2m)`` and ``b(m) = x(2m+1)``.

    ``alpha1`` drives even steps and ``alpha2`` odd steps, matching
    ``OrderSchedule.of(alpha1, alpha2)``. The update for ``a`` happens on an odd
    step, the update for ``b`` on an even one.
    """
    alpha1, alpha2 = check_order(alpha1), check_order(alpha2)
    n, x0, rm1 = config.horizon, config.x0, config.r - 1.0
    thr = config.divergence_threshold
    m_max = n // 2 + 1
    odd = weight_table(alpha2, 2 * m_max + 2).weights
    even = weight_table(alpha1, 2 * m_max + 2).weights
    k_aa, k_ab = odd[1::2], odd[0::2]
    k_ba, k_bb = even[2::2], even[1::2]

    a = np.zeros(m_max + 1)
    b = np.zeros(m_max + 1)
    out = np.empty(n + 1)
    a[0] = out[0] = x0
    b[0] = x0 + rm1 * x0
    out[1] = b[0]
    if _diverged(b[0], thr):
        return _finish(out[:2], 1, config, 2)
    t = 1
    for m in range(m_max):
        a[m + 1] = x0 + rm1 * (_conv(k_aa, a, m) + _conv(k_ab, b, m))
        t += 1
        if t > n:
            break
        out[t] = a[m + 1]
        if _diverged(a[m + 1], thr):
            return _finish(out[: t + 1], t, config, 2)
        b[m + 1] = x0 + rm1 * (_conv(k_ba, a, m) + a[m + 1] + _conv(k_bb, b, m))
        t += 1
        if t > n:
            break
        out[t] = b[m + 1]
        if _diverged(b[m + 1], thr):
            return _finish(out[: t + 1], t, config, 2)
    return _finish(out, n, config, 2)


def simulate_decomposed_T3(config: MapConfig, alpha1: float, alpha2: float,
                           alpha3: float) -> Trajectory:
    """Period-3 map as coupled recurrences for ``x(3m)``, ``x(3m+1)``, ``x(3m+2)``.

    Step ``3m + 2`` (order ``alpha3``) produces ``a(m+1)``, step ``3m + 3``
    (order ``alpha1``) produces ``b(m+1)`` and step ``3m + 4`` (order
    ``alpha2``) produces ``c(m+1)``.
    """
    alpha1, alpha2, alpha3 = (check_order(a) for a in (alpha1, alpha2, alpha3))
    n, x0, rm1 = config.horizon, config.x0, config.r - 1.0
    thr = config.divergence_threshold
    m_max = n // 3 + 1
    w1 = weight_table(alpha1, 3 * m_max + 5).weights
    w2 = weight_table(alpha2, 3 * m_max + 5).weights
    w3 = weight_table(alpha3, 3 * m_max + 5).weights
    k_aa, k_ab, k_ac = w3[2::3], w3[1::3], w3[0::3]
    k_ba, k_bb, k_bc = w1[3::3], w1[2::3], w1[1::3]
    k_ca, k_cb, k_cc = w2[4::3], w2[3::3], w2[2::3]

    a = np.zeros(m_max + 1)
    b = np.zeros(m_max + 1)
    c = np.zeros(m_max + 1)
    out = np.empty(n + 1)
    a[0] = x0
    b[0] = x0 + rm1 * x0
    c[0] = x0 + rm1 * (w2[1] * a[0] + b[0])
    head = [a[0], b[0], c[0]]
    for t in range(min(n, 2) + 1):
        out[t] = head[t]
        if t and _diverged(head[t], thr):
            return _finish(out[: t + 1], t, config, 3)
    if n <= 2:
        return _finish(out, n, config, 3)
    t = 2
    for m in range(m_max):
        updates = (
            (a, lambda: x0 + rm1 * (_conv(k_aa, a, m) + _conv(k_ab, b, m) + _conv(k_ac, c, m))),
            (b, lambda: x0 + rm1 * (_conv(k_ba, a, m) + a[m + 1]
                                    + _conv(k_bb, b, m) + _conv(k_bc, c, m))),
            (c, lambda: x0 + rm1 * (_conv(k_ca, a, m) + w2[1] * a[m + 1]
                                    + _conv(k_cb, b, m) + b[m + 1] + _conv(k_cc, c, m))),
        )
        for seq, update in updates:
            t += 1
            if t > n:
                return _finish(out, n, config, 3)
            seq[m + 1] = update()
            out[t] = seq[m + 1]
            if _diverged(out[t], thr):
                return _finish(out[: t + 1], t, config, 3)
    return _finish(out, n, config, 3)


def residue_tails(values: Sequence[float], period: int, periods: int) -> Optional[np.ndarray]:
    """Return a ``(periods, period)`` array of trailing values grouped by residue.

    Column ``k`` holds the last ``periods`` entries ``values[t]`` with
    ``t % period == k``. Returns ``None`` when the series is too short.
    """
    values = np.asarray(values)
    n = len(values) - 1
    if n + 1 < periods * period + period:
        return None
    end = n + 1 - (n + 1) % period
    block = values[end - periods * period: end]
    return block.reshape(periods, period)


def extract_cycle(traj: Trajectory, period: int, tol: float,
                  periods: int = CONVERGENCE_PERIODS) -> Optional[tuple[float, ...]]:
    """Return the asymptotic cycle ``(x*_0, ..., x*_{T-1})`` or ``None``.

    Entry ``k`` is the latest value at a time congruent to ``k`` modulo
    ``period``. The cycle is reported only if, for each residue, the last
    ``periods`` values agree to within ``tol``.
    """
    if traj.steps_computed < traj.config.horizon:
        return None
    tails = residue_tails(traj.values, period, periods)
    if tails is None:
        return None
    spread = tails.max(axis=0) - tails.min(axis=0)
    if not np.all(spread <= tol):
        return None
    return tuple(float(v) for v in tails[-1])


def classify(traj: Trajectory) -> Status:
    """Unstable on divergence, Stable once the trailing periods settle, else Undecided."""
    thr = traj.config.divergence_threshold
    values = np.asarray(traj.values)
    if traj.steps_computed < traj.config.horizon or not np.all(np.isfinite(values)):
        return Status.UNSTABLE
    if np.max(np.abs(values)) > thr:
        return Status.UNSTABLE
    if extract_cycle(traj, traj.period, traj.config.cycle_tol) is not None:
        return Status.STABLE
    return Status.UNDECIDED
