"""Batch drivers producing CSV tables for stability studies.

All tables are written as UTF-8 CSV with LF line endings, preceded by
``#``-prefixed metadata lines (seed, horizons, tolerances, versions). Floats
are printed with ``repr`` so that a rerun with the same seed is
byte-identical.
"""

from __future__ import annotations

import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from vomap import __version__
from vomap.analytic import DET_TOL, t3_left_bounds
from vomap.empirical import (
    DEFAULT_HORIZON,
    HORIZON_CAP,
    ThresholdEstimate,
    threshold_bisect,
)
from vomap.errors import AnalysisError, DomainError
from vomap.simulator import DEFAULT_CYCLE_TOL, MapConfig, OrderSchedule, Trajectory, simulate

#: Random orders are drawn uniformly from (ORDER_LOW, 1].
ORDER_LOW = 0.05

#: Default bisection bracket for random schedules; every left boundary lies in [-1, 0).
R_UNSTABLE = -1.05
R_STABLE = 0.5

T3_COLUMNS = ("alpha1", "alpha2", "alpha3", "r_left", "heuristic", "det_residual")
EMPIRICAL_COLUMNS = ("period", "alphas", "r_star", "heuristic", "confidence")
TIMESERIES_COLUMNS = ("t", "x")


def worker_count() -> int:
    """Worker processes to use; ``VOM_THREADS`` caps the CPU count."""
    n = os.cpu_count() or 1
    cap = os.environ.get("VOM_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise DomainError(f"VOM_THREADS must be an integer, got {cap!r}") from None
    return n


def random_orders(rng: np.random.Generator, size) -> np.ndarray:
    return 1.0 - rng.uniform(0.0, 1.0 - ORDER_LOW, size=size)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_table(path, columns: Sequence[str], rows: Iterable[Sequence],
                metadata: dict) -> Path:
    """Write ``rows`` as CSV below a ``# key: value`` metadata header."""
    buf = io.StringIO()
    for key, value in metadata.items():
        buf.write(f"# {key}: {value}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(buf.getvalue())
    return path


def read_table(path) -> tuple[dict, list[dict]]:
    """Parse a table written by :func:`write_table` into ``(metadata, rows)``."""
    meta, rows, header = {}, [], None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(":")
                meta[key.strip()] = value.strip()
            elif header is None:
                header = line.split(",")
            elif line:
                rows.append(dict(zip(header, line.split(","))))
    return meta, rows


def _versions() -> str:
    return f"vomap {__version__}, numpy {np.__version__}"


# ---------------------------------------------------------------------------
# period-three analytic sweep


@dataclass
class T3Sweep:
    alphas: np.ndarray
    r_left: np.ndarray
    heuristic: np.ndarray
    det_residual: np.ndarray
    seed: Optional[int] = None

    def __len__(self) -> int:
        return len(self.r_left)

    @property
    def failed(self) -> np.ndarray:
        """Rows whose boundary is missing or fails the determinant check."""
        return ~(np.isfinite(self.r_left) & (self.det_residual < DET_TOL))

    def rows(self):
        for (a1, a2, a3), r, h, d in zip(self.alphas, self.r_left, self.heuristic,
                                         self.det_residual):
            yield a1, a2, a3, r, h, d

    def metadata(self) -> dict:
        return {
            "table": "period-3 analytic left boundary vs mean-order heuristic",
            "seed": self.seed,
            "samples": len(self),
            "order_distribution": f"uniform ({ORDER_LOW}, 1]",
            "det_tol": DET_TOL,
            "failed_rows": int(self.failed.sum()),
            "versions": _versions(),
        }

    def to_csv(self, path) -> Path:
        return write_table(path, T3_COLUMNS, self.rows(), self.metadata())


def sweep_T3_analytic(n_samples: int, seed: int,
                      triples: Optional[np.ndarray] = None) -> T3Sweep:
    """Left boundary and mean-order heuristic for random period-three schedules.

    Failed rows stay in the table with NaN entries and are counted by
    :attr:`T3Sweep.failed`.
    """
    if triples is None:
        if n_samples < 0:
            raise DomainError("n_samples must be nonnegative")
        rng = np.random.default_rng(seed)
        triples = random_orders(rng, (n_samples, 3))
    triples = np.asarray(triples, dtype=np.float64).reshape(-1, 3)
    if len(triples) == 0:
        empty = np.empty(0)
        return T3Sweep(triples, empty, empty.copy(), empty.copy(), seed)
    if np.any((triples <= 0) | (triples > 1)):
        raise DomainError("orders must lie in (0, 1]")
    r_left, residual, _ = t3_left_bounds(triples)
    heuristic = 1.0 - 2.0 ** triples.mean(axis=1)
    return T3Sweep(triples, r_left, heuristic, residual, seed)


# ---------------------------------------------------------------------------
# empirical thresholds across periods


@dataclass(frozen=True)
class EmpiricalRow:
    period: int
    alphas: tuple[float, ...]
    r_star: float
    heuristic: float
    confidence: str
    estimate: Optional[ThresholdEstimate] = field(default=None, compare=False)

    def as_csv_row(self):
        return (self.period, ";".join(repr(a) for a in self.alphas), self.r_star,
                self.heuristic, self.confidence)


@dataclass
class EmpiricalSweep:
    rows: list[EmpiricalRow]
    seed: Optional[int]
    horizon: int
    tol: float
    horizon_cap: int

    def metadata(self) -> dict:
        return {
            "table": "empirical left threshold vs mean-order heuristic",
            "seed": self.seed,
            "horizon": self.horizon,
            "horizon_cap": self.horizon_cap,
            "tol": self.tol,
            "bracket": f"[{R_UNSTABLE}, {R_STABLE}]",
            "order_distribution": f"uniform ({ORDER_LOW}, 1]",
            "horizon_limited_rows": sum(r.confidence == "HorizonLimited" for r in self.rows),
            "versions": _versions(),
        }

    def to_csv(self, path) -> Path:
        return write_table(path, EMPIRICAL_COLUMNS, (r.as_csv_row() for r in self.rows),
                           self.metadata())


def _threshold_job(args) -> EmpiricalRow:
    alphas, horizon, tol, cap = args
    schedule = OrderSchedule(alphas)
    heuristic = 1.0 - 2.0 ** schedule.mean_order
    try:
        est = threshold_bisect(schedule, R_UNSTABLE, R_STABLE, tol=tol, horizon=horizon,
                               horizon_cap=cap)
    except AnalysisError as exc:
        return EmpiricalRow(schedule.period, schedule.alphas, float("nan"), heuristic,
                            f"Error: {type(exc).__name__}")
    return EmpiricalRow(schedule.period, schedule.alphas, est.r_star, heuristic,
                        str(est.confidence), est)


def sweep_empirical(periods: Sequence[int], n_configs: int, horizon: int = DEFAULT_HORIZON,
                    seed: int = 0, tol: float = 1e-3, horizon_cap: int = HORIZON_CAP,
                    schedules: Optional[Sequence[Sequence[float]]] = None,
                    workers: Optional[int] = None) -> EmpiricalSweep:
    """Empirical thresholds for ``n_configs`` random schedules per period.

    Schedules are drawn from one generator in period order before any work is
    dispatched, and results are collected by index, so the output does not
    depend on the worker count.
    """
    if schedules is None:
        rng = np.random.default_rng(seed)
        schedules = [tuple(random_orders(rng, int(p))) for p in periods
                     for _ in range(n_configs)]
    jobs = [(tuple(float(a) for a in s), horizon, tol, horizon_cap) for s in schedules]
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(jobs) <= 1:
        rows = [_threshold_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_threshold_job, jobs))
    return EmpiricalSweep(rows, seed, horizon, tol, horizon_cap)


# ---------------------------------------------------------------------------
# time series


def timeseries_export(schedule: OrderSchedule, r: float, x0: float, horizon: int,
                      path, memory_window: Optional[int] = None,
                      divergence_threshold: Optional[float] = None,
                      cycle_tol: float = DEFAULT_CYCLE_TOL) -> Trajectory:
    """Simulate and write ``t,x`` rows; the header records status and parameters."""
    config = MapConfig(r=r, x0=x0, horizon=horizon, memory_window=memory_window,
                       divergence_threshold=divergence_threshold, cycle_tol=cycle_tol)
    traj = simulate(config, schedule)
    meta = {
        "alphas": ";".join(repr(a) for a in schedule.alphas),
        "r": repr(config.r),
        "x0": repr(config.x0),
        "horizon": config.horizon,
        "divergence_threshold": repr(config.divergence_threshold),
        "memory": f"window {memory_window} (approximate)" if memory_window else "full",
        "status": str(traj.status),
        "steps_computed": traj.steps_computed,
        "cycle": "" if traj.cycle is None else ";".join(repr(c) for c in traj.cycle),
        "versions": _versions(),
    }
    write_table(path, TIMESERIES_COLUMNS, enumerate(traj.values.tolist()), meta)
    return traj
