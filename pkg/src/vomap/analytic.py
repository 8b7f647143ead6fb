r"""Characteristic equations and stability boundaries of the periodic-order map.

Split the trajectory into residue classes :math:`y_s(m) = x(Tm + s)`. Every
class obeys a convolution recurrence whose kernels are slices
:math:`n \mapsto \tilde\phi_\alpha(Tn + d)` of the binomial weights. With
:math:`w^T = z` a roots-of-unity filter gives their Z-transforms in closed form,

.. math::

    \sum_{n \ge 0} \tilde\phi_\alpha(Tn + \rho) z^{-n}
        = \frac{w^\rho}{T} \sum_{l=0}^{T-1} \omega^{-l\rho}
          \left(1 - \frac{\omega^l}{w}\right)^{-\alpha},
    \qquad \omega = e^{2\pi i/T},\ 0 \le \rho < T,

and a slice that starts one full period later (:math:`d = \rho + T`) becomes
:math:`z(S_\rho - \tilde\phi_\alpha(\rho))`. The zero solution is
asymptotically stable iff every root of :math:`\det M(z) = 0` has
:math:`|z| < 1`, where :math:`M` is the :math:`T \times T` coefficient matrix
of the transformed system. Everything here is evaluated in ``w``, so that
fractional powers have a single well-defined branch.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from vomap.cubic import real_cubic_roots
from vomap.errors import AnalysisError, DomainError, PoleError
from vomap.kernel import check_order
from vomap.simulator import OrderSchedule

#: Residual allowed for ``|det M(w=-1, r_left)|`` after solving the cubic.
DET_TOL = 1e-8

#: Candidate boundaries closer than this are reported as ambiguous.
ROOT_SEPARATION_TOL = 1e-6

#: Largest period whose coefficient matrix the test suite checks against simulation.
VERIFIED_MAX_PERIOD = 13


class Method(enum.Enum):
    CLOSED_FORM_T2 = "ClosedFormT2"
    CUBIC_T3 = "CubicT3"
    MEAN_ORDER_HEURISTIC = "MeanOrderHeuristic"
    EMPIRICAL_BISECT = "EmpiricalBisect"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class StabilityInterval:
    """Stable range ``r_left < r < r_right`` of the growth parameter."""

    r_left: float
    r_right: float
    method: Method
    det_residual: Optional[float] = None
    ambiguous: bool = False

    def __post_init__(self):
        if not self.r_left < self.r_right:
            raise AnalysisError(f"empty stability interval ({self.r_left}, {self.r_right})")

    def __contains__(self, r: float) -> bool:
        return self.r_left < r < self.r_right

    def __str__(self) -> str:
        return f"({self.r_left:.6g}, {self.r_right:.6g})"


@dataclass(frozen=True)
class CharEvaluation:
    w: complex
    r: float
    value: complex
    period: int
    experimental: bool = False


def bound_T2(alpha1: float, alpha2: float) -> StabilityInterval:
    """Exact stable region ``(1 - 2**min(alpha1, alpha2), 1)`` for period two."""
    low = min(check_order(alpha1), check_order(alpha2))
    return StabilityInterval(1.0 - 2.0 ** low, 1.0, Method.CLOSED_FORM_T2)


def mean_order_bound(schedule: OrderSchedule) -> StabilityInterval:
    """Heuristic region ``(1 - 2**<alpha>, 1)`` built from the mean order.

    This is an approximation, exact only for constant order.
    """
    return StabilityInterval(1.0 - 2.0 ** schedule.mean_order, 1.0,
                             Method.MEAN_ORDER_HEURISTIC)


# ---------------------------------------------------------------------------
# characteristic functions


def _check_w(w: complex, period: int) -> complex:
    w = complex(w)
    if w == 0:
        raise PoleError("w = 0 is not in the domain of the characteristic function")
    if abs(w ** period - 1.0) < 1e-13:
        raise PoleError(f"w = {w} is a root of unity of order {period}: kernel pole")
    return w


def char_fn_T2(w: complex, r: float, alpha1: float, alpha2: float,
               regularized: bool = False) -> CharEvaluation:
    r"""Period-two characteristic function in ``w = sqrt(z)``.

    The plain form is

    .. math::

        -(r-1)^2 w^{\alpha_1+\alpha_2}\left[(w-1)^{-\alpha_2}(w+1)^{-\alpha_1}
            + (w-1)^{-\alpha_1}(w+1)^{-\alpha_2}\right]
        + w(r-1)\sum_{k}w^{\alpha_k}\left[(w+1)^{-\alpha_k} - (w-1)^{-\alpha_k}\right]
        + 2w^2,

    which equals ``2 det M / z`` wherever the principal branches of
    ``((w -+ 1)/w)**-alpha`` and ``(w -+ 1)**-alpha * w**alpha`` agree (e.g. ``Re w > 1``). With
    ``regularized=True`` it is multiplied by ``(w - 1)**max(alpha)`` so that it
    stays finite at ``w = 1``. At ``w = 1`` that yields
    ``-(r-1)^2 2^{-a_min} - (r-1)``.
    """
    a1, a2 = check_order(alpha1), check_order(alpha2)
    w = complex(w)
    r = float(r)
    rm1 = r - 1.0
    if w == -1 or w == 0:
        raise PoleError(f"characteristic function has a pole at w = {w}")
    if not regularized:
        if w == 1:
            raise PoleError("w = 1 is a pole; pass regularized=True")
        value = (
            -rm1 ** 2 * w ** (a1 + a2)
            * ((w - 1) ** -a2 * (w + 1) ** -a1 + (w - 1) ** -a1 * (w + 1) ** -a2)
            + w * rm1 * (w ** a1 * ((w + 1) ** -a1 - (w - 1) ** -a1)
                         + w ** a2 * ((w + 1) ** -a2 - (w - 1) ** -a2))
            + 2 * w * w
        )
        return CharEvaluation(w, r, value, 2)

    lo, hi = sorted((a1, a2))
    # (w - 1)**(hi - lo) must read as 1 at w = 1 when the orders coincide
    gap = (w - 1) ** (hi - lo) if hi > lo else 1.0
    value = (
        -rm1 ** 2 * w ** (lo + hi) * ((w + 1) ** -lo + gap * (w + 1) ** -hi)
        + w * rm1 * (w ** lo * (w + 1) ** -lo * (w - 1) ** hi - w ** lo * gap
                     + w ** hi * (w + 1) ** -hi * (w - 1) ** hi - w ** hi)
        + 2 * w * w * (w - 1) ** hi
    )
    return CharEvaluation(w, r, complex(value), 2)


def _phi_small(alpha, n: int):
    """Binomial weight for small ``n``; ``alpha`` may be an array."""
    value = np.ones_like(np.asarray(alpha, dtype=np.float64))
    for k in range(n):
        value = value * (k + alpha) / (k + 1.0)
    return value


def coefficient_matrix(w: complex, r, alphas) -> np.ndarray:
    """Coefficient matrix ``M`` of the transformed residue system.

    ``alphas`` has shape ``(..., T)`` and ``r`` broadcasts against the leading
    dimensions; the result has shape ``(..., T, T)``. Row ``s`` is the
    equation for ``x(Tm + s)``, produced on a step of order
    ``alphas[(s - 1) % T]``; column ``q`` multiplies the transform of
    ``x(Tm + q)``.
    """
    alphas = np.asarray(alphas, dtype=np.float64)
    period = alphas.shape[-1]
    rm1 = np.asarray(r, dtype=np.float64) - 1.0
    z = w ** period
    ell = np.arange(period)
    omega = np.exp(2j * np.pi * ell / period)
    lead = alphas.shape[:-1]
    out = np.zeros(np.broadcast_shapes(lead, rm1.shape) + (period, period), dtype=complex)
    for s in range(period):
        a = alphas[..., (s - 1) % period]
        # (1 - omega^l / w)^(-a) for every l, trailing axis l
        base = (1.0 - omega / w) ** (-a[..., None])
        for q in range(period):
            d = period + s - 1 - q
            rho = d % period
            filt = np.exp(-2j * np.pi * ell * rho / period)
            entry = w ** rho / period * np.sum(filt * base, axis=-1)
            if d >= period:
                entry = z * (entry - _phi_small(a, rho))
            if q < s:
                entry = entry + _phi_small(a, s - 1 - q) * z
            entry = rm1 * entry
            if q == s:
                entry = entry - z
            out[..., s, q] = entry
    return out


def char_matrix(w: complex, r: float, schedule: OrderSchedule) -> CharEvaluation:
    """Determinant of the characteristic matrix at ``w = z**(1/T)``.

    The slice corrections are checked against transformed simulations up to
    period :data:`VERIFIED_MAX_PERIOD`; longer periods carry
    ``experimental=True``.
    """
    period = schedule.period
    if period < 2:
        raise DomainError("char_matrix needs a period of at least 2")
    w = _check_w(w, period)
    value = complex(np.linalg.det(coefficient_matrix(w, float(r), schedule.alphas)))
    return CharEvaluation(w, float(r), value, period, experimental=period > VERIFIED_MAX_PERIOD)


# ---------------------------------------------------------------------------
# period three


def t3_bracket(alpha1, alpha2, alpha3) -> np.ndarray:
    r"""Real matrix ``K`` with ``M(w=-1) = ((r-1)/3) (K + u I)``, ``u = 3/(r-1)``.

    Entries are the trigonometric constants obtained by evaluating the sliced
    transforms at ``z^{1/3} = -1``; inputs broadcast, output shape ``(..., 3, 3)``.
    """
    a1, a2, a3 = np.broadcast_arrays(*(np.asarray(a, dtype=np.float64)
                                       for a in (alpha1, alpha2, alpha3)))

    def consts(a):
        p, c, s = 2.0 ** -a, np.cos(np.pi * a / 3.0), math.sqrt(3.0) * np.sin(np.pi * a / 3.0)
        return p, c, s

    p3, c3, s3 = consts(a3)
    p1, c1, s1 = consts(a1)
    p2, c2, s2 = consts(a2)
    rows = [
        [p3 - c3 + s3, -p3 + c3 + s3, p3 + 2 * c3],
        [-p1 - 2 * c1, p1 - c1 + s1, -p1 + c1 + s1],
        [p2 - c2 - s2, -p2 - 2 * c2, p2 - c2 + s2],
    ]
    return np.stack([np.stack(row, axis=-1) for row in rows], axis=-2)


def t3_cubic(bracket: np.ndarray):
    """Coefficients ``(1, c2, c1, c0)`` of ``det(K + u I)`` as a cubic in ``u``."""
    k = bracket
    c2 = k[..., 0, 0] + k[..., 1, 1] + k[..., 2, 2]
    c1 = (k[..., 0, 0] * k[..., 1, 1] - k[..., 0, 1] * k[..., 1, 0]
          + k[..., 0, 0] * k[..., 2, 2] - k[..., 0, 2] * k[..., 2, 0]
          + k[..., 1, 1] * k[..., 2, 2] - k[..., 1, 2] * k[..., 2, 1])
    c0 = np.linalg.det(k)
    return np.ones_like(c2), c2, c1, c0


def _t3_slope_matrix(alphas) -> np.ndarray:
    """``A`` with ``M(w=-1, r) = (r - 1) A + I``; one matrix evaluation serves every ``r``."""
    return coefficient_matrix(-1.0 + 0j, 2.0, alphas) - np.eye(3)


def _t3_det_minus_one(r, slope: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=np.float64)[..., None, None]
    return np.linalg.det((r - 1.0) * slope + np.eye(3)).real


def t3_left_bounds(alphas: np.ndarray):
    """Vectorized period-three left boundaries.

    ``alphas`` has shape ``(n, 3)``. Returns ``(r_left, det_residual,
    ambiguous)``; rows without an admissible root hold NaN.
    """
    alphas = np.asarray(alphas, dtype=np.float64)
    coef = t3_cubic(t3_bracket(alphas[..., 0], alphas[..., 1], alphas[..., 2]))
    u = real_cubic_roots(*coef)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(u < 0.0, 1.0 + 3.0 / u, np.nan)
    # any negative u maps to r < 1; the largest such r binds first
    r_left = np.where(np.all(np.isnan(r), axis=-1), np.nan, np.nanmax(np.where(np.isnan(r), -np.inf, r), axis=-1))
    r_left = np.where(np.isinf(r_left), np.nan, r_left)
    srt = np.sort(np.where(np.isnan(r), np.inf, r), axis=-1)
    with np.errstate(invalid="ignore"):
        gaps = np.diff(srt, axis=-1)
    ambiguous = np.any(np.isfinite(gaps) & (gaps < ROOT_SEPARATION_TOL), axis=-1)

    ok = np.isfinite(r_left)
    safe_r = np.where(ok, r_left, 0.0)
    slope = _t3_slope_matrix(alphas)
    # one Newton step on the full determinant, central-difference slope
    h = 1e-6
    f = _t3_det_minus_one(safe_r, slope)
    df = (_t3_det_minus_one(safe_r + h, slope) - _t3_det_minus_one(safe_r - h, slope)) / (2 * h)
    with np.errstate(divide="ignore", invalid="ignore"):
        step = np.where((df != 0) & np.isfinite(f / df), f / df, 0.0)
    polished = np.where(np.abs(step) < 1e-6, safe_r - step, safe_r)
    residual = np.abs(_t3_det_minus_one(polished, slope))
    return np.where(ok, polished, np.nan), np.where(ok, residual, np.nan), ambiguous


def bound_T3(alpha1: float, alpha2: float, alpha3: float) -> StabilityInterval:
    """Stable region for period three from the boundary condition at ``z = -1``.

    The determinant at ``w = -1`` factors as ``((r-1)/3)**3 * p(u)`` with a
    cubic ``p`` in ``u = 3/(r-1)``. Each real root ``u < 0`` gives a
    candidate ``r = 1 + 3/u < 1``, and the largest candidate is the left
    boundary. The result is rejected unless the full determinant vanishes
    there to :data:`DET_TOL`.
    """
    alphas = np.array([[check_order(alpha1), check_order(alpha2), check_order(alpha3)]])
    r_left, residual, ambiguous = (v[0] for v in t3_left_bounds(alphas))
    if not np.isfinite(r_left):
        raise AnalysisError(
            f"no real boundary root with r < 1 for orders {tuple(alphas[0])}"
        )
    if not residual < DET_TOL:
        raise AnalysisError(
            f"boundary r = {r_left} leaves determinant residual {residual:.3g}"
        )
    return StabilityInterval(float(r_left), 1.0, Method.CUBIC_T3,
                             det_residual=float(residual), ambiguous=bool(ambiguous))


def boundary_candidates(schedule: OrderSchedule) -> dict[str, list[float]]:
    """Values of ``r < 1`` at which a characteristic root sits on ``z = 1`` or ``z = -1``.

    At ``z = -1`` the matrix is ``((r-1)/T) (K + u I)`` with ``u = T/(r-1)``,
    so candidates are ``r = 1 - T/lambda`` over the real eigenvalues
    ``lambda > 0`` of ``K``. At ``z = 1`` the kernels are singular and only
    period two has a regularized form. For periods above three these are
    exploratory numbers, not established boundaries.
    """
    period = schedule.period
    out: dict[str, list[float]] = {"z=+1": [], "z=-1": []}
    if period == 1:
        out["z=-1"] = [1.0 - 2.0 ** schedule.alphas[0]]
        return out
    w = cmath.exp(1j * math.pi / period)
    k = coefficient_matrix(w, 0.0, schedule.alphas)
    # at r = 0 the matrix is I - K/T
    kmat = (period * (np.eye(period) - k)).real
    lam = np.linalg.eigvals(kmat)
    real = lam[np.abs(lam.imag) < 1e-9 * max(1.0, np.max(np.abs(lam)))].real
    out["z=-1"] = sorted(float(1.0 - period / v) for v in real if v > 0)
    if period == 2:
        out["z=+1"] = [bound_T2(*schedule.alphas).r_left]
    return out
