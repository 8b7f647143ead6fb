from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vomap.analytic import (
    DET_TOL,
    VERIFIED_MAX_PERIOD,
    Method,
    StabilityInterval,
    boundary_candidates,
    bound_T2,
    bound_T3,
    char_fn_T2,
    char_matrix,
    coefficient_matrix,
    mean_order_bound,
    t3_bracket,
    t3_left_bounds,
)
from vomap.errors import AnalysisError, DomainError, PoleError
from vomap.kernel import weight_table
from vomap.simulator import MapConfig, OrderSchedule, simulate

orders = st.floats(min_value=0.01, max_value=1.0)


# --- closed forms --------------------------------------------------------------


@pytest.mark.parametrize("a1, a2, expected", [(0.2, 0.6, -0.148698), (0.3, 0.9, -0.231144),
                                              (1.0, 1.0, -1.0)])
def test_bound_T2_examples(a1, a2, expected):
    iv = bound_T2(a1, a2)
    assert iv.r_left == pytest.approx(expected, abs=1e-6)
    assert iv.r_right == 1.0 and iv.method is Method.CLOSED_FORM_T2


def test_interval_formatting_and_membership():
    iv = bound_T2(0.2, 0.6)
    assert str(iv) == "(-0.148698, 1)"
    assert 0.0 in iv and -0.2 not in iv and 1.0 not in iv
    with pytest.raises(AnalysisError):
        StabilityInterval(0.5, 0.5, Method.CLOSED_FORM_T2)


@given(orders, orders)
def test_bound_T2_symmetric(a1, a2):
    assert bound_T2(a1, a2).r_left == bound_T2(a2, a1).r_left


@given(orders, orders, orders)
def test_bound_T2_monotone_in_min_order(a, b, c):
    lo, hi = sorted((a, b))
    assert bound_T2(lo, c).r_left >= bound_T2(hi, c).r_left


def test_domain_errors():
    with pytest.raises(DomainError):
        bound_T2(0.0, 0.5)
    with pytest.raises(DomainError):
        bound_T3(0.2, 1.2, 0.5)


@pytest.mark.parametrize("alphas, expected", [((0.2, 0.4, 0.6), -0.319508), ((1.0,), -1.0),
                                              ((1.0, 1.0, 1.0), -1.0)])
def test_mean_order_bound(alphas, expected):
    iv = mean_order_bound(OrderSchedule(alphas))
    assert iv.r_left == pytest.approx(expected, abs=1e-6)
    assert iv.method is Method.MEAN_ORDER_HEURISTIC


def test_mean_order_value_for_quoted_heuristic():
    # a mean order of log2(1.1638) reproduces the quoted heuristic -0.1638
    m = math.log2(1.1638)
    iv = mean_order_bound(OrderSchedule((m - 0.1, m, m + 0.1)))
    assert iv.r_left == pytest.approx(-0.1638, abs=1e-12)


# --- period three -----------------------------------------------------------------


@pytest.mark.parametrize("alphas, expected", [((0.2, 0.4, 0.6), -0.322259),
                                              ((0.1, 0.5, 0.9), -0.432383)])
def test_bound_T3_examples(alphas, expected):
    iv = bound_T3(*alphas)
    assert iv.r_left == pytest.approx(expected, abs=1e-6)
    assert iv.det_residual < DET_TOL
    det = char_matrix(-1.0, iv.r_left, OrderSchedule(alphas)).value
    assert abs(det) < DET_TOL


@pytest.mark.parametrize("alphas, gap", [((0.2, 0.4, 0.6), 0.0028), ((0.1, 0.5, 0.9), 0.0182)])
def test_heuristic_gap_for_worked_triples(alphas, gap):
    heur = mean_order_bound(OrderSchedule(alphas)).r_left
    diff = abs(bound_T3(*alphas).r_left - heur)
    assert diff == pytest.approx(gap, abs=1e-4)
    assert diff < 0.02


@pytest.mark.parametrize("alpha", [0.5, 0.13, 0.77, 1.0])
def test_bound_T3_constant_order(alpha):
    r3 = bound_T3(alpha, alpha, alpha).r_left
    assert r3 == pytest.approx(1.0 - 2.0 ** alpha, abs=1e-9)
    assert r3 == pytest.approx(bound_T2(alpha, alpha).r_left, abs=1e-9)


def paper_bracket_det(a1, a2, a3, r):
    """Determinant of the published A..C constants, transcribed term by term."""
    u = 3.0 / (-1.0 + r)
    s3 = math.sqrt(3.0)
    c = lambda a: math.cos(math.pi * a / 3.0)  # noqa: E731
    s = lambda a: math.sin(math.pi * a / 3.0)  # noqa: E731
    A1 = 2 ** -a3 + u - c(a3) + s3 * s(a3)
    B1 = -2 ** -a3 + c(a3) + s3 * s(a3)
    C1 = 2 ** -a3 + 2 * c(a3)
    A2 = -2 ** -a1 - 2 * c(a1)
    B2 = 2 ** -a1 + u - c(a1) + s3 * s(a1)
    C2 = -2 ** -a1 + c(a1) + s3 * s(a1)
    A3 = 2 ** -a2 - c(a2) - s3 * s(a2)
    B3 = -2 ** -a2 - 2 * c(a2)
    C3 = 2 ** -a2 + u - c(a2) + s3 * s(a2)
    return A1 * (B2 * C3 - C2 * B3) - B1 * (A2 * C3 - C2 * A3) + C1 * (A2 * B3 - B2 * A3)


def test_published_constants_match_general_matrix(rng):
    for _ in range(50):
        a = rng.uniform(0.05, 1.0, 3)
        r = float(rng.uniform(-1.0, 0.9))
        general = np.linalg.det(coefficient_matrix(-1.0 + 0j, r, a))
        assert abs(general.imag) < 1e-12
        expected = ((r - 1.0) / 3.0) ** 3 * paper_bracket_det(*a, r)
        assert general.real == pytest.approx(expected, rel=1e-9, abs=1e-13)


def test_bracket_matches_published_constants(rng):
    for _ in range(20):
        a1, a2, a3 = rng.uniform(0.05, 1.0, 3)
        k = t3_bracket(a1, a2, a3)
        u = 1.7
        r = 1.0 + 3.0 / u
        ref = paper_bracket_det(a1, a2, a3, r)
        assert np.linalg.det(k + u * np.eye(3)) == pytest.approx(ref, rel=1e-12)


def test_cubic_root_consistency(rng):
    triples = rng.uniform(0.0, 1.0, (1000, 3))
    triples = np.where(triples == 0.0, 0.5, triples)
    r_left, residual, _ = t3_left_bounds(triples)
    assert np.all(np.isfinite(r_left))
    assert np.all((r_left >= -1.0) & (r_left < 1.0))
    assert np.all(residual < DET_TOL)
    for (a1, a2, a3), r in zip(triples[:20], r_left[:20]):
        assert bound_T3(a1, a2, a3).r_left == r


def test_T3_boundary_separates_stability():
    alphas = OrderSchedule((0.1, 0.5, 0.9))
    r_left = bound_T3(*alphas.alphas).r_left
    inside = simulate(MapConfig(r=r_left + 0.03, horizon=4000), alphas)
    outside = simulate(MapConfig(r=r_left - 0.03, horizon=4000), alphas)
    assert np.abs(inside.values[-300:]).max() < 1.0
    assert np.abs(outside.values[-300:]).max() > 1.0


# --- characteristic functions -------------------------------------------------------


def test_char_fn_T2_regularized_root():
    ev = char_fn_T2(1.0, 1.0 - 2.0 ** 0.2, 0.2, 0.6, regularized=True)
    assert abs(ev.value) < 1e-10
    assert abs(char_fn_T2(1.0, 0.4, 0.2, 0.6, regularized=True).value) > 1e-3


@settings(max_examples=100)
@given(orders, orders)
def test_regularized_boundary_root_property(a1, a2):
    r = 1.0 - 2.0 ** min(a1, a2)
    assert abs(char_fn_T2(1.0, r, a1, a2, regularized=True).value) < 1e-8


@pytest.mark.parametrize("w", [1.5, 2.0 + 1.0j, -3.0 + 0.5j, 1.01j + 1.2])
def test_char_fn_T2_at_r_one(w):
    ev = char_fn_T2(w, 1.0, 0.3, 0.7)
    assert ev.value == pytest.approx(2 * w * w, rel=1e-14)


def test_char_fn_T2_poles():
    for w in (1.0, -1.0, 0.0):
        with pytest.raises(PoleError):
            char_fn_T2(w, 0.5, 0.3, 0.7)


def test_char_matrix_matches_T2_closed_form(rng):
    for _ in range(100):
        w = complex(rng.uniform(1.05, 3.0), rng.uniform(-2.0, 2.0))
        r = float(rng.uniform(-1.0, 1.0))
        a1, a2 = rng.uniform(0.05, 1.0, 2)
        det = char_matrix(w, r, OrderSchedule((a1, a2))).value
        closed = char_fn_T2(w, r, a1, a2).value
        assert closed == pytest.approx(2.0 * det / w ** 2, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("w", [1.3, -1.0, 0.4 + 1.1j])
def test_char_matrix_T3_at_r_one(w):
    ev = char_matrix(w, 1.0, OrderSchedule((0.2, 0.5, 0.8)))
    assert ev.value == pytest.approx(-(w ** 3) ** 3, rel=1e-13)
    assert not ev.experimental


def test_char_matrix_poles_and_domain():
    sched = OrderSchedule((0.2, 0.5, 0.8))
    for w in (0.0, 1.0, cmath.exp(2j * math.pi / 3)):
        with pytest.raises(PoleError):
            char_matrix(w, 0.5, sched)
    with pytest.raises(DomainError):
        char_matrix(1.5, 0.5, OrderSchedule((0.3,)))


def test_experimental_flag_beyond_verified_periods():
    long = OrderSchedule((0.5,) * (VERIFIED_MAX_PERIOD + 1))
    assert char_matrix(1.3, 0.5, long).experimental
    assert not char_matrix(1.3, 0.5, OrderSchedule((0.5,) * VERIFIED_MAX_PERIOD)).experimental


@pytest.mark.parametrize("period", [2, 3, 5, 8])
def test_sliced_transform_matches_power_series(period, rng):
    # with r = 2 and the diagonal restored, row 0 holds the sliced transforms
    alphas = rng.uniform(0.05, 1.0, period)
    w = 1.4 * cmath.exp(0.3j)
    z = w ** period
    row = coefficient_matrix(w, 2.0, alphas)[0].copy()
    row[0] += z
    weights = weight_table(float(alphas[-1]), 400 * period).weights
    for q in range(period):
        rho = period - 1 - q
        series = np.sum(weights[rho::period][:400] * z ** -np.arange(400.0))
        assert row[q] == pytest.approx(series, rel=1e-12)


@pytest.mark.parametrize("period", range(2, VERIFIED_MAX_PERIOD + 1))
def test_coefficient_matrix_annihilates_transformed_trajectory(period):
    # M(z) Y(z) equals the initial-value terms for the residue transforms Y_s
    rng = np.random.default_rng(period)
    alphas = rng.uniform(0.05, 1.0, period)
    r, x0 = 0.3, 0.1
    x = simulate(MapConfig(r=r, x0=x0, horizon=4000), OrderSchedule(tuple(alphas))).values
    w = 1.3 * cmath.exp(0.4j)
    z = w ** period
    m = len(x) // period
    y = x[: m * period].reshape(m, period)
    big_y = (y * (z ** -np.arange(m))[:, None]).sum(axis=0)
    rhs = np.empty(period, dtype=complex)
    for s in range(period):
        a = alphas[(s - 1) % period]
        tab = weight_table(float(a), period).weights
        rhs[s] = (-z * x[s] - x0 / (1.0 - 1.0 / z)
                  + sum((r - 1.0) * tab[s - 1 - q] * z * x[q] for q in range(s)))
    got = coefficient_matrix(w, r, alphas) @ big_y
    np.testing.assert_allclose(got, rhs, rtol=0, atol=1e-12)


# --- boundary candidates ---------------------------------------------------------------


def test_boundary_candidates_reduce_to_known_bounds():
    c2 = boundary_candidates(OrderSchedule((0.2, 0.6)))
    assert c2["z=+1"] == [pytest.approx(-0.148698, abs=1e-6)]
    c3 = boundary_candidates(OrderSchedule((0.2, 0.4, 0.6)))
    assert max(c3["z=-1"]) == pytest.approx(bound_T3(0.2, 0.4, 0.6).r_left, abs=1e-9)
    c1 = boundary_candidates(OrderSchedule((0.3,)))
    assert c1["z=-1"] == [pytest.approx(1.0 - 2.0 ** 0.3)]
