from fractions import Fraction

import numpy as np
import pytest

from returntimes.errors import BudgetExceeded, PieceCapExceeded, ScanLimitExceeded
from returntimes.maps import IntervalUnion, make_builtin_map, orbit, sample_initial_point
from returntimes.recurrence import (BallIterationState, ball_set_return, default_ball_budget,
                                    default_point_budget, empirical_ball_measure,
                                    point_return_time, repetition_series, repetition_time,
                                    scan_scales)
from returntimes.symbolic import cylinder_return_time, encode_orbit, natural_partition

ROT4 = make_builtin_map("rotation", [0.25])
TRIP = make_builtin_map("tripling")


def test_point_return_examples():
    assert point_return_time(ROT4, 0.0, 0.1, 10) == 4
    assert point_return_time(ROT4, 0.0, 0.3, 10) == 1
    # brute-force scan of the float orbit, frozen
    assert point_return_time(TRIP, 0.33, 1e-3) == 20


def test_point_return_budget():
    with pytest.raises(BudgetExceeded):
        point_return_time(TRIP, 0.33, 1e-3, 10)
    with pytest.raises(ValueError):
        point_return_time(TRIP, 0.33, 0.0)


def test_point_return_matches_orbit_scan():
    for name in ("tripling", "logistic", "gauss", "rotation"):
        m = make_builtin_map(name)
        x = sample_initial_point(m, 11)
        pts = orbit(m, x, 200_001).points
        for r in (0.05, 0.01, 0.002):
            d = np.array([m.distance(p, x) for p in pts[1:]])
            ref = int(np.flatnonzero(d < r)[0]) + 1
            assert point_return_time(m, x, r, 200_000) == ref


def test_repetition_examples():
    assert repetition_time([0, 1, 0, 0, 1], 2) == 3
    assert repetition_time([0] * 9, 4) == 1
    assert repetition_time([0, 1, 0, 1, 0, 1], 3) == 2
    with pytest.raises(ScanLimitExceeded):
        repetition_time([0, 1, 2, 3], 2)


def test_repetition_wide_alphabet():
    w = [300, 5, 300, 7, 300, 5]
    assert repetition_time(w, 2) == 4
    assert repetition_time(w, 1) == 2


def test_repetition_nondecreasing():
    w = np.random.default_rng(0).integers(0, 2, 5000)
    s = repetition_series(w, [1, 2, 3, 4, 5, 6, 7, 8])
    vals = [r.value for r in s.rows if r.ok]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_ball_fixed_point_and_isometry():
    assert ball_set_return(TRIP, 0.5, 1e-3, 50) == 1
    assert ball_set_return(TRIP, 0.0, 1e-2, 50) == 1
    assert ball_set_return(make_builtin_map("rotation", [Fraction(1, 4)]), 0.1, 0.01) == 4


def test_ball_dense_grid_oracle():
    r = 1e-3
    for x in (0.5, 0.33, 0.123456, 0.8765):
        exact = ball_set_return(TRIP, x, r, 50)
        pts = np.linspace(x - r, x + r, 10**4)
        k = 0
        while True:
            k += 1
            pts = 3.0 * pts % 1.0
            if np.any(np.abs(pts - x) <= r):
                break
        assert exact == k


def test_set_return_bounded_by_point_return():
    for name in ("tripling", "logistic", "gauss"):
        m = make_builtin_map(name)
        for s in range(10):
            x = sample_initial_point(m, s)
            for r in (1e-2, 1e-3):
                assert ball_set_return(m, x, r) <= point_return_time(m, x, r)


def test_isometry_ball_return_is_point_return_at_double_radius():
    # a rotated ball meets the ball as soon as the centres are within 2r
    m = make_builtin_map("rotation")
    for s in range(5):
        x = sample_initial_point(m, s)
        pts = orbit(m, x, 10_001).points[1:]
        d = np.array([m.distance(p, x) for p in pts])
        for r in (1e-2, 1e-3):
            assert ball_set_return(m, x, r) == int(np.flatnonzero(d <= 2 * r)[0]) + 1
            assert ball_set_return(m, x, r) <= point_return_time(m, x, r)


def test_monotone_in_radius():
    x = sample_initial_point(TRIP, 3)
    radii = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5]
    balls = [ball_set_return(TRIP, x, r) for r in radii]
    points = [point_return_time(TRIP, x, r) for r in radii]
    assert balls == sorted(balls) and points == sorted(points)


def test_piece_cap():
    with pytest.raises(PieceCapExceeded) as info:
        ball_set_return(TRIP, 0.3, 0.05, 20, piece_cap=1)
    assert info.value.step >= 1


def test_ball_iteration_state():
    st = BallIterationState(IntervalUnion.ball(0.2, 0.01), budget=5)
    st.advance(TRIP)
    assert st.step == 1 and st.piece_count == 1
    with pytest.raises(ValueError):
        BallIterationState(IntervalUnion.full(), budget=1, step=2)


def test_empirical_measure_examples():
    o = orbit(TRIP, sample_initial_point(TRIP, 1), 10**6)
    assert empirical_ball_measure(o, 0.5, 0.1) == pytest.approx(0.2, abs=0.01)
    assert empirical_ball_measure(o, 0.5, 1.0) == 1.0
    fixed = orbit(TRIP, 0.0, 100)
    assert empirical_ball_measure(fixed, 0.5, 0.01) == 0.0


def test_scan_scales_examples():
    s = scan_scales("point-return", ROT4, 0.0, [0.3, 0.1])
    assert s.values == [1, 4]
    for kind, grid in (("point-return", [0.01]), ("ball-set-return", [0.01]),
                       ("cylinder-return", [5]), ("repetition", [3])):
        assert len(scan_scales(kind, TRIP, 0.2345, grid)) == 1
    s = scan_scales("ball-set-return", TRIP, 0.2345, [1e-2, 1e-3, 1e-4, 1e-5])
    assert s.values == sorted(s.values)
    with pytest.raises(ValueError):
        scan_scales("point-return", TRIP, 0.2, [0.01, 0.1])


def test_scan_flags_not_dropped():
    s = scan_scales("point-return", TRIP, 0.33, [1e-1, 1e-4], budgets=[100, 5])
    assert len(s) == 2 and s.rows[1].flag == "budget"
    assert len(s.usable) == 1


def test_gauss_truncation_flagged():
    m = make_builtin_map("gauss", [20])
    s = scan_scales("point-return", m, 0.7, [1e-3, 1e-5, 1e-7])
    assert any(r.flag == "truncated" for r in s.rows)


def test_repetition_not_before_cylinder_return():
    part = natural_partition(TRIP)
    for s in range(10):
        w = encode_orbit(orbit(TRIP, sample_initial_point(TRIP, s), 20_000), part)
        for n in (2, 4, 6):
            assert repetition_time(w, n) >= cylinder_return_time(w[:n])


def test_default_budgets():
    assert default_point_budget(0.1) == 331
    assert default_ball_budget(TRIP, 1e-3) == 63
    assert default_ball_budget(ROT4, 1e-3) == default_point_budget(1e-3)
