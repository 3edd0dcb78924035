"""Synthetic operator: path errors, steering law, blend and hysteresis."""

from __future__ import annotations

import math

import pytest

from telesteer.teleop import (
    DesiredPath,
    TeleopGains,
    TeleopTracker,
    fbl_steering,
    path_errors,
)
from telesteer.vehicle import VehiclePose


STRAIGHT = DesiredPath([[-2.0, 0.0], [70.0, 0.0]])


def test_fbl_reference_values():
    # e_lat = 0.5, e_head = 0.1, v = 3 under two gain sets
    got = fbl_steering(0.5, 0.1, 3.0, TeleopGains(0.0, 0.75, 0.25))
    assert abs(got - -0.025078409205447459035) < 1e-15
    got = fbl_steering(0.5, 0.1, 3.0, TeleopGains(0.5, 1.25, 0.25))
    assert abs(got - -0.069610706359745099316) < 1e-15


def test_fbl_signs_and_zero_speed():
    gains = TeleopGains(0.5, 1.25, 0.25)
    # left of path: steer right (negative)
    assert fbl_steering(0.5, 0.0, 3.0, gains) < 0.0
    # right of path: steer left
    assert fbl_steering(-0.5, 0.0, 3.0, gains) > 0.0
    # heading left of tangent: steer right
    assert fbl_steering(0.0, 0.2, 3.0, gains) < 0.0
    # crawling or stopped: no command
    assert fbl_steering(0.5, 0.1, 0.05, gains) == 0.0
    assert fbl_steering(0.5, 0.1, 0.0, gains) == 0.0


def test_fbl_degenerate_heading_error():
    gains = TeleopGains(0.5, 1.25, 0.25)
    out = fbl_steering(1.0, math.pi / 2, 3.0, gains)
    assert abs(out) == pytest.approx(math.pi / 2)


def test_lateral_error_sign_convention():
    err = path_errors(VehiclePose(10.0, 1.5, 0.0), STRAIGHT)
    assert err.e_lat == pytest.approx(1.5)  # left of an eastbound path
    err = path_errors(VehiclePose(10.0, -0.7, 0.0), STRAIGHT)
    assert err.e_lat == pytest.approx(-0.7)


def test_heading_error_wraps():
    err = path_errors(VehiclePose(10.0, 0.0, 2 * math.pi + 0.3), STRAIGHT)
    assert err.e_head == pytest.approx(0.3, abs=1e-12)
    err = path_errors(VehiclePose(10.0, 0.0, -2 * math.pi - 0.3), STRAIGHT)
    assert err.e_head == pytest.approx(-0.3, abs=1e-12)


def test_projection_picks_nearest_segment():
    bent = DesiredPath([[0.0, 0.0], [10.0, 0.0], [10.0, 10.0]])
    err = path_errors(VehiclePose(5.0, 1.0, 0.0), bent)
    assert err.segment == 0
    err = path_errors(VehiclePose(11.0, 6.0, math.pi / 2), bent)
    assert err.segment == 1
    assert err.e_lat == pytest.approx(-1.0)  # right of the northbound leg


def test_segment_hint_is_forward_only():
    # two parallel legs close together; from the second leg the projection
    # must not fall back to the first even though it is nearer
    loop = DesiredPath([[0.0, 0.0], [10.0, 0.0], [10.0, 1.0], [0.0, 1.0]])
    near_first = VehiclePose(5.0, 0.1, math.pi)
    assert path_errors(near_first, loop, segment_hint=0).segment == 0
    assert path_errors(near_first, loop, segment_hint=2).segment == 2


def test_tracker_advances_hint_and_blends():
    gains = TeleopGains(0.5, 1.25, 0.25)
    tracker = TeleopTracker(STRAIGHT, gains)
    d_fbl, d_ref = tracker.reference_parts(VehiclePose(10.0, 1.0, 0.0), 3.0, 0.1)
    assert d_ref == pytest.approx(d_fbl + 0.25 * (0.1 - d_fbl))
    # pure tracking when the blend gain is zero
    pure = TeleopTracker(STRAIGHT, TeleopGains(0.5, 1.25, 0.0))
    d_fbl2, d_ref2 = pure.reference_parts(VehiclePose(10.0, 1.0, 0.0), 3.0, 0.1)
    assert d_ref2 == d_fbl2


def test_tracker_hint_sticks_across_calls():
    bent = DesiredPath([[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0]])
    gains = TeleopGains(0.5, 1.25, 0.0)
    tracker = TeleopTracker(bent, gains)
    tracker.reference(VehiclePose(11.0, 5.0, math.pi / 2), 3.0, 0.0)
    assert tracker.last_errors.segment == 1
    # later a pose near the first leg again: hint forbids going back
    tracker.reference(VehiclePose(5.0, 0.5, math.pi), 3.0, 0.0)
    assert tracker.last_errors.segment >= 1
    tracker.reset()
    tracker.reference(VehiclePose(5.0, 0.5, math.pi), 3.0, 0.0)
    assert tracker.last_errors.segment == 0


def test_closed_loop_offset_decays():
    # drive the bicycle model with the operator in the loop from a lateral
    # offset; the offset must shrink substantially and not oscillate wide
    from telesteer.vehicle import VehicleParams, rk4_step

    vehicle = VehicleParams(l_f=1.3, l_r=1.5, l_f_bumper=2.1, width=1.8)
    gains = TeleopGains(0.5, 1.25, 0.25)
    tracker = TeleopTracker(STRAIGHT, gains)
    pose = VehiclePose(0.0, 1.0, 0.0)
    delta = 0.0
    worst_late = 0.0
    for k in range(400):  # 20 s at 50 ms
        delta = tracker.reference(pose, 3.0, delta)
        pose = rk4_step(pose, delta, 3.0, 0.05, vehicle)
        if k >= 300:
            worst_late = max(worst_late, abs(pose.y))
    assert worst_late < 0.05


def test_final_line_offset_signs():
    path = DesiredPath([[0.0, 0.0], [10.0, 0.0], [20.0, 3.5], [70.0, 3.5]])
    assert path.final_line_offset(40.0, 3.5) == pytest.approx(0.0)
    assert path.final_line_offset(40.0, 4.5) == pytest.approx(1.0)
    assert path.final_line_offset(40.0, 2.0) == pytest.approx(-1.5)


def test_path_and_gain_validation():
    with pytest.raises(ValueError):
        DesiredPath([[0.0, 0.0]])
    with pytest.raises(ValueError):
        DesiredPath([[0.0, 0.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        TeleopGains(-0.1, 1.0, 0.5)
    with pytest.raises(ValueError):
        TeleopGains(0.5, 1.0, 1.5)
