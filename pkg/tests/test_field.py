"""Superellipse bounds and the repulsive potential built on them."""

from __future__ import annotations

import math

import numpy as np
import pytest

from telesteer.field import (
    EllipseBound,
    FieldSpec,
    RectObstacle,
    bound_rectangle,
    emit_contours,
    contours_to_text,
    scale_factor,
)


def test_scale_factor_values():
    assert scale_factor(2) == pytest.approx(math.sqrt(2.0), abs=1e-15)
    assert abs(scale_factor(4) - 1.1892071150027210667) < 1e-15
    with pytest.raises(ValueError):
        scale_factor(3)
    with pytest.raises(ValueError):
        scale_factor(0)


def test_bound_semi_axes_for_reference_rectangle():
    rect = RectObstacle(x=0.0, y=0.0, heading=0.0, length=4.8, width=1.8)
    bound = bound_rectangle(rect, 4)
    assert abs(bound.a - 2.8540970760065305601) < 1e-12
    assert abs(bound.b - 1.07028640350244896) < 1e-12


def test_corners_sit_exactly_on_every_bound():
    rng = np.random.default_rng(3)
    for _ in range(100):
        rect = RectObstacle(
            x=float(rng.uniform(-20, 20)),
            y=float(rng.uniform(-20, 20)),
            heading=float(rng.uniform(-math.pi, math.pi)),
            length=float(rng.uniform(0.5, 8.0)),
            width=float(rng.uniform(0.3, 4.0)),
        )
        for n in (2, 4, 6, 8):
            bound = bound_rectangle(rect, n)
            for cx, cy in rect.corners():
                assert abs(bound.shape(cx, cy)) <= 1e-12


def test_enclosed_area_strictly_decreases_with_power():
    rect = RectObstacle(x=1.0, y=-2.0, heading=0.4, length=4.6, width=1.8)
    areas = []
    for n in (2, 4, 6, 8):
        poly = bound_rectangle(rect, n).contour(0.0, 2048)
        x, y = poly[:, 0], poly[:, 1]
        # shoelace over the closed polygon
        area = 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
        areas.append(area)
    rect_area = rect.length * rect.width
    for lo, hi in zip(areas[1:], areas[:-1]):
        assert lo < hi
    assert areas[-1] > rect_area  # still encloses the rectangle


def test_shape_sign_inside_outside():
    bound = bound_rectangle(RectObstacle(0, 0, 0, 4.0, 2.0), 4)
    assert bound.shape(0.0, 0.0) == pytest.approx(-1.0)
    assert bound.shape(10.0, 0.0) > 0.0
    assert bound.shape(0.0, 10.0) > 0.0


def test_shape_heading_rotation_consistency():
    rng = np.random.default_rng(9)
    for _ in range(50):
        heading = float(rng.uniform(-math.pi, math.pi))
        plain = bound_rectangle(RectObstacle(0, 0, 0, 4.6, 1.8), 4)
        turned = bound_rectangle(RectObstacle(0, 0, heading, 4.6, 1.8), 4)
        px, py = rng.uniform(-6, 6, size=2)
        c, s = math.cos(heading), math.sin(heading)
        qx, qy = c * px - s * py, s * px + c * py  # same point in turned frame
        assert turned.shape(qx, qy) == pytest.approx(
            plain.shape(px, py), rel=1e-12, abs=1e-12
        )


def test_contour_points_lie_on_level():
    bound = bound_rectangle(RectObstacle(2.0, -1.0, 0.7, 4.6, 1.8), 6)
    for level in (0.0, 0.5, 3.0):
        poly = bound.contour(level, 256)
        vals = bound.shape(poly[:, 0], poly[:, 1])
        assert np.abs(vals - level).max() < 1e-9
    with pytest.raises(ValueError):
        bound.contour(-1.0, 256)
    with pytest.raises(ValueError):
        bound.contour(0.0, 8)


def test_potential_value_and_clamp():
    bound = bound_rectangle(RectObstacle(0, 0, 0, 4.0, 2.0), 4)
    field = FieldSpec(bounds=(bound,), alpha=1.0, slope_exp=1.0)
    assert field.value(0.0, 10.0) < 1.0  # well outside
    assert field.value(bound.a, 0.0) == pytest.approx(1.0)  # on the boundary
    # at the center s = -1 and the denominator clamp takes over
    assert field.value(0.0, 0.0) == pytest.approx(1.0 / field.eps_floor)


def test_potential_sums_over_obstacles():
    b1 = bound_rectangle(RectObstacle(0, 0, 0, 4.0, 2.0), 4)
    b2 = bound_rectangle(RectObstacle(10, 0, 0, 4.0, 2.0), 4)
    single = FieldSpec(bounds=(b1,), alpha=1.0, slope_exp=1.0)
    double = FieldSpec(bounds=(b1, b2), alpha=1.0, slope_exp=1.0)
    x, y = 5.0, 0.5
    other = FieldSpec(bounds=(b2,), alpha=1.0, slope_exp=1.0)
    assert double.value(x, y) == pytest.approx(single.value(x, y) + other.value(x, y))


def test_gradient_and_hessian_match_finite_differences():
    rng = np.random.default_rng(17)
    bounds = (
        bound_rectangle(RectObstacle(0.0, 0.0, 0.3, 4.6, 1.8), 4),
        bound_rectangle(RectObstacle(6.0, 2.0, -0.9, 3.0, 1.2), 6),
    )
    field = FieldSpec(bounds=bounds, alpha=1.0, slope_exp=1.0)
    eps = 1e-6
    checked = 0
    while checked < 300:
        x, y = rng.uniform(-8.0, 12.0), rng.uniform(-6.0, 8.0)
        if min(b.shape(x, y) for b in bounds) < -0.5:
            continue  # keep clear of the clamp region where P is flat
        checked += 1
        gx, gy = field.gradient(x, y)
        fd_gx = (field.value(x + eps, y) - field.value(x - eps, y)) / (2 * eps)
        fd_gy = (field.value(x, y + eps) - field.value(x, y - eps)) / (2 * eps)
        scale = max(1.0, abs(fd_gx), abs(fd_gy))
        assert abs(gx - fd_gx) / scale < 1e-5
        assert abs(gy - fd_gy) / scale < 1e-5

        hess = field.hessian_matrix(x, y)
        he = 1e-5  # wider step for second differences, less cancellation
        fd_hxx = (field.value(x + he, y) - 2 * field.value(x, y) + field.value(x - he, y)) / he**2
        fd_hyy = (field.value(x, y + he) - 2 * field.value(x, y) + field.value(x, y - he)) / he**2
        fd_hxy = (
            field.value(x + he, y + he)
            - field.value(x + he, y - he)
            - field.value(x - he, y + he)
            + field.value(x - he, y - he)
        ) / (4 * he**2)
        hscale = max(1.0, np.abs(hess).max())
        assert abs(hess[0, 0] - fd_hxx) / hscale < 1e-3
        assert abs(hess[1, 1] - fd_hyy) / hscale < 1e-3
        assert abs(hess[0, 1] - fd_hxy) / hscale < 1e-3


def test_gradient_vanishes_inside_clamp():
    bound = bound_rectangle(RectObstacle(0, 0, 0, 4.0, 2.0), 4)
    field = FieldSpec(bounds=(bound,), alpha=1.0, slope_exp=1.0)
    gx, gy = field.gradient(0.0, 0.0)
    assert gx == 0.0 and gy == 0.0


def test_empty_field_is_zero_everywhere():
    field = FieldSpec(bounds=(), alpha=1.0, slope_exp=1.0)
    assert field.empty
    assert field.value(3.0, 4.0) == 0.0
    assert field.gradient(3.0, 4.0) == (0.0, 0.0)
    assert np.all(field.hessian_matrix(3.0, 4.0) == 0.0)


def test_contour_emission_text_blocks():
    bound = bound_rectangle(RectObstacle(0, 0, 0, 4.0, 2.0), 4)
    polys = emit_contours(bound, levels=(0.0, 1.0))
    text = contours_to_text(polys)
    blocks = [b for b in text.split("\n\n") if b.strip()]
    assert len(blocks) == 2
    first = blocks[0].splitlines()
    assert all(len(row.split()) == 2 for row in first)


def test_field_validation():
    bound = bound_rectangle(RectObstacle(0, 0, 0, 4.0, 2.0), 4)
    with pytest.raises(ValueError):
        FieldSpec(bounds=(bound,), alpha=0.0, slope_exp=1.0)
    with pytest.raises(ValueError):
        FieldSpec(bounds=(bound,), alpha=1.0, slope_exp=-1.0)
    with pytest.raises(ValueError):
        RectObstacle(0, 0, 0, -1.0, 2.0)
    with pytest.raises(ValueError):
        EllipseBound(0, 0, 0, a=1.0, b=1.0, n=5)
