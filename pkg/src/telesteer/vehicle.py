"""Kinematic bicycle model: continuous dynamics, discrete prediction step,
front-edge output map and the closed-form Jacobians of the discrete step.

The prediction model used by the steering controller advances the pose with
a single Forward Euler step of length ``dt``.  The simulated plant uses
classical RK4 over the (shorter) actuation period instead, so prediction and
plant deliberately disagree a little, like they would on a real vehicle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "VehicleParams",
    "VehiclePose",
    "FrontEdges",
    "side_slip",
    "euler_step",
    "rk4_step",
    "front_edges",
    "front_edge_jacobian",
    "linearize_step",
]


@dataclass(frozen=True)
class VehicleParams:
    """Geometry of the single-track model.

    l_f / l_r are the distances from the center of mass to the front and
    rear axle, l_f_bumper from the center of mass to the front bumper,
    width the track-to-track vehicle width.  All meters, all > 0, and the
    bumper cannot sit behind the front axle.
    """

    l_f: float
    l_r: float
    l_f_bumper: float
    width: float

    def __post_init__(self) -> None:
        if min(self.l_f, self.l_r, self.l_f_bumper, self.width) <= 0.0:
            raise ValueError("vehicle dimensions must be strictly positive")
        if self.l_f_bumper < self.l_f:
            raise ValueError("front bumper must be at or ahead of the front axle")

    @property
    def wheelbase(self) -> float:
        return self.l_f + self.l_r


@dataclass(frozen=True)
class VehiclePose:
    """Planar pose of the center of mass: x, y in meters, heading in radians.

    The heading is kept unwrapped; a trace never jumps by 2*pi.
    """

    x: float
    y: float
    heading: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.heading], dtype=float)

    @staticmethod
    def from_array(xi: np.ndarray) -> "VehiclePose":
        return VehiclePose(float(xi[0]), float(xi[1]), float(xi[2]))


@dataclass(frozen=True)
class FrontEdges:
    """Inertial positions of the two front corners of the vehicle body."""

    x_fl: float
    y_fl: float
    x_fr: float
    y_fr: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x_fl, self.y_fl, self.x_fr, self.y_fr], dtype=float)

    @property
    def left(self) -> tuple[float, float]:
        return (self.x_fl, self.y_fl)

    @property
    def right(self) -> tuple[float, float]:
        return (self.x_fr, self.y_fr)


def side_slip(delta: float, params: VehicleParams) -> float:
    """Side-slip angle of the center of mass for steering angle ``delta``.

    Requires |delta| < pi/2 so the front-wheel tangent is defined.
    Odd in delta.
    """
    ratio = params.l_r / (params.l_f + params.l_r)
    return math.atan(ratio * math.tan(delta))


def _slip_and_gain(delta: float, params: VehicleParams) -> tuple[float, float]:
    # beta and d(beta)/d(delta) in one pass; the gain is reused by the Jacobians
    ratio = params.l_r / (params.l_f + params.l_r)
    t = math.tan(delta)
    u = ratio * t
    beta = math.atan(u)
    sec2 = 1.0 + t * t
    dbeta = ratio * sec2 / (1.0 + u * u)
    return beta, dbeta


def euler_step(
    pose: VehiclePose, delta: float, v: float, dt: float, params: VehicleParams
) -> VehiclePose:
    """One Forward Euler step of the bicycle model.

    The planar velocity points along heading + side-slip, the heading rate
    is (v / l_r) * sin(side_slip).  dt must be positive, v nonnegative.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if v < 0.0:
        raise ValueError("speed must be nonnegative")
    beta = side_slip(delta, params)
    course = pose.heading + beta
    return VehiclePose(
        pose.x + dt * v * math.cos(course),
        pose.y + dt * v * math.sin(course),
        pose.heading + dt * (v / params.l_r) * math.sin(beta),
    )


def rk4_step(
    pose: VehiclePose, delta: float, v: float, dt: float, params: VehicleParams
) -> VehiclePose:
    """One classical Runge-Kutta step of the continuous bicycle model.

    Used by the simulated plant; steering and speed are held over the step.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if v < 0.0:
        raise ValueError("speed must be nonnegative")
    beta = side_slip(delta, params)
    omega = (v / params.l_r) * math.sin(beta)

    def deriv(theta: float) -> tuple[float, float, float]:
        course = theta + beta
        return (v * math.cos(course), v * math.sin(course), omega)

    k1 = deriv(pose.heading)
    k2 = deriv(pose.heading + 0.5 * dt * k1[2])
    k3 = deriv(pose.heading + 0.5 * dt * k2[2])
    k4 = deriv(pose.heading + dt * k3[2])
    sixth = dt / 6.0
    return VehiclePose(
        pose.x + sixth * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        pose.y + sixth * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        pose.heading + sixth * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    )


def front_edges(pose: VehiclePose, params: VehicleParams) -> FrontEdges:
    """Front-left and front-right body corners for a given pose.

    Left corner offsets the bumper point by +width/2 normal to the heading,
    right by -width/2.
    """
    c = math.cos(pose.heading)
    s = math.sin(pose.heading)
    lx = params.l_f_bumper * c
    ly = params.l_f_bumper * s
    wx = 0.5 * params.width * s
    wy = 0.5 * params.width * c
    return FrontEdges(
        x_fl=pose.x + lx - wx,
        y_fl=pose.y + ly + wy,
        x_fr=pose.x + lx + wx,
        y_fr=pose.y + ly - wy,
    )


def front_edge_jacobian(pose: VehiclePose, params: VehicleParams) -> np.ndarray:
    """4x3 Jacobian of (x_fl, y_fl, x_fr, y_fr) with respect to (x, y, heading)."""
    c = math.cos(pose.heading)
    s = math.sin(pose.heading)
    lf = params.l_f_bumper
    hw = 0.5 * params.width
    return np.array(
        [
            [1.0, 0.0, -lf * s - hw * c],
            [0.0, 1.0, lf * c - hw * s],
            [1.0, 0.0, -lf * s + hw * c],
            [0.0, 1.0, lf * c + hw * s],
        ]
    )


def linearize_step(
    pose: VehiclePose, delta: float, v: float, dt: float, params: VehicleParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact Jacobians of the Euler step about an operating point.

    Returns (A, B, c) with A = d(pose')/d(pose) (3x3), B = d(pose')/d(delta)
    (3x1) and c the affine residual so that the linear model
    A @ xi + B * delta + c reproduces euler_step at the operating point.
    """
    beta, dbeta = _slip_and_gain(delta, params)
    course = pose.heading + beta
    sc = math.sin(course)
    cc = math.cos(course)

    A = np.array(
        [
            [1.0, 0.0, -dt * v * sc],
            [0.0, 1.0, dt * v * cc],
            [0.0, 0.0, 1.0],
        ]
    )
    B = np.array(
        [
            [-dt * v * sc * dbeta],
            [dt * v * cc * dbeta],
            [dt * (v / params.l_r) * math.cos(beta) * dbeta],
        ]
    )
    nxt = euler_step(pose, delta, v, dt, params).as_array()
    c = nxt - A @ pose.as_array() - B[:, 0] * delta
    return A, B, c
