"""Synthetic teleoperator: a path follower standing in for the human.

The operator is modeled as a feedback-linearizing steering law driving the
lateral and heading error to a desired polyline to zero, blended with the
previously applied steering angle so the reference does not fight the
corrections the predictive layer makes.  Lateral error is signed positive
when the vehicle sits left of the path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .vehicle import VehiclePose

__all__ = [
    "DesiredPath",
    "TeleopGains",
    "PathErrors",
    "path_errors",
    "fbl_steering",
    "TeleopTracker",
]

_MIN_SPEED = 0.1  # below this the steering law would blow up; command zero


@dataclass(frozen=True)
class TeleopGains:
    """Tracking gains: lateral, heading, and the blend toward the applied
    steering (0 ignores it, 1 copies it)."""

    gamma1: float
    gamma2: float
    gamma3: float

    def __post_init__(self) -> None:
        if self.gamma1 < 0.0 or self.gamma2 < 0.0:
            raise ValueError("tracking gains must be nonnegative")
        if not 0.0 <= self.gamma3 <= 1.0:
            raise ValueError("blend gain must lie in [0, 1]")


class DesiredPath:
    """Piecewise-linear reference path."""

    def __init__(self, points) -> None:
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise ValueError("path needs at least two (x, y) points")
        seg = np.diff(pts, axis=0)
        lengths = np.hypot(seg[:, 0], seg[:, 1])
        if np.any(lengths <= 0.0):
            raise ValueError("path has a zero-length segment")
        self.points = pts
        self._seg = seg
        self._lengths = lengths

    @property
    def n_segments(self) -> int:
        return len(self._lengths)

    @property
    def total_length(self) -> float:
        return float(self._lengths.sum())

    def tangent_heading(self, segment: int) -> float:
        d = self._seg[segment]
        return math.atan2(d[1], d[0])

    def project(self, x: float, y: float, segment: int) -> tuple[float, float]:
        """Clamped parameter along one segment and the squared distance."""
        p0 = self.points[segment]
        d = self._seg[segment]
        t = float(np.dot((x - p0[0], y - p0[1]), d) / np.dot(d, d))
        t = min(max(t, 0.0), 1.0)
        cx = p0[0] + t * d[0]
        cy = p0[1] + t * d[1]
        return t, (x - cx) ** 2 + (y - cy) ** 2

    def final_line_offset(self, x: float, y: float) -> float:
        """Signed distance to the infinite line through the last segment,
        positive on its left."""
        seg = self.n_segments - 1
        p0 = self.points[seg]
        d = self._seg[seg]
        ln = self._lengths[seg]
        return float((d[0] * (y - p0[1]) - d[1] * (x - p0[0])) / ln)


@dataclass(frozen=True)
class PathErrors:
    e_lat: float
    e_head: float
    segment: int


def path_errors(pose: VehiclePose, path: DesiredPath, segment_hint: int = 0) -> PathErrors:
    """Closest-point tracking errors with forward-only segment progress.

    Segments before the hint are never revisited, so a path that loops back
    near itself cannot yank the projection backwards.
    """
    hint = min(max(segment_hint, 0), path.n_segments - 1)
    best_seg = hint
    best_d2 = math.inf
    for j in range(hint, path.n_segments):
        _, d2 = path.project(pose.x, pose.y, j)
        if d2 < best_d2 - 1e-12:
            best_seg = j
            best_d2 = d2

    t, _ = path.project(pose.x, pose.y, best_seg)
    p0 = path.points[best_seg]
    d = path.points[best_seg + 1] - p0
    ln = math.hypot(d[0], d[1])
    ux, uy = d[0] / ln, d[1] / ln
    cx = p0[0] + t * d[0]
    cy = p0[1] + t * d[1]
    e_lat = ux * (pose.y - cy) - uy * (pose.x - cx)
    e_head = math.remainder(pose.heading - math.atan2(d[1], d[0]), math.tau)
    return PathErrors(e_lat=float(e_lat), e_head=float(e_head), segment=best_seg)


def fbl_steering(e_lat: float, e_head: float, v: float, gains: TeleopGains) -> float:
    """Feedback-linearizing steering from the tracking errors.

    Commands zero below walking pace rather than dividing by a vanishing
    speed squared.
    """
    if v <= _MIN_SPEED:
        return 0.0
    num = -gains.gamma1 * e_lat - gains.gamma2 * v * math.sin(e_head)
    den = v * v * math.cos(e_head)
    if abs(den) < 1e-12:
        return math.copysign(math.pi / 2, num) if num else 0.0
    return math.atan(num / den)


class TeleopTracker:
    """Stateful wrapper advancing the segment hint tick by tick."""

    def __init__(self, path: DesiredPath, gains: TeleopGains) -> None:
        self.path = path
        self.gains = gains
        self._segment = 0
        self.last_errors: PathErrors | None = None

    def reset(self) -> None:
        self._segment = 0
        self.last_errors = None

    def reference_parts(
        self, pose: VehiclePose, v: float, delta_applied: float
    ) -> tuple[float, float]:
        """Raw tracking-law angle and the blended reference for the coming
        tick, folding in the steering actually applied one tick ago."""
        err = path_errors(pose, self.path, self._segment)
        self._segment = err.segment
        self.last_errors = err
        d_fbl = fbl_steering(err.e_lat, err.e_head, v, self.gains)
        d_ref = d_fbl + self.gains.gamma3 * (delta_applied - d_fbl)
        return d_fbl, d_ref

    def reference(self, pose: VehiclePose, v: float, delta_applied: float) -> float:
        """Blended steering reference (second element of reference_parts)."""
        return self.reference_parts(pose, v, delta_applied)[1]
