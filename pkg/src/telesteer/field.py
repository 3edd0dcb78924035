"""Repulsive potential field built from even-order bounding ellipses.

Each rectangular obstacle is wrapped in a high-order ellipse whose shape
function is zero on the boundary, negative inside and grows outward.  The
potential of one bound is alpha / (shape + 1)**slope_exp, so it equals
alpha exactly on the boundary and decays with distance; the field is the
sum over all bounds.  First and second derivatives are analytic, which the
steering controller relies on.

Even powers are evaluated by repeated squaring of the squared normalized
coordinate, so the result is exact-signed and stable for large orders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RectObstacle",
    "EllipseBound",
    "FieldSpec",
    "scale_factor",
    "bound_rectangle",
    "emit_contours",
    "contours_to_text",
]


@dataclass(frozen=True)
class RectObstacle:
    """Axis dimensions and pose of a rectangular obstacle footprint."""

    x: float
    y: float
    heading: float
    length: float
    width: float

    def __post_init__(self) -> None:
        if self.length <= 0.0 or self.width <= 0.0:
            raise ValueError("obstacle length and width must be positive")

    def corners(self) -> np.ndarray:
        """World coordinates of the four rectangle corners, shape (4, 2)."""
        c, s = math.cos(self.heading), math.sin(self.heading)
        hl, hw = 0.5 * self.length, 0.5 * self.width
        local = np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]])
        rot = np.array([[c, -s], [s, c]])
        return local @ rot.T + np.array([self.x, self.y])


def scale_factor(n: int) -> float:
    """Semi-axis scaling that puts an order-n ellipse through the rectangle
    corners: the n-th root of 2.

    Only even orders >= 2 are meaningful; anything else is rejected.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ValueError("ellipse order must be an integer")
    if n < 2 or n % 2 != 0:
        raise ValueError("ellipse order must be an even integer >= 2")
    return 2.0 ** (1.0 / n)


def _pow_int(base, k: int):
    """base**k for integer k >= 0 by binary exponentiation; broadcasts."""
    result = np.ones_like(np.asarray(base, dtype=float))
    b = np.asarray(base, dtype=float).copy()
    while k:
        if k & 1:
            result = result * b
        b = b * b
        k >>= 1
    return result


def _even_power(q, n: int):
    """q**n for even n, computed as (q*q)**(n/2)."""
    return _pow_int(np.asarray(q, dtype=float) ** 2, n // 2)


def _odd_power(q, k: int):
    """q**k for odd k >= 1, split as q * (q*q)**((k-1)/2)."""
    q = np.asarray(q, dtype=float)
    return q * _pow_int(q * q, (k - 1) // 2)


@dataclass(frozen=True)
class EllipseBound:
    """Order-n ellipse with center, heading and semi-axes a (along the
    heading) and b (across it).  n must be even so the shape function is
    smooth everywhere.
    """

    x: float
    y: float
    heading: float
    a: float
    b: float
    n: int

    def __post_init__(self) -> None:
        if self.a <= 0.0 or self.b <= 0.0:
            raise ValueError("semi-axes must be positive")
        if self.n < 2 or self.n % 2 != 0:
            raise ValueError("ellipse order must be an even integer >= 2")

    def _local(self, x, y):
        c, s = math.cos(self.heading), math.sin(self.heading)
        dx = np.asarray(x, dtype=float) - self.x
        dy = np.asarray(y, dtype=float) - self.y
        return c * dx + s * dy, -s * dx + c * dy

    def shape(self, x, y):
        """Shape value: -1 at the center, 0 on the boundary, > 0 outside."""
        u, w = self._local(x, y)
        return _even_power(u / self.a, self.n) + _even_power(w / self.b, self.n) - 1.0

    def shape_gradient(self, x, y):
        """(ds/dx, ds/dy); broadcasts over point arrays."""
        u, w = self._local(x, y)
        su = (self.n / self.a) * _odd_power(u / self.a, self.n - 1)
        sw = (self.n / self.b) * _odd_power(w / self.b, self.n - 1)
        c, s = math.cos(self.heading), math.sin(self.heading)
        return c * su - s * sw, s * su + c * sw

    def shape_hessian(self, x, y):
        """Second derivatives (sxx, sxy, syy) of the shape value."""
        u, w = self._local(x, y)
        m = self.n * (self.n - 1)
        suu = (m / self.a**2) * _even_power(u / self.a, self.n - 2)
        sww = (m / self.b**2) * _even_power(w / self.b, self.n - 2)
        c, s = math.cos(self.heading), math.sin(self.heading)
        sxx = c * c * suu + s * s * sww
        sxy = c * s * (suu - sww)
        syy = s * s * suu + c * c * sww
        return sxx, sxy, syy

    def contour(self, level: float, samples: int) -> np.ndarray:
        """Closed polyline tracing shape == level, shape (samples, 2).

        The start point is not repeated.  Levels at or below -1 have no
        curve (the shape never goes below -1) and are rejected.
        """
        if level <= -1.0:
            raise ValueError("contour level must be greater than -1")
        if samples < 16:
            raise ValueError("need at least 16 samples per contour")
        t = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
        r = (1.0 + level) ** (1.0 / self.n)
        e = 2.0 / self.n
        u = self.a * r * np.sign(np.cos(t)) * np.abs(np.cos(t)) ** e
        w = self.b * r * np.sign(np.sin(t)) * np.abs(np.sin(t)) ** e
        c, s = math.cos(self.heading), math.sin(self.heading)
        return np.column_stack(
            (self.x + c * u - s * w, self.y + s * u + c * w)
        )


def bound_rectangle(rect: RectObstacle, n: int) -> EllipseBound:
    """Bounding ellipse of order n whose boundary passes exactly through the
    rectangle corners: both semi-axes are the half-dimensions scaled by the
    corner-fit factor."""
    f = scale_factor(n)
    return EllipseBound(
        x=rect.x,
        y=rect.y,
        heading=rect.heading,
        a=f * rect.length / 2.0,
        b=f * rect.width / 2.0,
        n=int(n),
    )


@dataclass(frozen=True)
class FieldSpec:
    """Sum of repulsive potentials over a set of ellipse bounds.

    alpha scales each potential (its boundary value), slope_exp shapes the
    decay, eps_floor keeps the denominator positive when a query lands at a
    bound center, so trial evaluations inside obstacles stay finite.
    """

    bounds: tuple[EllipseBound, ...] = ()
    alpha: float = 1.0
    slope_exp: float = 1.0
    eps_floor: float = 1e-9

    def __post_init__(self) -> None:
        if self.alpha <= 0.0 or self.slope_exp <= 0.0:
            raise ValueError("alpha and slope_exp must be positive")
        if not 0.0 < self.eps_floor < 1e-3:
            raise ValueError("eps_floor must be a small positive number")
        object.__setattr__(self, "bounds", tuple(self.bounds))

    @property
    def empty(self) -> bool:
        return len(self.bounds) == 0

    def value(self, x, y):
        """Total potential at (x, y); broadcasts over arrays."""
        total = np.zeros_like(np.asarray(x, dtype=float) + np.asarray(y, dtype=float))
        for bound in self.bounds:
            denom = np.maximum(bound.shape(x, y) + 1.0, self.eps_floor)
            total = total + self.alpha * denom ** (-self.slope_exp)
        if total.ndim == 0:
            return float(total)
        return total

    def gradient(self, x, y):
        """(dP/dx, dP/dy).  Exact wherever the denominator floor is inactive;
        where it clamps, the clamped branch is constant so the gradient is 0."""
        gx = np.zeros_like(np.asarray(x, dtype=float) + np.asarray(y, dtype=float))
        gy = np.zeros_like(gx)
        for bound in self.bounds:
            s1 = bound.shape(x, y) + 1.0
            active = s1 > self.eps_floor
            denom = np.maximum(s1, self.eps_floor)
            dP = -self.alpha * self.slope_exp * denom ** (-self.slope_exp - 1.0)
            dP = np.where(active, dP, 0.0)
            sx, sy = bound.shape_gradient(x, y)
            gx = gx + dP * sx
            gy = gy + dP * sy
        if gx.ndim == 0:
            return float(gx), float(gy)
        return gx, gy

    def hessian(self, x, y):
        """Second derivatives (pxx, pxy, pyy) of the total potential."""
        pxx = np.zeros_like(np.asarray(x, dtype=float) + np.asarray(y, dtype=float))
        pxy = np.zeros_like(pxx)
        pyy = np.zeros_like(pxx)
        for bound in self.bounds:
            s1 = bound.shape(x, y) + 1.0
            active = s1 > self.eps_floor
            denom = np.maximum(s1, self.eps_floor)
            dP = -self.alpha * self.slope_exp * denom ** (-self.slope_exp - 1.0)
            d2P = (
                self.alpha
                * self.slope_exp
                * (self.slope_exp + 1.0)
                * denom ** (-self.slope_exp - 2.0)
            )
            dP = np.where(active, dP, 0.0)
            d2P = np.where(active, d2P, 0.0)
            sx, sy = bound.shape_gradient(x, y)
            sxx, sxy, syy = bound.shape_hessian(x, y)
            pxx = pxx + d2P * sx * sx + dP * sxx
            pxy = pxy + d2P * sx * sy + dP * sxy
            pyy = pyy + d2P * sy * sy + dP * syy
        if pxx.ndim == 0:
            return float(pxx), float(pxy), float(pyy)
        return pxx, pxy, pyy

    def hessian_matrix(self, x: float, y: float) -> np.ndarray:
        pxx, pxy, pyy = self.hessian(x, y)
        return np.array([[pxx, pxy], [pxy, pyy]])


def emit_contours(
    bound: EllipseBound, levels, samples_per_contour: int = 256
) -> list[np.ndarray]:
    """Polylines tracing the given shape levels of one bound."""
    return [bound.contour(float(level), samples_per_contour) for level in levels]


def contours_to_text(polylines) -> str:
    """Serialize polylines as 'x y' pairs, blank line between curves."""
    blocks = []
    for poly in polylines:
        blocks.append("\n".join(f"{p[0]!r} {p[1]!r}" for p in np.asarray(poly)))
    return "\n\n".join(blocks) + "\n"
