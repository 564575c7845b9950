"""Planar primitives: points, lines, angles, projections and oriented rectangles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

# Separation below which two points are treated as the same point.
COINCIDENT_TOL = 1e-12


class GeometryError(ValueError):
    """Raised when a primitive receives degenerate input (coincident points, empty sets)."""


class Point2(NamedTuple):
    x: float
    y: float


class LineParams(NamedTuple):
    """The line ``a*x + b*y = c`` with unit normal ``(a, b)``."""

    a: float
    b: float
    c: float

    @classmethod
    def from_direction(cls, theta: float, c: float) -> "LineParams":
        return cls(math.cos(theta), math.sin(theta), c)

    def signed_distance(self, points) -> np.ndarray:
        pts = as_points(points)
        return pts @ np.array((self.a, self.b)) - self.c


def as_points(points) -> np.ndarray:
    """Coerce anything point-like into a float ``(n, 2)`` array."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise GeometryError(f"expected (n, 2) points, got shape {arr.shape}")
    return arr


def wrap_angle(theta: float) -> float:
    """Wrap an angle to ``[-pi, pi)``."""
    wrapped = math.fmod(theta + math.pi, 2.0 * math.pi)
    if wrapped < 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def dist_point_line(p, q1, q2) -> float:
    """Perpendicular distance from ``p`` to the infinite line through ``q1`` and ``q2``."""
    px, py = p
    x1, y1 = q1
    dx = q2[0] - x1
    dy = q2[1] - y1
    norm = math.hypot(dx, dy)
    if norm <= COINCIDENT_TOL:
        raise GeometryError("line endpoints coincide")
    return abs(dx * (py - y1) - dy * (px - x1)) / norm


def angle_at(vertex, p, q) -> float:
    """Angle in ``[0, pi]`` between rays ``vertex->p`` and ``vertex->q``.

    Uses ``atan2(|cross|, dot)``, which stays accurate near 0 and pi where
    ``acos`` of a normalized dot product loses precision.
    """
    vx, vy = vertex
    ux, uy = p[0] - vx, p[1] - vy
    wx, wy = q[0] - vx, q[1] - vy
    if math.hypot(ux, uy) <= COINCIDENT_TOL or math.hypot(wx, wy) <= COINCIDENT_TOL:
        raise GeometryError("angle vertex coincides with a ray point")
    return math.atan2(abs(ux * wy - uy * wx), ux * wx + uy * wy)


def project_extent(points, direction: float) -> tuple[float, float]:
    """Min and max of the projections of ``points`` onto ``(cos t, sin t)``."""
    pts = as_points(points)
    if len(pts) == 0:
        raise GeometryError("cannot project an empty point set")
    proj = pts @ np.array((math.cos(direction), math.sin(direction)))
    return float(proj.min()), float(proj.max())


@dataclass(frozen=True)
class OrientedRect:
    """Rectangle bounded by four support lines.

    ``edges[0]``/``edges[2]`` share the normal at ``theta1`` (min then max
    offset), ``edges[1]``/``edges[3]`` share the normal at ``theta1 + pi/2``.
    ``heading`` is the direction of the dominant visible edge.
    """

    edges: tuple[LineParams, LineParams, LineParams, LineParams]
    heading: float

    @classmethod
    def from_directions(cls, points, theta1: float, theta2: float, heading: float) -> "OrientedRect":
        lo1, hi1 = project_extent(points, theta1)
        lo2, hi2 = project_extent(points, theta2)
        edges = (
            LineParams.from_direction(theta1, lo1),
            LineParams.from_direction(theta2, lo2),
            LineParams.from_direction(theta1, hi1),
            LineParams.from_direction(theta2, hi2),
        )
        return cls(edges, wrap_angle(heading))

    @property
    def corner_points(self) -> tuple[Point2, Point2, Point2, Point2]:
        e1, e2, e3, e4 = self.edges
        return (
            _intersect(e1, e2),
            _intersect(e3, e2),
            _intersect(e3, e4),
            _intersect(e1, e4),
        )

    @property
    def extents(self) -> tuple[float, float]:
        """Side lengths along the first and second normal."""
        return self.edges[2].c - self.edges[0].c, self.edges[3].c - self.edges[1].c

    @property
    def length(self) -> float:
        return max(self.extents)

    @property
    def width(self) -> float:
        return min(self.extents)

    @property
    def center(self) -> Point2:
        e1, e2, e3, e4 = self.edges
        return _intersect(
            LineParams(e1.a, e1.b, 0.5 * (e1.c + e3.c)),
            LineParams(e2.a, e2.b, 0.5 * (e2.c + e4.c)),
        )

    def contains(self, points, tol: float = 1e-9) -> np.ndarray:
        """Boolean mask of points inside the rectangle (with slack ``tol``)."""
        pts = as_points(points)
        lo1 = self.edges[0].signed_distance(pts)
        lo2 = self.edges[1].signed_distance(pts)
        hi1 = self.edges[2].signed_distance(pts)
        hi2 = self.edges[3].signed_distance(pts)
        return (lo1 >= -tol) & (lo2 >= -tol) & (hi1 <= tol) & (hi2 <= tol)


def _intersect(l1: LineParams, l2: LineParams) -> Point2:
    det = l1.a * l2.b - l1.b * l2.a
    if abs(det) < 1e-15:
        raise GeometryError("parallel lines do not intersect")
    x = (l1.c * l2.b - l1.b * l2.c) / det
    y = (l1.a * l2.c - l1.c * l2.a) / det
    return Point2(x, y)


def rotate(points, angle: float, about: Sequence[float] = (0.0, 0.0)) -> np.ndarray:
    pts = as_points(points)
    c, s = math.cos(angle), math.sin(angle)
    origin = np.asarray(about, dtype=float)
    rel = pts - origin
    return np.column_stack((c * rel[:, 0] - s * rel[:, 1], s * rel[:, 0] + c * rel[:, 1])) + origin
