"""Synthetic planar LiDAR scenes: ray-cast rectangular vehicles with occlusion and range noise.

Randomness comes from SplitMix64 (Steele, Lea & Flood; public-domain reference
by S. Vigna), implemented here on Python integers so a given seed yields the
same sample stream on every platform. Gaussian samples use the Box-Muller
transform on top of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from lshapefit.geometry import Point2
from lshapefit.segmentation import Scan

MASK64 = (1 << 64) - 1
NO_HIT = -1


class SplitMix64:
    """SplitMix64: state += 0x9E3779B97F4A7C15, then two xor-shift-multiply rounds."""

    GOLDEN = 0x9E3779B97F4A7C15
    MIX1 = 0xBF58476D1CE4E5B9
    MIX2 = 0x94D049BB133111EB

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + self.GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * self.MIX1) & MASK64
        z = ((z ^ (z >> 27)) * self.MIX2) & MASK64
        return z ^ (z >> 31)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        """Sample from ``[lo, hi)`` with 53 bits of resolution."""
        return lo + (hi - lo) * ((self.next_u64() >> 11) * 2.0**-53)

    def below(self, n: int) -> int:
        return self.next_u64() % n

    def gauss(self) -> float:
        u1 = 1.0 - self.uniform()  # (0, 1], keeps log finite
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@dataclass(frozen=True)
class VehicleSpec:
    center: Point2
    heading: float
    length: float = 4.5
    width: float = 1.8

    def __post_init__(self):
        if not (self.length > 0 and self.width > 0):
            raise ValueError("vehicle length and width must be > 0")
        object.__setattr__(self, "center", Point2(*map(float, self.center)))

    def corners(self) -> np.ndarray:
        """Corners in counter-clockwise order, starting rear-right."""
        c, s = math.cos(self.heading), math.sin(self.heading)
        hl, hw = 0.5 * self.length, 0.5 * self.width
        local = np.array([(-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw)])
        rot = np.array([[c, -s], [s, c]])
        return local @ rot.T + np.asarray(self.center)

    def distance_to_perimeter(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        corners = self.corners()
        best = np.full(len(pts), np.inf)
        for a, b in zip(corners, np.roll(corners, -1, axis=0)):
            e = b - a
            t = np.clip(((pts - a) @ e) / (e @ e), 0.0, 1.0)
            foot = a + t[:, None] * e
            best = np.minimum(best, np.hypot(*(pts - foot).T))
        return best


@dataclass(frozen=True)
class SensorSpec:
    origin: Point2 = Point2(0.0, 0.0)
    fov_start: float = -0.5 * math.pi
    fov_end: float = 0.5 * math.pi
    angular_resolution: float = math.radians(0.25)
    max_range: float = 80.0
    range_noise_sigma: float = 0.02
    seed: int = 0

    def __post_init__(self):
        if not self.angular_resolution > 0:
            raise ValueError("angular_resolution must be > 0")
        if not self.fov_end > self.fov_start:
            raise ValueError("fov_end must exceed fov_start")
        if self.range_noise_sigma < 0:
            raise ValueError("range_noise_sigma must be >= 0")
        if not self.max_range > 0:
            raise ValueError("max_range must be > 0")
        object.__setattr__(self, "origin", Point2(*map(float, self.origin)))

    def bearings(self) -> np.ndarray:
        n = int(math.floor((self.fov_end - self.fov_start) / self.angular_resolution + 1e-9)) + 1
        return self.fov_start + np.arange(n) * self.angular_resolution


@dataclass(frozen=True)
class SimulatedScan:
    scan: Scan
    labels: np.ndarray  # vehicle index per point
    ranges: np.ndarray = field(repr=False)
    bearings: np.ndarray = field(repr=False)


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def raycast(sensor: SensorSpec, vehicles: Sequence[VehicleSpec], frame_id: int = 0) -> SimulatedScan:
    """Cast one ray per bearing; keep the nearest perimeter hit within range.

    Occlusion falls out of the nearest-hit rule. Range noise is added along
    each ray after the hit is found; rays that hit nothing are omitted.
    """
    bearings = sensor.bearings()
    ox, oy = sensor.origin
    dx, dy = np.cos(bearings), np.sin(bearings)

    best_t = np.full(len(bearings), np.inf)
    best_id = np.full(len(bearings), NO_HIT, dtype=np.int64)
    for vid, veh in enumerate(vehicles):
        corners = veh.corners()
        for a, b in zip(corners, np.roll(corners, -1, axis=0)):
            ex, ey = b - a
            ax, ay = a[0] - ox, a[1] - oy
            denom = _cross(dx, dy, ex, ey)
            with np.errstate(divide="ignore", invalid="ignore"):
                t = _cross(ax, ay, ex, ey) / denom
                s = _cross(ax, ay, dx, dy) / denom
            hit = (np.abs(denom) > 1e-12) & (t > 0) & (s >= 0) & (s <= 1) & (t < best_t)
            best_t = np.where(hit, t, best_t)
            best_id = np.where(hit, vid, best_id)

    keep = np.flatnonzero((best_id != NO_HIT) & (best_t <= sensor.max_range))
    rng = SplitMix64(sensor.seed)
    ranges = best_t[keep].copy()
    if sensor.range_noise_sigma > 0:
        noise = np.array([rng.gauss() for _ in range(len(keep))])
        ranges = ranges + sensor.range_noise_sigma * noise
    pos = ranges > 0
    keep, ranges = keep[pos], ranges[pos]
    pts = np.column_stack((ox + ranges * dx[keep], oy + ranges * dy[keep]))
    scan = Scan(pts, frame_id=frame_id, sensor_origin=sensor.origin)
    return SimulatedScan(scan, best_id[keep], ranges, bearings[keep])


def rects_overlap(a: VehicleSpec, b: VehicleSpec, margin: float = 0.0) -> bool:
    """Separating-axis test on the two rectangles, each inflated by ``margin``."""
    ca, cb = a.corners(), b.corners()
    for heading in (a.heading, a.heading + 0.5 * math.pi, b.heading, b.heading + 0.5 * math.pi):
        axis = np.array((math.cos(heading), math.sin(heading)))
        pa, pb = ca @ axis, cb @ axis
        if pa.max() + margin < pb.min() - margin or pb.max() + margin < pa.min() - margin:
            return False
    return True


PRESETS = ("single_L", "broadside_line", "two_vehicles_occluding", "parking_row", "random")


def make_scene(preset: str, seed: int = 0) -> tuple[SensorSpec, list[VehicleSpec]]:
    """Fixed test scenes by name; ``random`` draws a non-overlapping scene from ``seed``."""
    if preset == "single_L":
        return SensorSpec(seed=seed), [VehicleSpec(Point2(12.0, 0.0), math.pi / 4)]
    if preset == "broadside_line":
        # long side faces the sensor squarely; both short sides are back-facing
        return SensorSpec(seed=seed), [VehicleSpec(Point2(10.0, 0.0), math.pi / 2)]
    if preset == "two_vehicles_occluding":
        near = VehicleSpec(Point2(10.0, -1.0), math.radians(30))
        far = VehicleSpec(Point2(18.0, 1.5), math.radians(-20))
        return SensorSpec(seed=seed), [near, far]
    if preset == "parking_row":
        row = [VehicleSpec(Point2(9.0, y), 0.0) for y in (-7.5, -4.5, -1.5, 1.5, 4.5)]
        return SensorSpec(seed=seed), row
    if preset == "random":
        return _random_scene(seed)
    raise ValueError(f"unknown scene preset {preset!r}; choose from {', '.join(PRESETS)}")


def _random_scene(seed: int) -> tuple[SensorSpec, list[VehicleSpec]]:
    rng = SplitMix64(seed)
    sensor = SensorSpec(
        fov_start=-math.pi,
        fov_end=math.pi - math.radians(0.25),
        seed=rng.next_u64(),
    )
    count = 1 + rng.below(5)
    vehicles: list[VehicleSpec] = []
    for _ in range(200):
        if len(vehicles) == count:
            break
        cand = VehicleSpec(
            Point2(rng.uniform(0.0, 40.0), rng.uniform(-20.0, 20.0)),
            rng.uniform(-math.pi, math.pi),
        )
        if cand.distance_to_perimeter([sensor.origin])[0] < 3.0:
            continue
        if any(rects_overlap(cand, other, margin=0.5) for other in vehicles):
            continue
        vehicles.append(cand)
    return sensor, vehicles


def with_noise(sensor: SensorSpec, sigma: float, seed: int | None = None) -> SensorSpec:
    return replace(sensor, range_noise_sigma=sigma, seed=sensor.seed if seed is None else seed)


def side_hits(vehicle: VehicleSpec, points, tol: float = 1e-6) -> list[np.ndarray]:
    """For each of the four sides, the points lying on it (within ``tol``), ordered along the side."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    corners = vehicle.corners()
    out = []
    for a, b in zip(corners, np.roll(corners, -1, axis=0)):
        e = b - a
        t = ((pts - a) @ e) / (e @ e)
        foot = a + np.clip(t, 0.0, 1.0)[:, None] * e
        on = np.hypot(*(pts - foot).T) <= tol
        out.append(pts[on][np.argsort(t[on])])
    return out


def visible_corner(vehicle: VehicleSpec, origin=(0.0, 0.0)) -> np.ndarray:
    corners = vehicle.corners()
    return corners[np.argmin(np.hypot(*(corners - np.asarray(origin)).T))]


def random_l_scene(
    seed: int,
    sigma: float = 0.0,
    min_range: float = 8.0,
    max_range: float = 30.0,
    min_side_points: int = 5,
) -> tuple[VehicleSpec, SimulatedScan]:
    """One vehicle at a random pose showing two sides, all returns within ``max_range``.

    Poses are redrawn until each of two sides carries at least
    ``min_side_points`` noise-free returns.
    """
    rng = SplitMix64(seed)
    while True:
        r = rng.uniform(min_range, max_range - 3.0)
        bearing = rng.uniform(-1.0, 1.0)
        vehicle = VehicleSpec(Point2(r * math.cos(bearing), r * math.sin(bearing)), rng.uniform(-math.pi, math.pi))
        sensor = SensorSpec(range_noise_sigma=0.0, seed=rng.next_u64())
        exact = raycast(sensor, [vehicle])
        counts = sorted(len(h) for h in side_hits(vehicle, exact.scan.points, tol=1e-9))
        if counts[-2] < min_side_points:
            continue
        sim = raycast(with_noise(sensor, sigma), [vehicle]) if sigma > 0 else exact
        if np.hypot(*sim.scan.points.T).max() > max_range:
            continue
        return vehicle, sim
