"""Scan segmentation: DBSCAN (production path) and flat-kernel mean-shift.

Both routines are pure functions of the scan. Output is canonical: points are
ranked by ``(x, y, input index)``, border points shared by several clusters go
to the cluster of the lowest-ranked core point that reaches them, and cluster
ids follow the lowest input index each cluster contains. This makes the
partition independent of the order the scanner delivered the points in.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Optional

import numpy as np

from lshapefit.geometry import Point2, as_points

NOISE = -1


@dataclass(frozen=True)
class Scan:
    points: np.ndarray
    frame_id: int = 0
    sensor_origin: Point2 = Point2(0.0, 0.0)

    def __post_init__(self):
        pts = as_points(self.points).copy()
        if not np.all(np.isfinite(pts)):
            raise ValueError("scan contains non-finite coordinates")
        if self.frame_id < 0:
            raise ValueError("frame_id must be >= 0")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "sensor_origin", Point2(*map(float, self.sensor_origin)))

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scan):
            return NotImplemented
        return (
            self.frame_id == other.frame_id
            and self.sensor_origin == other.sensor_origin
            and np.array_equal(self.points, other.points)
        )

    __hash__ = None


@dataclass(frozen=True)
class Cluster:
    """Sorted index subset of a scan; ``label`` is a cluster id or ``NOISE``."""

    scan_frame: int
    indices: tuple[int, ...]
    label: int

    @property
    def is_noise(self) -> bool:
        return self.label == NOISE

    def __len__(self) -> int:
        return len(self.indices)

    def points(self, scan: Scan) -> np.ndarray:
        return scan.points[list(self.indices)]


@dataclass(frozen=True)
class DbscanParams:
    epsilon: float = 0.85
    min_pts: int = 6

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be a positive finite distance, got {self.epsilon}")
        if int(self.min_pts) != self.min_pts or self.min_pts < 1:
            raise ValueError(f"min_pts must be an integer >= 1, got {self.min_pts}")


@dataclass(frozen=True)
class MeanShiftParams:
    bandwidth: float = 6.0
    tol: float = 1e-4
    max_iter: int = 300
    merge_radius: Optional[float] = None  # defaults to bandwidth / 2

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValueError("bandwidth must be > 0")
        if self.max_iter < 1 or not self.tol > 0:
            raise ValueError("max_iter must be >= 1 and tol > 0")


def canonical_order(points: np.ndarray) -> np.ndarray:
    """Indices sorting points by x, then y, then input index."""
    n = len(points)
    return np.lexsort((np.arange(n), points[:, 1], points[:, 0]))


def labels_to_clusters(labels: np.ndarray, frame_id: int) -> list[Cluster]:
    """Group a per-point label array into clusters (ids renumbered by lowest index), noise last."""
    groups: dict[int, list[int]] = defaultdict(list)
    for idx, lab in enumerate(labels.tolist()):
        groups[lab].append(idx)
    noise = groups.pop(NOISE, None)
    ordered = sorted(groups.values(), key=lambda members: members[0])
    clusters = [Cluster(frame_id, tuple(members), cid) for cid, members in enumerate(ordered)]
    if noise:
        clusters.append(Cluster(frame_id, tuple(noise), NOISE))
    return clusters


class _GridIndex:
    """Uniform grid with cell size ``eps`` for fixed-radius neighbor queries."""

    def __init__(self, points: np.ndarray, eps: float):
        self.points = points
        self.eps_sq = eps * eps
        # slightly oversized cells keep every eps-neighbor in the 3x3 block despite rounding
        self.cells = np.floor(points / (eps * (1.0 + 1e-9))).astype(np.int64)
        buckets: dict[tuple[int, int], list[int]] = defaultdict(list)
        for i, (cx, cy) in enumerate(self.cells.tolist()):
            buckets[(cx, cy)].append(i)
        self.buckets = {k: np.array(v, dtype=np.int64) for k, v in buckets.items()}

    def neighbors(self, i: int) -> np.ndarray:
        cx, cy = self.cells[i]
        cand = [
            self.buckets[key]
            for key in ((cx + dx, cy + dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1))
            if key in self.buckets
        ]
        cand_idx = np.concatenate(cand)
        d = self.points[cand_idx] - self.points[i]
        # same float expression as the naive reference so both agree bit-for-bit
        close = d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] <= self.eps_sq
        return np.sort(cand_idx[close])


def dbscan_labels(points, params: DbscanParams) -> np.ndarray:
    """Per-point DBSCAN labels (``NOISE`` for noise), canonical but not renumbered."""
    pts = as_points(points)
    n = len(pts)
    labels = np.full(n, NOISE, dtype=np.int64)
    if n == 0:
        return labels

    # work in canonical rank space: rank r is the r-th point in (x, y, index) order
    order = canonical_order(pts)
    ranked = pts[order]
    index = _GridIndex(ranked, params.epsilon)
    neigh = [index.neighbors(r) for r in range(n)]
    core = np.array([len(nb) >= params.min_pts for nb in neigh])

    comp = np.full(n, NOISE, dtype=np.int64)
    n_comp = 0
    for r in range(n):
        if not core[r] or comp[r] != NOISE:
            continue
        comp[r] = n_comp
        stack = [r]
        while stack:
            cur = stack.pop()
            for nb in neigh[cur].tolist():
                if core[nb] and comp[nb] == NOISE:
                    comp[nb] = n_comp
                    stack.append(nb)
        n_comp += 1

    for r in range(n):
        if core[r]:
            continue
        # neigh[r] is sorted by rank, so the first core neighbor is the lowest-ranked claimant
        for nb in neigh[r].tolist():
            if core[nb]:
                comp[r] = comp[nb]
                break

    labels[order] = comp
    return labels


def dbscan(scan: Scan, params: DbscanParams) -> list[Cluster]:
    """Cluster a scan with DBSCAN (closed ``eps`` ball, the point counts itself).

    Returns the clusters ordered by id, followed by one ``NOISE`` cluster if
    any point is unreachable from a core point.
    """
    labels = dbscan_labels(scan.points, params)
    return labels_to_clusters(labels, scan.frame_id)


def mean_shift_labels(points, params: MeanShiftParams) -> np.ndarray:
    pts = as_points(points)
    n = len(pts)
    if n == 0:
        raise ValueError("mean-shift needs at least one point")
    bw_sq = params.bandwidth * params.bandwidth
    merge_r = params.bandwidth / 2.0 if params.merge_radius is None else params.merge_radius

    modes = np.empty_like(pts)
    for i in range(n):
        x = pts[i].copy()
        for _ in range(params.max_iter):
            d = pts - x
            window = pts[(d * d).sum(axis=1) <= bw_sq]
            shifted = window.mean(axis=0)
            step = math.hypot(*(shifted - x))
            x = shifted
            if step < params.tol:
                break
        modes[i] = x

    centers: list[np.ndarray] = []
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        for cid, c in enumerate(centers):
            if math.hypot(*(modes[i] - c)) < merge_r:
                labels[i] = cid
                break
        else:
            labels[i] = len(centers)
            centers.append(modes[i])
    return labels


def mean_shift(scan: Scan, bandwidth: float = 6.0, **kwargs) -> list[Cluster]:
    """Flat-kernel mean-shift. Every point lands in some cluster; there is no noise label."""
    if len(scan) == 0:
        raise ValueError("mean-shift needs at least one point")
    labels = mean_shift_labels(scan.points, MeanShiftParams(bandwidth=bandwidth, **kwargs))
    return labels_to_clusters(labels, scan.frame_id)
