"""Search-based L-shape fitting.

A cluster is fitted in three stages: two L-shape vertexes are found from the
axis-extreme points (``find_vertexes``), the corner is the scan point that
minimizes the summed point-to-edge distance against those vertexes
(``locate_corner``), and the rectangle is the support box aligned with the
better-populated edge (``fit_rectangle``). ``fit_cluster`` chains the stages and
falls back to a line fit when a cluster shows only one edge.

``oracle_corner`` (exhaustive corner search) and ``baseline_angle_search``
(angle-grid rectangle fit) exist for verification and comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from lshapefit.geometry import (
    COINCIDENT_TOL,
    GeometryError,
    LineParams,
    OrientedRect,
    Point2,
    angle_at,
    as_points,
)
from lshapefit.segmentation import canonical_order

HALF_PI = 0.5 * math.pi
# distances / totals closer than these count as ties, so tie rules survive rounding
DIST_TIE_TOL = 1e-12
ERR_TIE_TOL = 1e-10


class FitError(ValueError):
    """Base class for fitting failures."""


class ClusterTooSmall(FitError):
    pass


class DegenerateCluster(FitError):
    """The cluster does not present a usable L (collinear, single blob, no right angle)."""


@dataclass(frozen=True)
class FitConfig:
    delta_theta0: float = math.pi / 8
    vertex_k: int = 3
    superpose_threshold: float = 0.3
    spread_threshold: float = 0.5
    min_cluster_size: int = 4

    def __post_init__(self):
        if not 0 < self.delta_theta0 <= HALF_PI:
            raise ValueError(f"delta_theta0 must lie in (0, pi/2], got {self.delta_theta0}")
        if int(self.vertex_k) != self.vertex_k or self.vertex_k < 1:
            raise ValueError(f"vertex_k must be an integer >= 1, got {self.vertex_k}")
        if not (self.superpose_threshold > 0 and self.spread_threshold > 0):
            raise ValueError("superpose_threshold and spread_threshold must be > 0")
        if int(self.min_cluster_size) != self.min_cluster_size or self.min_cluster_size < 1:
            raise ValueError(f"min_cluster_size must be an integer >= 1, got {self.min_cluster_size}")


@dataclass(frozen=True)
class VertexPair:
    v_a: Point2
    v_b: Point2
    via_special_case: bool = False

    def __post_init__(self):
        if math.dist(self.v_a, self.v_b) <= 1e-9:
            raise DegenerateCluster("L-shape vertexes coincide")


@dataclass(frozen=True)
class CornerResult:
    corner: Point2
    err: float
    n_e1: int
    n_e2: int
    corner_index: int = -1


@dataclass(frozen=True)
class LShapeFit:
    vertexes: Optional[VertexPair]  # None only for a cluster collapsed onto one point
    corner: CornerResult
    rect: OrientedRect
    degenerate: bool = False


def _check_size(pts: np.ndarray, min_size: int) -> None:
    if len(pts) < min_size:
        raise ClusterTooSmall(f"cluster has {len(pts)} points, need at least {min_size}")


def _orthogonal_pair(sides: dict[str, np.ndarray], threshold: float) -> Optional[tuple[str, str]]:
    """Candidates to use when extreme points are spread along an axis-aligned arm.

    A side is flagged when its ``k`` extreme points spread more than
    ``threshold`` across the other axis. Flags on one axis only select the
    two candidates of the other axis; flags on both axes are ambiguous and
    select nothing.
    """
    spread = {
        "L": np.ptp(sides["L"][:, 1]),
        "R": np.ptp(sides["R"][:, 1]),
        "U": np.ptp(sides["U"][:, 0]),
        "D": np.ptp(sides["D"][:, 0]),
    }
    flagged = {name for name, s in spread.items() if s > threshold}
    x_flag = bool(flagged & {"L", "R"})
    y_flag = bool(flagged & {"U", "D"})
    if x_flag and y_flag:
        return None
    if x_flag:
        return "U", "D"
    if y_flag:
        return "L", "R"
    return None


def find_vertexes(points, cfg: FitConfig = FitConfig()) -> VertexPair:
    """Pick the two far ends of the L from the four axis-extreme candidates.

    Each candidate is the centroid of the ``k`` most extreme points along
    -x, +x, +y, -y. The two closest candidates are normally the same arm tip
    seen from two axes; they are merged into the first vertex and, of the
    remaining two, the one subtending the smaller angle is the second (the
    other is the corner side). Arms lying along the axes are caught two
    ways: if no pair is within ``superpose_threshold`` and the extreme points
    of some side are widely spread, the orthogonal candidates are returned
    directly; and if the merged vertex turns out to hold the widest angle of
    the three, it is the corner and the other two candidates are returned.
    """
    pts = as_points(points)
    _check_size(pts, cfg.min_cluster_size)
    n = len(pts)
    k = min(cfg.vertex_k, n)
    idx = np.arange(n)
    by_x = np.lexsort((idx, pts[:, 1], pts[:, 0]))
    by_y = np.lexsort((idx, pts[:, 0], pts[:, 1]))
    sides = {
        "L": pts[by_x[:k]],
        "R": pts[by_x[n - k:]],
        "U": pts[by_y[n - k:]],
        "D": pts[by_y[:k]],
    }
    cand = {name: s.mean(axis=0) for name, s in sides.items()}
    names = list(cand)
    if max(math.dist(cand[a], cand[b]) for a in names for b in names) <= 1e-9:
        raise DegenerateCluster("all extreme candidates coincide")

    pairs = [(a, b) for i, a in enumerate(names) for b in names[i + 1:]]
    s1, s2 = min(pairs, key=lambda ab: math.dist(cand[ab[0]], cand[ab[1]]))
    if math.dist(cand[s1], cand[s2]) > cfg.superpose_threshold:
        special = _orthogonal_pair(sides, cfg.spread_threshold)
        if special is not None and math.dist(cand[special[0]], cand[special[1]]) > 1e-9:
            return VertexPair(Point2(*cand[special[0]]), Point2(*cand[special[1]]), True)

    v_a = 0.5 * (cand[s1] + cand[s2])
    r1, r2 = (cand[name] for name in names if name not in (s1, s2))

    if math.dist(r1, r2) <= COINCIDENT_TOL or math.dist(v_a, r2) <= COINCIDENT_TOL:
        v_b = r1
    elif math.dist(v_a, r1) <= COINCIDENT_TOL:
        v_b = r2
    else:
        ang1, ang2 = angle_at(r1, v_a, r2), angle_at(r2, v_a, r1)
        if angle_at(v_a, r1, r2) > max(ang1, ang2):
            # merged pair sits at the corner (axis-aligned arms): the other two are the tips
            return VertexPair(Point2(*r1), Point2(*r2), True)
        # the candidate with the larger angle is the corner side of the L
        v_b = r2 if ang1 > ang2 else r1
    if math.dist(v_a, v_b) <= 1e-9:
        raise DegenerateCluster("vertex search collapsed to a single point")
    return VertexPair(Point2(*v_a), Point2(*v_b), False)


def _line_distances(pts: np.ndarray, q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    d = q2 - q1
    rel = pts - q1
    return np.abs(d[0] * rel[:, 1] - d[1] * rel[:, 0]) / math.hypot(d[0], d[1])


def corner_candidates(points, vp: VertexPair, delta_theta0: float) -> np.ndarray:
    """Indices of points whose angle toward the two vertexes is within ``delta_theta0`` of 90 deg."""
    pts = as_points(points)
    u = np.asarray(vp.v_a) - pts
    w = np.asarray(vp.v_b) - pts
    valid = (np.hypot(u[:, 0], u[:, 1]) > COINCIDENT_TOL) & (np.hypot(w[:, 0], w[:, 1]) > COINCIDENT_TOL)
    ang = np.arctan2(np.abs(u[:, 0] * w[:, 1] - u[:, 1] * w[:, 0]), (u * w).sum(axis=1))
    ok = valid & (ang >= HALF_PI - delta_theta0) & (ang <= HALF_PI + delta_theta0)
    return np.flatnonzero(ok)


def locate_corner(points, vp: VertexPair, cfg: FitConfig = FitConfig()) -> CornerResult:
    """Choose the corner point minimizing the summed distance of all other points to the two edges.

    Every other point is charged to the nearer of the lines ``V_A-P`` and
    ``P-V_B`` (ties go to the first); the candidate with the smallest total
    wins, later candidates winning exact ties.
    """
    pts = as_points(points)
    _check_size(pts, cfg.min_cluster_size)
    n = len(pts)
    va = np.asarray(vp.v_a, dtype=float)
    vb = np.asarray(vp.v_b, dtype=float)

    best: Optional[CornerResult] = None
    err_min = math.inf
    others = np.ones(n, dtype=bool)
    for i in corner_candidates(pts, vp, cfg.delta_theta0).tolist():
        p = pts[i]
        dis1 = _line_distances(pts, va, p)
        dis2 = _line_distances(pts, p, vb)
        others[i] = False
        on_first = (dis1 <= dis2 + DIST_TIE_TOL)[others]
        err = float(np.where(on_first, dis1[others], dis2[others]).sum())
        others[i] = True
        if err <= err_min + ERR_TIE_TOL:
            err_min = err
            n1 = int(on_first.sum())
            best = CornerResult(Point2(*p), err, n1, n - 1 - n1, i)
    if best is None:
        raise DegenerateCluster("no point forms a near-right angle with the vertexes")
    return best


def oracle_corner(points, vp: VertexPair) -> CornerResult:
    """Exhaustive corner search: every point against every candidate, no angle test.

    Used only to cross-check ``locate_corner`` and written independently of
    it: all ``(candidate, point)`` distances come from one dense matrix, each
    measured to the foot of the perpendicular rather than by a cross product.
    """
    pts = as_points(points)
    n = len(pts)
    if n < 2:
        raise ClusterTooSmall("oracle needs at least two points")
    a = np.asarray(vp.v_a, dtype=float)
    b = np.asarray(vp.v_b, dtype=float)

    def perp_matrix(origin, direction):
        # row i: distance of every point to the line origin[i] + t * direction[i]
        rel = pts[None, :, :] - origin
        t = (rel * direction).sum(axis=2) / (direction * direction).sum(axis=2)
        foot = origin + t[:, :, None] * direction
        return np.hypot(*np.moveaxis(pts[None, :, :] - foot, 2, 0))

    cand = pts[:, None, :]
    usable = (np.hypot(*(a - pts).T) > COINCIDENT_TOL) & (np.hypot(*(b - pts).T) > COINCIDENT_TOL)
    with np.errstate(invalid="ignore", divide="ignore"):
        d1 = perp_matrix(a[None, None, :], cand - a)
        d2 = perp_matrix(cand, b[None, None, :] - cand)
    first = d1 <= d2 + DIST_TIE_TOL
    np.fill_diagonal(first, False)
    second = ~first
    np.fill_diagonal(second, False)
    errs = np.where(first, d1, 0.0).sum(axis=1) + np.where(second, d2, 0.0).sum(axis=1)
    n1 = first.sum(axis=1)

    best = None
    for i in np.flatnonzero(usable).tolist():
        if best is None or errs[i] <= best.err + ERR_TIE_TOL:
            best = CornerResult(Point2(*pts[i]), float(errs[i]), int(n1[i]), n - 1 - int(n1[i]), i)
    if best is None:
        raise DegenerateCluster("every point coincides with a vertex")
    return best


def fit_rectangle(points, vp: VertexPair, cr: CornerResult) -> OrientedRect:
    """Support-line rectangle aligned with the edge that carries more points."""
    pts = as_points(points)
    px, py = cr.corner
    if cr.n_e1 > cr.n_e2:
        dx, dy = vp.v_a[0] - px, vp.v_a[1] - py
        if math.hypot(dx, dy) <= COINCIDENT_TOL:
            raise DegenerateCluster("corner coincides with vertex A")
        theta1 = math.atan2(dy, dx)
        theta2 = theta1 + HALF_PI
        heading = theta1
    else:
        dx, dy = px - vp.v_b[0], py - vp.v_b[1]
        if math.hypot(dx, dy) <= COINCIDENT_TOL:
            raise DegenerateCluster("corner coincides with vertex B")
        theta2 = math.atan2(dy, dx)
        theta1 = theta2 + HALF_PI
        heading = theta2
    return OrientedRect.from_directions(pts, theta1, theta2, heading)


def _line_fallback(pts: np.ndarray, vp: Optional[VertexPair]) -> LShapeFit:
    if vp is None:
        # vertex search failed: use the first canonical point and the point farthest from it
        first = pts[0]
        far = int(np.argmax(np.hypot(*(pts - first).T)))
        if math.dist(first, pts[far]) > 1e-9:
            vp = VertexPair(Point2(*first), Point2(*pts[far]))
    if vp is None:
        theta = 0.0
        err = 0.0
        corner_i = 0
    else:
        va = np.asarray(vp.v_a)
        vb = np.asarray(vp.v_b)
        theta = math.atan2(vb[1] - va[1], vb[0] - va[0])
        corner_i = int(np.argmin(np.hypot(*(pts - vb).T)))
        dist = _line_distances(pts, va, vb)
        err = float(dist.sum() - dist[corner_i])
    rect = OrientedRect.from_directions(pts, theta + HALF_PI, theta, theta)
    corner = CornerResult(Point2(*pts[corner_i]), err, len(pts) - 1, 0, corner_i)
    return LShapeFit(vp, corner, rect, degenerate=True)


def fit_cluster(points, cfg: FitConfig = FitConfig()) -> Optional[LShapeFit]:
    """Fit one cluster; returns ``None`` for clusters below ``min_cluster_size``.

    Points are put in canonical ``(x, y, index)`` order first, so the result
    does not depend on the order of the input. ``corner.corner_index`` refers
    to the caller's ordering.
    """
    raw = as_points(points)
    if len(raw) < cfg.min_cluster_size:
        return None
    order = canonical_order(raw)
    pts = raw[order]
    vp: Optional[VertexPair] = None
    try:
        vp = find_vertexes(pts, cfg)
        cr = locate_corner(pts, vp, cfg)
        if cr.n_e1 == 0 or cr.n_e2 == 0:
            raise DegenerateCluster("one edge of the L is empty")
        rect = fit_rectangle(pts, vp, cr)
        fit = LShapeFit(vp, cr, rect, degenerate=False)
    except (DegenerateCluster, GeometryError):
        fit = _line_fallback(pts, vp)
    c = fit.corner
    remapped = CornerResult(c.corner, c.err, c.n_e1, c.n_e2, int(order[c.corner_index]))
    return LShapeFit(fit.vertexes, remapped, fit.rect, fit.degenerate)


def edge_partition(points, vp: VertexPair, corner_index: int) -> np.ndarray:
    """Per-point edge labels (1 or 2) for a chosen corner; the corner itself gets label 1."""
    pts = as_points(points)
    p = pts[corner_index]
    dis1 = _line_distances(pts, np.asarray(vp.v_a, dtype=float), p)
    dis2 = _line_distances(pts, p, np.asarray(vp.v_b, dtype=float))
    labels = np.where(dis1 <= dis2 + DIST_TIE_TOL, 1, 2)
    labels[corner_index] = 1
    return labels


def ls_objective(points, partition, theta: float, c1: float, c2: float) -> float:
    """Two-line least-squares objective ``||A u1|| + ||B u2||``.

    Points labelled 1 are measured against ``x cos t + y sin t = c1``, points
    labelled 2 against ``-x sin t + y cos t = c2``; the result is the sum of
    the Euclidean norms of the two residual vectors.
    """
    pts = as_points(points)
    labels = np.asarray(partition)
    if labels.shape != (len(pts),) or not np.isin(labels, (1, 2)).all():
        raise ValueError("partition must label every point with 1 or 2")
    c, s = math.cos(theta), math.sin(theta)
    first = pts[labels == 1]
    second = pts[labels == 2]
    phi = first[:, 0] * c + first[:, 1] * s - c1
    psi = -second[:, 0] * s + second[:, 1] * c - c2
    return float(np.linalg.norm(phi) + np.linalg.norm(psi))


def fit_objective(points, vp: VertexPair, cr: CornerResult, rect: OrientedRect) -> float:
    """Evaluate ``ls_objective`` for a fitted L.

    The partition comes from the corner; the two lines are the rectangle
    sides that meet nearest the corner.
    """
    pts = as_points(points)
    labels = edge_partition(pts, vp, cr.corner_index)
    corner = np.asarray(cr.corner)
    e1, e2, e3, e4 = rect.edges

    def side_through_corner(a: LineParams, b: LineParams) -> LineParams:
        off = corner @ np.array((a.a, a.b))
        return a if abs(off - a.c) <= abs(off - b.c) else b

    # edge-1 points lie along V_A - P; pick the normal most perpendicular to that arm
    arm = np.asarray(vp.v_a) - corner
    n1 = np.array((e1.a, e1.b))
    if abs(arm @ n1) <= abs(arm @ np.array((e2.a, e2.b))):
        line1 = side_through_corner(e1, e3)
        line2 = side_through_corner(e2, e4)
    else:
        line1 = side_through_corner(e2, e4)
        line2 = side_through_corner(e1, e3)
    theta = math.atan2(line1.b, line1.a)
    # express line 2 in the (-sin t, cos t) normal convention
    sign = line2.a * -math.sin(theta) + line2.b * math.cos(theta)
    c2 = line2.c if sign > 0 else -line2.c
    return ls_objective(pts, labels, theta, line1.c, c2)


def baseline_angle_search(points, resolution: float = math.radians(0.5)) -> OrientedRect:
    """Angle-grid rectangle fit: minimize summed distance to the nearest support edge.

    Scans ``theta`` over ``[0, pi/2)`` in steps of ``resolution``; cost grows
    linearly with the number of grid angles.
    """
    pts = as_points(points)
    _check_size(pts, 4)
    if not resolution > 0:
        raise ValueError("resolution must be > 0")
    n_steps = max(1, math.ceil(HALF_PI / resolution - 1e-9))
    best_theta = 0.0
    best_cost = math.inf
    for step in range(n_steps):
        theta = step * resolution
        c, s = math.cos(theta), math.sin(theta)
        c1 = pts[:, 0] * c + pts[:, 1] * s
        c2 = -pts[:, 0] * s + pts[:, 1] * c
        d1 = np.minimum(c1 - c1.min(), c1.max() - c1)
        d2 = np.minimum(c2 - c2.min(), c2.max() - c2)
        cost = float(np.minimum(d1, d2).sum())
        if cost < best_cost:
            best_cost = cost
            best_theta = theta
    return OrientedRect.from_directions(pts, best_theta, best_theta + HALF_PI, best_theta)
