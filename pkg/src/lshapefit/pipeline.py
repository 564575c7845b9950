"""Segment -> filter -> fit over one frame, and the fitting-time benchmark."""

from __future__ import annotations

import json
import math
import platform
import statistics
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from lshapefit.fitting import FitConfig, LShapeFit, baseline_angle_search, fit_cluster
from lshapefit.geometry import OrientedRect
from lshapefit.segmentation import Cluster, DbscanParams, Scan, dbscan

Clock = Callable[[], int]  # monotonic nanoseconds

METHODS = ("search_based", "baseline_angle")


@dataclass(frozen=True)
class ClusterFit:
    cluster_id: int
    indices: tuple[int, ...]
    fit: LShapeFit


@dataclass(frozen=True)
class Timing:
    segment_us: float
    fit_total_us: float
    per_cluster_us: tuple[float, ...]


@dataclass(frozen=True)
class FrameResult:
    frame_id: int
    fits: tuple[ClusterFit, ...]
    rejected_clusters: int
    timing: Timing
    clusters: tuple[Cluster, ...] = field(default=(), repr=False)

    def to_dict(self, include_timing: bool = True) -> dict:
        out = {
            "frame_id": self.frame_id,
            "rejected_clusters": self.rejected_clusters,
            "fits": [_cluster_fit_dict(cf) for cf in self.fits],
        }
        if include_timing:
            out["timing"] = {
                "segment_us": self.timing.segment_us,
                "fit_total_us": self.timing.fit_total_us,
                "per_cluster_us": list(self.timing.per_cluster_us),
            }
        return out

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), sort_keys=True, separators=(",", ":"))


def _rect_dict(rect: OrientedRect) -> dict:
    cx, cy = rect.center
    return {
        "edges": [list(e) for e in rect.edges],
        "heading": rect.heading,
        "center": [cx, cy],
        "length": rect.length,
        "width": rect.width,
        "corner_points": [list(p) for p in rect.corner_points],
    }


def _cluster_fit_dict(cf: ClusterFit) -> dict:
    fit = cf.fit
    vp = fit.vertexes
    return {
        "cluster_id": cf.cluster_id,
        "n_points": len(cf.indices),
        "degenerate": fit.degenerate,
        "vertexes": None if vp is None else {
            "v_a": list(vp.v_a),
            "v_b": list(vp.v_b),
            "via_special_case": vp.via_special_case,
        },
        "corner": {
            "point": list(fit.corner.corner),
            "err": fit.corner.err,
            "n_e1": fit.corner.n_e1,
            "n_e2": fit.corner.n_e2,
        },
        "rect": _rect_dict(fit.rect),
    }


def _us(ns: int) -> float:
    return max(ns, 0) / 1000.0


def run_pipeline(
    scan: Scan,
    dbscan_params: DbscanParams = DbscanParams(),
    fit_cfg: FitConfig = FitConfig(),
    clock: Clock = time.perf_counter_ns,
) -> FrameResult:
    """DBSCAN, drop noise and clusters below ``min_cluster_size``, fit the rest."""
    t0 = clock()
    clusters = dbscan(scan, dbscan_params)
    t1 = clock()
    fits = []
    per_cluster = []
    rejected = 0
    for cluster in clusters:
        if cluster.is_noise:
            continue
        if len(cluster) < fit_cfg.min_cluster_size:
            rejected += 1
            continue
        c0 = clock()
        fit = fit_cluster(cluster.points(scan), fit_cfg)
        per_cluster.append(_us(clock() - c0))
        fits.append(ClusterFit(cluster.label, cluster.indices, fit))
    t2 = clock()
    timing = Timing(_us(t1 - t0), _us(t2 - t1), tuple(per_cluster))
    return FrameResult(scan.frame_id, tuple(fits), rejected, timing, tuple(clusters))


@dataclass(frozen=True)
class BenchReport:
    method: str
    mean_ms: float
    stddev_ms: float
    n_frames: int
    environment: str

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "mean_ms": self.mean_ms,
            "stddev_ms": self.stddev_ms,
            "n_frames": self.n_frames,
            "environment": self.environment,
        }


def environment_descriptor() -> str:
    return f"{platform.python_implementation()} {platform.python_version()} / {platform.platform()} / {platform.machine()}"


def _fitter(method: str, fit_cfg: FitConfig, resolution: float):
    if method == "search_based":
        return lambda pts: fit_cluster(pts, fit_cfg)
    if method == "baseline_angle":
        return lambda pts: baseline_angle_search(pts, resolution)
    raise ValueError(f"unknown bench method {method!r}; choose from {', '.join(METHODS)}")


def bench(
    scans: Sequence[Scan],
    method: str = "search_based",
    repeats: int = 1,
    dbscan_params: DbscanParams = DbscanParams(),
    fit_cfg: FitConfig = FitConfig(),
    resolution: float = math.radians(0.5),
    include_segmentation: bool = False,
    clock: Clock = time.perf_counter_ns,
) -> BenchReport:
    """Per-frame wall time of the fitting stage, as mean and (population) stddev in ms.

    One warm-up pass over all scans is run and discarded. Each remaining
    ``(repeat, scan)`` pair contributes one sample, so ``n_frames`` is
    ``len(scans) * repeats``. Segmentation is timed only when
    ``include_segmentation`` is set; otherwise clusters are computed once up
    front.
    """
    if not scans:
        raise ValueError("bench needs at least one scan")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    fitter = _fitter(method, fit_cfg, resolution)

    def cluster_points(scan: Scan) -> list[np.ndarray]:
        return [
            c.points(scan)
            for c in dbscan(scan, dbscan_params)
            if not c.is_noise and len(c) >= fit_cfg.min_cluster_size
        ]

    prepared = None if include_segmentation else [cluster_points(s) for s in scans]

    def one_frame(i: int) -> int:
        t0 = clock()
        groups = cluster_points(scans[i]) if prepared is None else prepared[i]
        for pts in groups:
            fitter(pts)
        return clock() - t0

    for i in range(len(scans)):
        one_frame(i)
    samples_ms = [one_frame(i) / 1e6 for _ in range(repeats) for i in range(len(scans))]
    return BenchReport(
        method=method,
        mean_ms=statistics.fmean(samples_ms),
        stddev_ms=statistics.pstdev(samples_ms),
        n_frames=len(samples_ms),
        environment=environment_descriptor(),
    )


def run_frames(
    scans: Sequence[Scan],
    dbscan_params: DbscanParams = DbscanParams(),
    fit_cfg: FitConfig = FitConfig(),
    workers: Optional[int] = None,
) -> list[FrameResult]:
    """Run the pipeline over many frames; results come back in input order."""
    if not workers or workers <= 1 or len(scans) <= 1:
        return [run_pipeline(s, dbscan_params, fit_cfg) for s in scans]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, [(s, dbscan_params, fit_cfg) for s in scans]))


def _run_one(args) -> FrameResult:
    return run_pipeline(*args)
