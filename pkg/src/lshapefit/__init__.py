"""Search-based L-shape fitting of 2D laser range scans."""

from lshapefit.fitting import (
    CornerResult,
    FitConfig,
    LShapeFit,
    VertexPair,
    baseline_angle_search,
    find_vertexes,
    fit_cluster,
    fit_rectangle,
    locate_corner,
    ls_objective,
    oracle_corner,
)
from lshapefit.geometry import LineParams, OrientedRect, Point2
from lshapefit.segmentation import Cluster, DbscanParams, Scan, dbscan, mean_shift

__version__ = "0.1.0"

__all__ = [
    "Cluster",
    "CornerResult",
    "DbscanParams",
    "FitConfig",
    "LShapeFit",
    "LineParams",
    "OrientedRect",
    "Point2",
    "Scan",
    "VertexPair",
    "baseline_angle_search",
    "dbscan",
    "find_vertexes",
    "fit_cluster",
    "fit_rectangle",
    "locate_corner",
    "ls_objective",
    "mean_shift",
    "oracle_corner",
]
