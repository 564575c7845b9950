"""Standalone SVG rendering of a segmented / fitted frame.

Cluster points are drawn one color per cluster (noise in gray), fitted
rectangles as blue outlined polygons, L-shape vertexes as stars and corners
as diamonds. Coordinates are printed with a fixed number of decimals, so the
same input always renders to the same bytes.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from lshapefit.pipeline import ClusterFit, FrameResult
from lshapefit.segmentation import Cluster, Scan

PALETTE = (
    "#e6194b", "#3cb44b", "#f58231", "#911eb4", "#46f0f0",
    "#f032e6", "#9a6324", "#808000", "#008080", "#000075",
)
NOISE_COLOR = "#a0a0a0"
FIT_COLOR = "#1f4fd8"
CORNER_COLOR = "#d62728"

WIDTH = 800
HEIGHT = 800
MARGIN = 40


def _fmt(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


class _Frame:
    """Maps world meters to SVG pixels, y axis pointing up, equal aspect."""

    def __init__(self, pts: np.ndarray):
        if len(pts):
            lo, hi = pts.min(axis=0), pts.max(axis=0)
        else:
            lo, hi = np.array((-1.0, -1.0)), np.array((1.0, 1.0))
        span = max(float((hi - lo).max()), 1.0)
        mid = 0.5 * (lo + hi)
        self.lo = mid - 0.55 * span
        self.scale = (min(WIDTH, HEIGHT) - 2 * MARGIN) / (1.1 * span)

    def xy(self, p) -> tuple[str, str]:
        x = MARGIN + (p[0] - self.lo[0]) * self.scale
        y = HEIGHT - MARGIN - (p[1] - self.lo[1]) * self.scale
        return _fmt(x), _fmt(y)


def _star(frame: _Frame, p, r: float = 7.0) -> str:
    cx, cy = (float(v) for v in frame.xy(p))
    pts = []
    for k in range(10):
        rad = r if k % 2 == 0 else 0.45 * r
        a = -math.pi / 2 + k * math.pi / 5
        pts.append(f"{_fmt(cx + rad * math.cos(a))},{_fmt(cy + rad * math.sin(a))}")
    return "M" + " L".join(pts) + " Z"


def _diamond(frame: _Frame, p, r: float = 6.0) -> str:
    cx, cy = (float(v) for v in frame.xy(p))
    return (
        f"M{_fmt(cx)},{_fmt(cy - r)} L{_fmt(cx + r)},{_fmt(cy)} "
        f"L{_fmt(cx)},{_fmt(cy + r)} L{_fmt(cx - r)},{_fmt(cy)} Z"
    )


def _axes(frame: _Frame) -> list[str]:
    x0, y0 = MARGIN, HEIGHT - MARGIN
    out = [
        '<g id="axes" stroke="#000000" stroke-width="1">',
        f'<line x1="{x0}" y1="{y0}" x2="{WIDTH - MARGIN}" y2="{y0}"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{MARGIN}"/>',
        "</g>",
    ]
    lo = frame.lo
    hi = lo + (WIDTH - 2 * MARGIN) / frame.scale
    out.append(
        f'<text x="{x0}" y="{y0 + 18}" font-size="11" font-family="monospace">'
        f"x [{_fmt(lo[0])}, {_fmt(hi[0])}] m  y [{_fmt(lo[1])}, {_fmt(hi[1])}] m</text>"
    )
    return out


def render_svg(
    scan: Scan,
    clusters: Sequence[Cluster] = (),
    fits: Iterable[ClusterFit] = (),
    title: Optional[str] = None,
) -> str:
    fits = list(fits)
    extent = [scan.points, np.array([scan.sensor_origin])]
    for cf in fits:
        extent.append(np.array(cf.fit.rect.corner_points))
    frame = _Frame(np.concatenate(extent))

    body: list[str] = []
    if title:
        body.append(f'<title>{escape(title)}</title>')
    body.extend(_axes(frame))

    labelled = np.full(len(scan), -2, dtype=np.int64)
    for c in clusters:
        labelled[list(c.indices)] = c.label
    body.append('<g id="points" stroke="none">')
    for i, p in enumerate(scan.points.tolist()):
        lab = int(labelled[i])
        color = NOISE_COLOR if lab < 0 else PALETTE[lab % len(PALETTE)]
        x, y = frame.xy(p)
        body.append(f'<circle cx="{x}" cy="{y}" r="2" fill="{color}"/>')
    body.append("</g>")

    body.append(f'<g id="fits" fill="none" stroke="{FIT_COLOR}" stroke-width="1.5">')
    for cf in fits:
        pts = " ".join(",".join(frame.xy(p)) for p in cf.fit.rect.corner_points)
        cls = "fit degenerate" if cf.fit.degenerate else "fit"
        body.append(f'<polygon class="{cls}" data-cluster="{cf.cluster_id}" points="{pts}"/>')
    body.append("</g>")

    body.append('<g id="keypoints" stroke="none">')
    for cf in fits:
        vp = cf.fit.vertexes
        if vp is not None:
            for v in (vp.v_a, vp.v_b):
                body.append(f'<path class="vertex" d="{_star(frame, v)}" fill="{FIT_COLOR}"/>')
        if not cf.fit.degenerate:
            body.append(f'<path class="corner" d="{_diamond(frame, cf.fit.corner.corner)}" fill="{CORNER_COLOR}"/>')
    body.append("</g>")

    ox, oy = frame.xy(scan.sensor_origin)
    body.append(f'<circle id="sensor" cx="{ox}" cy="{oy}" r="4" fill="none" stroke="#000000"/>')

    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">\n'
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def plot_svg(result: FrameResult | Sequence[Cluster], scan: Scan, path) -> Path:
    """Write the SVG for a pipeline result, or for a bare segmentation, to ``path``."""
    if isinstance(result, FrameResult):
        svg = render_svg(scan, result.clusters, result.fits, title=f"frame {result.frame_id}")
    else:
        svg = render_svg(scan, list(result), (), title=f"frame {scan.frame_id} segmentation")
    out = Path(path)
    out.write_text(svg, encoding="utf-8")
    return out
