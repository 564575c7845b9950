"""Scan file formats.

CSV (single frame)::

    # comment lines and trailing "# ..." comments are ignored
    12.5,-0.25
    12.6,-0.20

One ``x,y`` pair per line in meters, ``.`` as decimal point, optional
whitespace around fields, blank lines skipped. The frame id is 0.

JSONL (multi-frame), one object per line::

    {"frame_id": 0, "points": [[12.5, -0.25], [12.6, -0.2]], "sensor_origin": [0.0, 0.0]}

``sensor_origin`` is optional. Writers emit the shortest repr of every float,
so write -> read round-trips bit-exactly.
"""

from __future__ import annotations

import json
import math
import re
from pathlib import Path
from typing import Iterable

import numpy as np

from lshapefit.segmentation import Scan

_NUMBER = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_NON_FINITE = re.compile(r"[+-]?(?:nan|inf|infinity)", re.IGNORECASE)

FORMATS = ("csv", "jsonl")


class ScanFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(where + message)
        self.line = line
        self.path = path


def guess_format(path) -> str:
    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix in ("jsonl", "ndjson"):
        return "jsonl"
    return "csv"


def _parse_number(token: str, lineno: int) -> float:
    token = token.strip()
    if _NON_FINITE.fullmatch(token):
        raise ScanFormatError(f"non-finite value {token!r}", lineno)
    if not _NUMBER.fullmatch(token):
        raise ScanFormatError(f"malformed number {token!r}", lineno)
    value = float(token)
    if not math.isfinite(value):
        raise ScanFormatError(f"non-finite value {token!r}", lineno)
    return value


def parse_csv(text: str) -> Scan:
    points = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise ScanFormatError(f"expected 'x,y', got {raw.strip()!r}", lineno)
        points.append((_parse_number(fields[0], lineno), _parse_number(fields[1], lineno)))
    return Scan(np.array(points, dtype=float).reshape(-1, 2))


def _as_pair(value, what: str, lineno: int) -> tuple[float, float]:
    if not (isinstance(value, list) and len(value) == 2):
        raise ScanFormatError(f"{what} must be a [x, y] pair", lineno)
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ScanFormatError(f"{what} holds a non-numeric value {v!r}", lineno)
        if not math.isfinite(v):
            raise ScanFormatError(f"{what} holds a non-finite value", lineno)
        out.append(float(v))
    return out[0], out[1]


def parse_jsonl(text: str) -> list[Scan]:
    scans = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ScanFormatError(f"invalid JSON ({exc.msg})", lineno) from None
        if not isinstance(obj, dict):
            raise ScanFormatError("each line must be a JSON object", lineno)
        frame_id = obj.get("frame_id")
        if isinstance(frame_id, bool) or not isinstance(frame_id, int) or frame_id < 0:
            raise ScanFormatError("frame_id must be an integer >= 0", lineno)
        pts = obj.get("points")
        if not isinstance(pts, list):
            raise ScanFormatError("points must be an array of [x, y] pairs", lineno)
        points = [_as_pair(p, "point", lineno) for p in pts]
        origin = _as_pair(obj["sensor_origin"], "sensor_origin", lineno) if "sensor_origin" in obj else (0.0, 0.0)
        scans.append(Scan(np.array(points, dtype=float).reshape(-1, 2), frame_id, origin))
    return scans


def read_scans(path, fmt: str | None = None) -> list[Scan]:
    """Read every frame in a scan file (a CSV file holds exactly one)."""
    fmt = fmt or guess_format(path)
    text = Path(path).read_text(encoding="utf-8")
    try:
        if fmt == "csv":
            return [parse_csv(text)]
        if fmt == "jsonl":
            return parse_jsonl(text)
    except ScanFormatError as exc:
        raise ScanFormatError(str(exc), exc.line, str(path)) from None
    raise ValueError(f"unknown scan format {fmt!r}")


def read_scan(path, fmt: str | None = None) -> Scan:
    scans = read_scans(path, fmt)
    if len(scans) != 1:
        raise ScanFormatError(f"expected one frame, found {len(scans)}; use read_scans", path=str(path))
    return scans[0]


def format_csv(scan: Scan) -> str:
    return "".join(f"{x!r},{y!r}\n" for x, y in scan.points.tolist())


def format_jsonl(scans: Iterable[Scan]) -> str:
    lines = []
    for scan in scans:
        obj = {
            "frame_id": scan.frame_id,
            "points": scan.points.tolist(),
            "sensor_origin": list(scan.sensor_origin),
        }
        lines.append(json.dumps(obj, separators=(",", ":")))
    return "".join(line + "\n" for line in lines)


def write_scans(path, scans: list[Scan], fmt: str | None = None) -> None:
    fmt = fmt or guess_format(path)
    if fmt == "csv":
        if len(scans) != 1:
            raise ValueError("CSV holds a single frame; use jsonl for several")
        text = format_csv(scans[0])
    elif fmt == "jsonl":
        text = format_jsonl(scans)
    else:
        raise ValueError(f"unknown scan format {fmt!r}")
    Path(path).write_text(text, encoding="utf-8")
