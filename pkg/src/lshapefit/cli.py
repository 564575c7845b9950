"""Command line interface: ``lshapefit {gen,segment,fit,bench,plot}``.

Exit codes: 0 success, 2 bad command line, 3 malformed scan file,
4 invalid configuration, 5 file system error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from lshapefit import scanio
from lshapefit.config import ConfigError, PipelineConfig, load_config
from lshapefit.pipeline import METHODS, bench, run_frames, run_pipeline
from lshapefit.plot import plot_svg
from lshapefit.scansim import PRESETS, make_scene, raycast, with_noise
from lshapefit.segmentation import dbscan, mean_shift

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_CONFIG = 4
EXIT_IO = 5


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("configuration (flags override --config)")
    g.add_argument("--config", help="key = value configuration file")
    g.add_argument("--epsilon", type=float, help="DBSCAN radius [m]")
    g.add_argument("--min-pts", dest="min_pts", type=int, help="DBSCAN density threshold")
    g.add_argument("--delta-theta0", dest="delta_theta0", type=float, help="corner angle half-width [rad]")
    g.add_argument("--vertex-k", dest="vertex_k", type=int, help="points averaged per vertex candidate")
    g.add_argument("--superpose-threshold", dest="superpose_threshold", type=float)
    g.add_argument("--spread-threshold", dest="spread_threshold", type=float)
    g.add_argument("--min-cluster-size", dest="min_cluster_size", type=int)
    g.add_argument("--baseline-resolution", dest="baseline_resolution", type=float, help="[rad]")


def _config(args) -> PipelineConfig:
    keys = (
        "epsilon", "min_pts", "delta_theta0", "vertex_k", "superpose_threshold",
        "spread_threshold", "min_cluster_size", "baseline_resolution",
    )
    return load_config(args.config, {k: getattr(args, k) for k in keys})


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", help="scan file (.csv single frame, .jsonl multi-frame)")
    p.add_argument("--format", choices=scanio.FORMATS, help="override format detection")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lshapefit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="simulate a scene and write its scans")
    p.add_argument("--scene", choices=PRESETS, default="single_L")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, help="range noise sigma [m] (default: preset's)")
    p.add_argument("--frames", type=int, default=1, help="frames to generate (random: one scene per frame)")
    p.add_argument("--labels", help="also write per-point vehicle ids as JSONL")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--format", choices=scanio.FORMATS)

    p = sub.add_parser("segment", help="cluster scans; one line per cluster")
    _add_input(p)
    p.add_argument("--method", choices=("dbscan", "meanshift"), default="dbscan")
    p.add_argument("--bandwidth", type=float, default=6.0, help="mean-shift window [m]")
    _add_config_flags(p)

    p = sub.add_parser("fit", help="segment and fit; one line per detection")
    _add_input(p)
    p.add_argument("--json", action="store_true", help="print full frame results as JSONL")
    p.add_argument("--workers", type=int, default=1)
    _add_config_flags(p)

    p = sub.add_parser("bench", help="time the fitting stage")
    _add_input(p)
    p.add_argument("--method", choices=METHODS + ("both",), default="both")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--include-segmentation", action="store_true")
    p.add_argument("--json", action="store_true")
    _add_config_flags(p)

    p = sub.add_parser("plot", help="render one frame as SVG")
    _add_input(p)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--frame", type=int, help="frame_id to plot (default: first)")
    p.add_argument("--segmentation-only", action="store_true")
    _add_config_flags(p)
    return parser


def _cmd_gen(args) -> int:
    if args.frames < 1:
        raise ConfigError("--frames must be >= 1")
    scans, labels = [], []
    for f in range(args.frames):
        sensor, vehicles = make_scene(args.scene, args.seed + f)
        if args.sigma is not None:
            if args.sigma < 0:
                raise ConfigError("--sigma must be >= 0")
            sensor = with_noise(sensor, args.sigma)
        sim = raycast(sensor, vehicles, frame_id=f)
        scans.append(sim.scan)
        labels.append(sim.labels.tolist())
    fmt = args.format or scanio.guess_format(args.output)
    if fmt == "csv" and len(scans) > 1:
        raise ConfigError("CSV holds one frame; write .jsonl for --frames > 1")
    scanio.write_scans(args.output, scans, fmt)
    if args.labels:
        with open(args.labels, "w", encoding="utf-8") as fh:
            for f, lab in enumerate(labels):
                fh.write(json.dumps({"frame_id": f, "labels": lab}, separators=(",", ":")) + "\n")
    return EXIT_OK


def _cmd_segment(args, out) -> int:
    cfg = _config(args)
    print("# frame_id,cluster_id,n_points", file=out)
    for scan in scanio.read_scans(args.input, args.format):
        if args.method == "dbscan":
            clusters = dbscan(scan, cfg.dbscan)
        else:
            if not args.bandwidth > 0:
                raise ConfigError("--bandwidth must be > 0")
            clusters = mean_shift(scan, args.bandwidth) if len(scan) else []
        for c in clusters:
            print(f"{scan.frame_id},{c.label},{len(c)}", file=out)
    return EXIT_OK


def _cmd_fit(args, out) -> int:
    cfg = _config(args)
    scans = scanio.read_scans(args.input, args.format)
    results = run_frames(scans, cfg.dbscan, cfg.fit, workers=args.workers)
    if args.json:
        for r in results:
            print(r.to_json(), file=out)
        return EXIT_OK
    print("# frame_id,cluster_id,center_x,center_y,heading,length,width,degenerate", file=out)
    for r in results:
        for cf in r.fits:
            rect = cf.fit.rect
            cx, cy = rect.center
            print(
                f"{r.frame_id},{cf.cluster_id},{cx:.4f},{cy:.4f},{rect.heading:.6f},"
                f"{rect.length:.4f},{rect.width:.4f},{int(cf.fit.degenerate)}",
                file=out,
            )
    return EXIT_OK


def _cmd_bench(args, out) -> int:
    cfg = _config(args)
    if args.repeats < 1:
        raise ConfigError("--repeats must be >= 1")
    scans = scanio.read_scans(args.input, args.format)
    if not scans:
        raise scanio.ScanFormatError("no frames to benchmark", path=args.input)
    methods = METHODS if args.method == "both" else (args.method,)
    for m in methods:
        rep = bench(
            scans, m, args.repeats, cfg.dbscan, cfg.fit,
            resolution=cfg.baseline_resolution,
            include_segmentation=args.include_segmentation,
        )
        if args.json:
            print(json.dumps(rep.to_dict()), file=out)
        else:
            print(
                f"{rep.method:<15} mean {rep.mean_ms:9.4f} ms  stddev {rep.stddev_ms:9.4f} ms  "
                f"frames {rep.n_frames}  [{rep.environment}]",
                file=out,
            )
    return EXIT_OK


def _cmd_plot(args) -> int:
    cfg = _config(args)
    scans = scanio.read_scans(args.input, args.format)
    if args.frame is None:
        if not scans:
            raise scanio.ScanFormatError("file holds no frames", path=args.input)
        scan = scans[0]
    else:
        matches = [s for s in scans if s.frame_id == args.frame]
        if not matches:
            raise ConfigError(f"no frame with frame_id {args.frame}")
        scan = matches[0]
    if args.segmentation_only:
        plot_svg(dbscan(scan, cfg.dbscan), scan, args.output)
    else:
        plot_svg(run_pipeline(scan, cfg.dbscan, cfg.fit), scan, args.output)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "segment":
            return _cmd_segment(args, out)
        if args.command == "fit":
            return _cmd_fit(args, out)
        if args.command == "bench":
            return _cmd_bench(args, out)
        if args.command == "plot":
            return _cmd_plot(args)
    except scanio.ScanFormatError as exc:
        print(f"lshapefit: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConfigError as exc:
        print(f"lshapefit: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"lshapefit: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    parser.error(f"unknown command {args.command}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
