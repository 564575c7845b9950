import io
import json
import subprocess
import sys

import pytest

from lshapefit import scanio
from lshapefit.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_PARSE, EXIT_USAGE, main


def run(*argv):
    out = io.StringIO()
    code = main(list(map(str, argv)), out=out)
    return code, out.getvalue()


@pytest.fixture
def frames(tmp_path):
    path = tmp_path / "frames.jsonl"
    assert run("gen", "--scene", "random", "--seed", 3, "--frames", 3, "-o", path)[0] == EXIT_OK
    return path


def test_gen_csv_and_labels(tmp_path):
    scan_path, labels_path = tmp_path / "l.csv", tmp_path / "labels.jsonl"
    code, _ = run("gen", "--scene", "single_L", "--sigma", 0, "-o", scan_path, "--labels", labels_path)
    assert code == EXIT_OK
    scan = scanio.read_scan(scan_path)
    labels = json.loads(labels_path.read_text())
    assert len(labels["labels"]) == len(scan) > 0


def test_fit_lines(frames):
    code, out = run("fit", frames)
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "# frame_id,cluster_id,center_x,center_y,heading,length,width,degenerate"
    assert len(lines) > 1
    for line in lines[1:]:
        fields = line.split(",")
        assert len(fields) == 8 and fields[-1] in ("0", "1")
        assert int(fields[0]) in (0, 1, 2)


def test_fit_json_and_workers_agree(frames):
    _, serial = run("fit", frames, "--json")
    _, parallel = run("fit", frames, "--json", "--workers", 2)
    strip = lambda text: [{k: v for k, v in json.loads(l).items() if k != "timing"} for l in text.splitlines()]
    assert strip(serial) == strip(parallel)
    assert [r["frame_id"] for r in strip(serial)] == [0, 1, 2]


def test_segment_both_methods(frames):
    code, out = run("segment", frames)
    assert code == EXIT_OK and out.startswith("# frame_id,cluster_id,n_points")
    code, out = run("segment", frames, "--method", "meanshift", "--bandwidth", 6)
    assert code == EXIT_OK and "-1" not in [l.split(",")[1] for l in out.splitlines()[1:]]


def test_bench_json(frames):
    code, out = run("bench", frames, "--repeats", 2, "--json")
    assert code == EXIT_OK
    reports = [json.loads(l) for l in out.splitlines()]
    assert [r["method"] for r in reports] == ["search_based", "baseline_angle"]
    assert all(r["n_frames"] == 6 for r in reports)


def test_plot(frames, tmp_path):
    svg = tmp_path / "f.svg"
    assert run("plot", frames, "-o", svg, "--frame", 1)[0] == EXIT_OK
    assert svg.read_text().startswith("<?xml")
    assert run("plot", frames, "-o", svg, "--segmentation-only")[0] == EXIT_OK


def test_config_file_and_flags(frames, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("min_cluster_size = 100000\n")
    code, out = run("fit", frames, "--config", cfg)
    assert code == EXIT_OK and len(out.splitlines()) == 1
    code, out = run("fit", frames, "--config", cfg, "--min-cluster-size", 4)
    assert len(out.splitlines()) > 1


def test_exit_usage():
    assert run()[0] == EXIT_USAGE
    assert run("fit")[0] == EXIT_USAGE
    assert run("gen", "--scene", "nowhere", "-o", "x.csv")[0] == EXIT_USAGE


def test_exit_parse_error(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("abc,1\n")
    assert run("fit", bad)[0] == EXIT_PARSE


def test_exit_config_error(frames, tmp_path):
    assert run("fit", frames, "--epsilon", -1)[0] == EXIT_CONFIG
    cfg = tmp_path / "c.cfg"
    cfg.write_text("nonsense = 1\n")
    assert run("fit", frames, "--config", cfg)[0] == EXIT_CONFIG
    assert run("plot", frames, "-o", tmp_path / "x.svg", "--frame", 99)[0] == EXIT_CONFIG
    assert run("bench", frames, "--repeats", 0)[0] == EXIT_CONFIG


def test_exit_io_error(tmp_path):
    assert run("fit", tmp_path / "missing.csv")[0] == EXIT_IO
    src = tmp_path / "ok.csv"
    src.write_text("0,0\n")
    assert run("plot", src, "-o", tmp_path / "no" / "such" / "dir.svg")[0] == EXIT_IO


def test_console_entry_point(tmp_path):
    path = tmp_path / "s.csv"
    proc = subprocess.run([sys.executable, "-m", "lshapefit.cli", "gen", "-o", str(path)], capture_output=True)
    assert proc.returncode == 0
    proc = subprocess.run([sys.executable, "-m", "lshapefit.cli", "fit", str(tmp_path / "nope.csv")], capture_output=True)
    assert proc.returncode == EXIT_IO and b"I/O error" in proc.stderr
