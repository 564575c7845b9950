import math

import pytest

from lshapefit.config import ConfigError, PipelineConfig, build_config, load_config, parse_config

DOC_EXAMPLE = """\
# segmentation
epsilon = 0.85
min_pts = 6
# fitting
delta_theta0 = 0.39269908169872414
vertex_k = 3
superpose_threshold = 0.3
spread_threshold = 0.5
min_cluster_size = 4
baseline_resolution = 0.008726646259971648
"""


def test_documented_example_equals_defaults():
    assert build_config(parse_config(DOC_EXAMPLE)) == PipelineConfig()


def test_overrides_beat_file(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("epsilon = 1.2\nmin_pts = 3\n")
    cfg = load_config(path, {"epsilon": 0.5, "vertex_k": None})
    assert cfg.dbscan.epsilon == 0.5 and cfg.dbscan.min_pts == 3
    assert cfg.fit.vertex_k == 3


def test_as_dict_covers_every_key():
    assert set(PipelineConfig().as_dict()) == {
        "epsilon", "min_pts", "delta_theta0", "vertex_k", "superpose_threshold",
        "spread_threshold", "min_cluster_size", "baseline_resolution",
    }


@pytest.mark.parametrize(
    "text,match",
    [
        ("epsilon 0.3\n", "line 1"),
        ("eps = 1\n", "unknown key"),
        ("min_pts = 3\nmin_pts = 4\n", "duplicate"),
        ("min_pts = 2.5\n", "expects int"),
        ("epsilon = nan\n", "finite"),
    ],
)
def test_parse_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


@pytest.mark.parametrize(
    "values",
    [{"epsilon": -1.0}, {"min_pts": 0}, {"delta_theta0": 2.0}, {"baseline_resolution": 0.0}, {"vertex_k": 0}],
)
def test_invalid_values(values):
    with pytest.raises(ConfigError):
        build_config(values)


def test_delta_theta0_half_pi_allowed():
    assert build_config({"delta_theta0": math.pi / 2}).fit.delta_theta0 == math.pi / 2
