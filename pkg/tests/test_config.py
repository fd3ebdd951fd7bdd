import pytest

from ustash.config import (ConfigKeyError, ConfigParseError, ConfigValueError,
                           build_config, config_to_toml, default_config,
                           load_config)
from ustash.sim import PolicyKind
from ustash.units import UnitError, parse_bandwidth, parse_size


# ---------------------------------------------------------------------------
# units

@pytest.mark.parametrize("raw,expected", [
    ("500kbps", 0.0625),
    ("800kbps", 0.1),
    ("6Mbps", 0.75),
    ("1Gbps", 125.0),
    ("2MB/s", 2.0),
    ("1500KB/s", 1.5),
    (0.25, 0.25),
    ("0.25", 0.25),
])
def test_parse_bandwidth(raw, expected):
    assert parse_bandwidth(raw) == pytest.approx(expected)


@pytest.mark.parametrize("raw,expected", [
    ("2102KB", 2.102),
    ("194061KB", 194.061),
    ("1.5GB", 1500.0),
    ("12MB", 12.0),
    (7, 7.0),
])
def test_parse_size(raw, expected):
    assert parse_size(raw) == pytest.approx(expected)


@pytest.mark.parametrize("raw", ["12 parsecs", "fast", "", "MB12"])
def test_parse_rejects_garbage(raw):
    with pytest.raises(UnitError):
        parse_bandwidth(raw)
    with pytest.raises(UnitError):
        parse_size(raw)


# ---------------------------------------------------------------------------
# defaults and loading

def test_empty_file_gives_defaults(tmp_path):
    path = tmp_path / "empty.toml"
    path.write_text("")
    cfg = load_config(path)
    assert cfg == default_config()
    # resolved reference values
    assert cfg.model.net.omega_u == pytest.approx(0.0625)
    assert cfg.model.net.omega_b == pytest.approx(0.1)
    assert cfg.model.net.omega_l == pytest.approx(0.75)
    assert cfg.model.cost.phi_u == 10.0 and cfg.model.cost.phi_b == 3.0
    assert cfg.workload.r_v == 80.0
    assert cfg.workload.video.zipf.s == 0.716
    assert cfg.workload.video.view.lambda_e == 2.77
    assert cfg.workload.nonvideo.size.shape == 0.0006


def test_unit_suffix_resolution(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text('[network]\nomega_u = "500kbps"\n\n[model]\nmean_size = "2102KB"\n')
    cfg = load_config(path)
    assert cfg.model.net.omega_u == pytest.approx(0.0625)
    assert cfg.model.mean_size_mb == pytest.approx(2.102)


def test_negative_zipf_rejected(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text("[workload.video]\nzipf_s = -1\n")
    with pytest.raises(ConfigValueError):
        load_config(path)


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text("[workload]\nbogus_knob = 3\n")
    with pytest.raises(ConfigKeyError, match="workload.bogus_knob"):
        load_config(path)


def test_parse_error(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text("this is [not toml\n")
    with pytest.raises(ConfigParseError):
        load_config(path)


def test_exit_codes_are_distinct():
    codes = {ConfigParseError("x").exit_code, ConfigKeyError("x").exit_code,
             ConfigValueError("x").exit_code}
    assert codes == {2, 3, 4}


def test_policy_parsing():
    cfg = build_config({"policy": {"kind": "fixed", "x": 0.4, "x_min": 0.1}})
    assert cfg.policy.kind is PolicyKind.FIXED and cfg.policy.x == 0.4
    with pytest.raises(ConfigValueError):
        build_config({"policy": {"kind": "fixed"}})
    with pytest.raises(ConfigValueError):
        build_config({"policy": {"kind": "sideways"}})


def test_scenario_validation():
    with pytest.raises(ConfigValueError):
        build_config({"scenarios": ["direct", "warp-drive"]})
    cfg = build_config({"scenarios": ["direct", "ustash"]})
    assert cfg.scenarios == ("direct", "ustash")


def test_sweep_defaults_and_domains():
    cfg = build_config({"sweep": {"parameter": "r_v"}})
    assert cfg.sweep.values == (1.0, 50.0, 100.0, 200.0, 400.0)
    with pytest.raises(ConfigValueError):
        build_config({"sweep": {"parameter": "x", "values": [0.5, 1.5]}})
    with pytest.raises(ConfigValueError):
        build_config({"sweep": {"parameter": "gravity"}})
    with pytest.raises(ConfigValueError):
        build_config({"sweep": {"parameter": "omega_ratio", "values": [0.0]}})


def test_sim_options():
    cfg = build_config({"sim": {"hit_time": "full_size", "sample_interval": 10}})
    assert cfg.sim.hit_time == "full_size" and cfg.sim.sample_interval == 10
    with pytest.raises(ConfigValueError):
        build_config({"sim": {"hit_time": "warp"}})


def test_output_options():
    with pytest.raises(ConfigValueError):
        build_config({"output": {"format": "parquet"}})
    with pytest.raises(ConfigValueError):
        build_config({"output": {"plots": "yes"}})


def test_seed_override():
    cfg = default_config().with_seed(99)
    assert cfg.seed == 99 and cfg.workload.seed == 99


def test_echo_round_trip(tmp_path):
    cfg = build_config({
        "seed": 5,
        "workload": {"n_requests": 300, "r_v": 2.5,
                     "video": {"catalog_size": 40, "gamma_scale": "100KB"}},
        "network": {"omega_b": "1600kbps"},
        "policy": {"kind": "fixed", "x": 0.3},
        "sweep": {"parameter": "x", "values": [0.0, 0.5, 1.0]},
    })
    path = tmp_path / "echo.toml"
    path.write_text(config_to_toml(cfg))
    assert load_config(path) == cfg


def test_echo_round_trip_defaults(tmp_path):
    cfg = default_config()
    path = tmp_path / "echo.toml"
    path.write_text(config_to_toml(cfg))
    assert load_config(path) == cfg
