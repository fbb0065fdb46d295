import pytest

from aistrip.config import ConfigError, RunConfig, build_config, parse_bool, parse_scalar, read_config_file


def test_defaults():
    cfg = RunConfig().validate()
    assert (cfg.max_sog, cfg.drop_zero_sog, cfg.stop_radius_m, cfg.stop_min_s) == (80.0, True, 100.0, 3600.0)
    assert (cfg.min_trip_km, cfg.min_trip_points, cfg.test_frac, cfg.folds) == (0.2, 10, 0.2, 5)
    assert (cfg.seed, cfg.smote, cfg.smote_k) == (42, "fold", 5)
    assert cfg.cleaning_rules().bbox.min_lon == 4.25
    assert len(cfg.cleaning_rules().aoi) == 79


def test_file_then_flags(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nmax_sog = 50\nseed=7\ndrop-zero-sog = false\ngrid.rf.n_estimators = 10, 20\n"
                    "grid.dt.max_depth = none,3\n")
    cfg = build_config(str(path), {"seed": "9", "max_sog": None})
    assert cfg.max_sog == 50.0 and cfg.seed == 9 and cfg.drop_zero_sog is False
    assert cfg.grids["rf"]["n_estimators"] == [10, 20]
    assert cfg.grids["dt"]["max_depth"] == [None, 3]


@pytest.mark.parametrize("text", ["bogus = 1", "max_sog = fast", "just words", "grid.xgb.depth = 1", "smote = maybe",
                                  "test_frac = 1.5", "stop_radius_m = 0", "bbox = 1,2,3"])
def test_invalid(tmp_path, text):
    path = tmp_path / "bad.cfg"
    path.write_text(text + "\n")
    with pytest.raises(ConfigError):
        build_config(str(path), {})


def test_missing_file():
    with pytest.raises(ConfigError):
        read_config_file("/nonexistent/run.cfg")


def test_aoi_none_and_file(tmp_path):
    assert RunConfig(aoi="none").cleaning_rules().aoi is None
    ring = tmp_path / "ring.txt"
    ring.write_text("14 55\n15 55\n15 56\n")
    assert len(RunConfig(aoi=str(ring)).cleaning_rules().aoi) == 3
    with pytest.raises(ConfigError):
        RunConfig(aoi=str(tmp_path / "missing.txt")).cleaning_rules()


@pytest.mark.parametrize("text,value", [("true", True), ("No", False), ("1", True), ("off", False)])
def test_parse_bool(text, value):
    assert parse_bool(text) is value


@pytest.mark.parametrize("text,value", [("none", None), ("3", 3), ("0.5", 0.5), ("rbf", "rbf")])
def test_parse_scalar(text, value):
    assert parse_scalar(text) == value
