import argparse
from pathlib import Path

import pytest

from core.config import CONFIG_ENV, PipelineConfig, load_config_file
from core.errors import DataParseError, ParameterError


def _args(**kwargs):
    return argparse.Namespace(**kwargs)


def test_defaults_are_valid():
    config = PipelineConfig()
    assert config.validate() == []
    assert config.alpha == 20.0
    assert config.vaf_threshold == 0.9
    assert config.preprocess.target_len == 94
    assert config.nmf.restarts == 10


def test_load_config_file(tmp_path: Path):
    path = tmp_path / "synkin.conf"
    path.write_text(
        "# comment\n"
        "alpha = 40\n"
        "\n"
        "nmf.max_iters = 500  # inline\n"
        "preprocess.rectify = false\n"
        "preprocess.total_len = 939\n",
        encoding="utf-8",
    )
    config = PipelineConfig.from_mapping(load_config_file(path))
    assert config.alpha == 40.0
    assert config.nmf.max_iters == 500
    assert config.preprocess.rectify is False
    assert config.preprocess.total_len == 939


def test_config_line_without_equals(tmp_path: Path):
    path = tmp_path / "bad.conf"
    path.write_text("alpha = 1\njust text\n", encoding="utf-8")
    with pytest.raises(DataParseError) as info:
        load_config_file(path)
    assert info.value.row == 2


def test_missing_config_file(tmp_path: Path):
    with pytest.raises(FileNotFoundError):
        load_config_file(tmp_path / "absent.conf")


def test_unknown_key_names_file_line(tmp_path: Path):
    path = tmp_path / "synkin.conf"
    path.write_text("alpha = 40\n# comment\nnmf.speed = 3\n", encoding="utf-8")
    with pytest.raises(ParameterError) as info:
        PipelineConfig.from_mapping(load_config_file(path))
    message = str(info.value)
    assert "nmf.speed" in message
    assert "行 3" in message


def test_unparsable_value_names_file_line(tmp_path: Path):
    path = tmp_path / "synkin.conf"
    path.write_text("\nnmf.max_iters = lots\n", encoding="utf-8")
    with pytest.raises(ParameterError) as info:
        PipelineConfig.from_mapping(load_config_file(path))
    assert "nmf.max_iters" in str(info.value)
    assert "行 2" in str(info.value)


@pytest.mark.parametrize("values", [
    {"beta": "1"},
    {"nmf.speed": "1"},
    {"robot.alpha": "1"},
])
def test_unknown_keys(values):
    with pytest.raises(ParameterError):
        PipelineConfig.from_mapping(values)


@pytest.mark.parametrize("values", [
    {"alpha": "strong"},
    {"nmf.max_iters": "2.5"},
    {"preprocess.rectify": "maybe"},
])
def test_unparsable_values(values):
    with pytest.raises(ParameterError):
        PipelineConfig.from_mapping(values)


def test_flags_override_file(tmp_path: Path):
    path = tmp_path / "synkin.conf"
    path.write_text("alpha = 40\nnmf.restarts = 4\n", encoding="utf-8")
    config = PipelineConfig.from_args(_args(config=path, alpha=80.0, restarts=None, kalman_rts=True))
    assert config.alpha == 80.0
    assert config.nmf.restarts == 4
    assert config.preprocess.kalman_rts is True


def test_environment_config(tmp_path: Path, monkeypatch):
    path = tmp_path / "env.conf"
    path.write_text("vaf_threshold = 0.95\nactuator.dt = 0.01\n", encoding="utf-8")
    monkeypatch.setenv(CONFIG_ENV, str(path))
    config = PipelineConfig.from_args(_args(config=None))
    assert config.vaf_threshold == 0.95
    assert config.actuator.dt == 0.01


def test_explicit_config_beats_environment(tmp_path: Path, monkeypatch):
    env = tmp_path / "env.conf"
    env.write_text("alpha = 1\n", encoding="utf-8")
    explicit = tmp_path / "explicit.conf"
    explicit.write_text("alpha = 2\n", encoding="utf-8")
    monkeypatch.setenv(CONFIG_ENV, str(env))
    assert PipelineConfig.from_args(_args(config=explicit)).alpha == 2.0


def test_no_rectify_flag(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    config = PipelineConfig.from_args(_args(no_rectify=True, tau=0.5, max_step=0.02))
    assert config.preprocess.rectify is False
    assert config.actuator.force_time_constant == 0.5
    assert config.actuator.position_max_step == 0.02


@pytest.mark.parametrize("values,fragment", [
    ({"alpha": "0"}, "alpha"),
    ({"vaf_threshold": "1.0"}, "vaf_threshold"),
    ({"selection_method": "magic"}, "selection_method"),
    ({"preprocess.ma_window": "0"}, "preprocess.ma_window"),
    ({"nmf.tol": "0"}, "nmf.tol"),
    ({"actuator.noise_sigma": "-1"}, "actuator.noise_sigma"),
])
def test_validate_names_bad_field(values, fragment):
    errors = PipelineConfig.from_mapping(values).validate()
    assert len(errors) == 1
    assert errors[0].startswith(fragment)


def test_total_len_none_round_trip():
    config = PipelineConfig.from_mapping({"preprocess.total_len": "none"})
    assert config.preprocess.total_len is None
    assert config.as_mapping()["preprocess.total_len"] is None
