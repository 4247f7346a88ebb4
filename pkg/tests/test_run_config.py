import logging

import pytest

from src.config.run_config import LOG_LEVEL_ENV, TOL_ENV, get_log_level, get_run_config, read_config_file
from src.models.errors import ConfigError


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv(TOL_ENV, raising=False)
    monkeypatch.delenv(LOG_LEVEL_ENV, raising=False)


def write_config(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


def test_defaults():
    config = get_run_config()
    assert (config.delta, config.lam, config.n_max) == (3.0, 1.25, 40)
    assert (config.x_min, config.x_max, config.points) == (-6.0, 6.0, 2001)
    assert config.tol_residual == 1e-10
    assert config.tol_grid == 1e-5
    assert config.output_format == "csv"


def test_precedence(monkeypatch, tmp_path):
    monkeypatch.setenv(TOL_ENV, "1e-8")
    assert get_run_config().tol_residual == 1e-8

    path = write_config(tmp_path, "delta=2.5\nlambda=0.5\ntol_residual=1e-9\nformat=json\n")
    config = get_run_config(config_file=path)
    assert config.tol_residual == 1e-9
    assert config.params.delta == 2.5
    assert config.params.lam == 0.5
    assert config.output_format == "json"

    config = get_run_config({"delta": 1.5, "tol_residual": 1e-7, "points": None}, config_file=path)
    assert config.delta == 1.5
    assert config.tol_residual == 1e-7
    assert config.points == 2001


def test_config_file_typing(tmp_path):
    values = read_config_file(write_config(tmp_path, "n_max=12\npoints=801\noutput=out.csv\n"))
    assert values == {"n_max": 12, "points": 801, "output": "out.csv"}


@pytest.mark.parametrize(
    "text",
    ["foo=1\n", "n_max=abc\n", "n_max=1\n", "format=xml\n", "tol_grid=-1\n", "x_min=2\nx_max=1\n"],
)
def test_invalid_config_files(tmp_path, text):
    with pytest.raises(ConfigError):
        get_run_config(config_file=write_config(tmp_path, text))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        get_run_config(config_file=str(tmp_path / "absent.cfg"))


def test_log_level(monkeypatch):
    assert get_log_level() == logging.INFO
    monkeypatch.setenv(LOG_LEVEL_ENV, "debug")
    assert get_log_level() == logging.DEBUG
    monkeypatch.setenv(LOG_LEVEL_ENV, "chatty")
    with pytest.raises(ConfigError):
        get_log_level()
