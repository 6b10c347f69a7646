"""
Tests for configuration loading from .env files, the environment and CLI overrides.
"""
import os
import sys

import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from mres.config import DEFAULT_ENUM_CAP, DEFAULT_EXHAUSTIVE_CAP, ENV_VARS, Config, load_config
from mres.errors import ConfigError


@pytest.fixture
def clean_env(monkeypatch, tmp_path):
    """Run in an empty directory with no MRES_* variables; undo anything load_dotenv sets."""
    for name in ENV_VARS.values():
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
    yield tmp_path
    for name in ENV_VARS.values():
        os.environ.pop(name, None)


def test_defaults(clean_env):
    config = load_config()
    assert config.exhaustive_cap == DEFAULT_EXHAUSTIVE_CAP
    assert config.enum_cap == DEFAULT_ENUM_CAP
    assert config.threads >= 1
    assert config.search_max_width is None


def test_dotenv_in_working_directory(clean_env):
    (clean_env / ".env").write_text("MRES_EXHAUSTIVE_CAP=10\nMRES_THREADS=3\n")
    config = load_config()
    assert config.exhaustive_cap == 10
    assert config.threads == 3


def test_explicit_env_file(clean_env):
    env_file = clean_env / "custom.env"
    env_file.write_text("MRES_ENUM_CAP=4096\n")
    assert load_config(env_file).enum_cap == 4096


def test_environment_beats_dotenv(clean_env, monkeypatch):
    (clean_env / ".env").write_text("MRES_SEARCH_MAX_LINES=100\n")
    monkeypatch.setenv("MRES_SEARCH_MAX_LINES", "250")
    assert load_config().search_max_lines == 250


def test_overrides_beat_environment(clean_env, monkeypatch):
    monkeypatch.setenv("MRES_THREADS", "8")
    config = load_config(threads=2, exhaustive_cap=None)
    assert config.threads == 2
    assert config.exhaustive_cap == DEFAULT_EXHAUSTIVE_CAP


def test_missing_env_file(clean_env):
    with pytest.raises(ConfigError):
        load_config(clean_env / "nope.env")


@pytest.mark.parametrize("raw", ["ten", "1.5"])
def test_non_integer_environment(clean_env, monkeypatch, raw):
    monkeypatch.setenv("MRES_ENUM_CAP", raw)
    with pytest.raises(ConfigError):
        load_config()


def test_blank_environment_value_is_ignored(clean_env, monkeypatch):
    monkeypatch.setenv("MRES_EXHAUSTIVE_CAP", "  ")
    assert load_config().exhaustive_cap == DEFAULT_EXHAUSTIVE_CAP


def test_validation():
    with pytest.raises(ConfigError):
        Config(threads=0)
    with pytest.raises(ConfigError):
        Config(enum_cap=-1)
    with pytest.raises(ConfigError):
        Config(search_max_width=-1)
    assert Config(search_max_width=0).search_max_width == 0


def test_with_overrides_ignores_none():
    base = Config(threads=4)
    assert base.with_overrides(threads=None, enum_cap=None) is base
    assert base.with_overrides(enum_cap=64).enum_cap == 64
    with pytest.raises(ConfigError):
        base.with_overrides(exhaustive_cap=0)
