"""
Unit tests for config.py
"""

import os
import re

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from unittest.mock import patch

import pytest

from src.config import (
    Settings,
    check_server_key,
    load_config,
    merge_options,
    read_config_file,
)


def test_load_config_defaults():
    """Test config loading with no NOISYGT_ variables set."""
    with patch.dict(os.environ, {}, clear=True):
        with patch("src.config.load_dotenv"):
            config = load_config()

            assert config.SEED is None
            assert config.D_MIN == 0.02
            assert config.D_MAX == 6.0
            assert config.GRID_POINTS == 200
            assert config.THREADS >= 1
            assert config.LOG_LEVEL == "INFO"  # default value
            assert config.SERVER_AUTH_KEY is None


def test_load_config_reads_prefixed_environment():
    """Test settings come from NOISYGT_-prefixed environment variables."""
    with patch.dict(
        os.environ,
        {
            "NOISYGT_SEED": "123",
            "NOISYGT_THREADS": "3",
            "NOISYGT_D_MAX": "4.5",
            "NOISYGT_SERVER_AUTH_KEY": "test_auth_key",
            "SEED": "999",  # unprefixed names are ignored
        },
        clear=True,
    ):
        with patch("src.config.load_dotenv"):
            config = load_config()

            assert config.SEED == 123
            assert config.THREADS == 3
            assert config.D_MAX == 4.5
            assert config.SERVER_AUTH_KEY == "test_auth_key"


def test_load_config_missing_server_key():
    """Test the server key is only required when asked for."""
    with patch.dict(os.environ, {"NOISYGT_SERVER_AUTH_KEY": ""}, clear=True):
        with patch("src.config.load_dotenv"):
            load_config()

            with pytest.raises(ValueError) as exc_info:
                load_config(require_server_key=True)

            assert "Missing required configuration" in str(exc_info.value)
            assert "NOISYGT_SERVER_AUTH_KEY" in str(exc_info.value)


def test_check_server_key_returns_key():
    assert check_server_key(Settings(SERVER_AUTH_KEY="secret")) == "secret"


def test_read_config_file(tmp_path):
    """Test run files accept dashed or underscored keys and comments."""
    path = tmp_path / "run.conf"
    path.write_text("# experiment\ntheta=0.4\nk-design=50\nthreshold_mode=per_item\n")

    values = read_config_file(path)

    assert values == {"theta": "0.4", "k_design": "50", "threshold_mode": "per_item"}


def test_read_config_file_missing(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_config_file(tmp_path / "absent.conf")


def test_merge_options_precedence():
    """Test flags > config file > environment > defaults."""
    settings = Settings(SEED=7, THREADS=4)

    merged = merge_options(
        flags={"trials": 20, "seed": None, "out": None},
        file_values={"trials": "50", "seed": "9", "n": "1000"},
        settings=settings,
    )

    assert merged == {"trials": 20, "seed": "9", "n": "1000", "threads": 4}


def test_merge_options_environment_fallback():
    merged = merge_options({}, {}, Settings(SEED=7, THREADS=2))
    assert merged == {"seed": 7, "threads": 2}

    merged = merge_options({"threads": 8}, {}, Settings(THREADS=2))
    assert merged == {"threads": 8}


def test_directly_imported_packages_are_declared():
    """Packages imported by src/ are listed in pyproject.toml, not pulled in transitively."""
    root = Path(__file__).parents[1]
    manifest = tomllib.loads((root / "pyproject.toml").read_text())
    declared = {
        re.split(r"[\[<>=~!]", requirement, maxsplit=1)[0].strip().lower()
        for requirement in manifest["project"]["dependencies"]
    }
    sources = "\n".join(path.read_text() for path in (root / "src").rglob("*.py"))

    for module, package in [
        ("pydantic", "pydantic"),
        ("pydantic_settings", "pydantic-settings"),
        ("dotenv", "python-dotenv"),
        ("numpy", "numpy"),
        ("scipy", "scipy"),
        ("starlette", "starlette"),
        ("uvicorn", "uvicorn"),
        ("mcp", "mcp"),
    ]:
        assert re.search(rf"^(from|import) {module}\b", sources, re.MULTILINE), module
        assert package in declared, package
