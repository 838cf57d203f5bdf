"""
Configuration for the noisy group testing toolkit.
"""

import os
from pathlib import Path
from typing import Any, Optional

from dotenv import dotenv_values, load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings read from ``NOISYGT_*`` environment variables."""

    # Fallback seed for commands that take --seed
    SEED: Optional[int] = None

    # Bound optimizer
    D_MIN: float = 0.02
    D_MAX: float = 6.0
    GRID_POINTS: int = 200

    # Trial workers
    THREADS: int = Field(default_factory=lambda: os.cpu_count() or 1)

    # MCP server auth (serve only)
    SERVER_AUTH_KEY: Optional[str] = None

    # Optional settings with defaults
    LOG_LEVEL: str = "INFO"
    FILE_LOGGING: bool = False
    LOGS_DIR: str = "logs"

    model_config = SettingsConfigDict(
        env_prefix="NOISYGT_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )


def load_config(dotenv_path: Optional[Path] = None, require_server_key: bool = False) -> Settings:
    """
    Load configuration from environment variables and .env file.

    Args:
        dotenv_path: Path to .env file. Defaults to .env in project root.
        require_server_key: Whether the MCP server auth key must be set.

    Returns:
        Settings object with loaded configuration.

    Raises:
        ValueError: If required configuration is missing.
    """
    if dotenv_path is None:
        dotenv_path = Path(__file__).parents[1] / ".env"

    load_dotenv(dotenv_path=dotenv_path)

    settings = Settings()

    if require_server_key:
        check_server_key(settings)

    return settings


def check_server_key(settings: Settings) -> str:
    """Return the MCP server auth key, or raise ValueError if it is unset."""
    if not settings.SERVER_AUTH_KEY:
        raise ValueError("Missing required configuration: NOISYGT_SERVER_AUTH_KEY")
    return settings.SERVER_AUTH_KEY


def read_config_file(path: Path) -> dict[str, str]:
    """
    Read a flat ``key=value`` run file.

    Keys are long flag names without the leading dashes; dashes and
    underscores are interchangeable (``k-design`` or ``k_design``).

    Raises:
        FileNotFoundError: If the file does not exist.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Config file not found: {path}")
    return {
        key.strip().replace("-", "_"): value
        for key, value in dotenv_values(path).items()
        if value is not None
    }


def merge_options(
    flags: dict[str, Any], file_values: dict[str, Any], settings: Settings
) -> dict[str, Any]:
    """
    Combine option sources: flags > config file > environment > defaults.

    Only keys present somewhere are returned; model defaults fill the rest.
    """
    merged: dict[str, Any] = {}
    if settings.SEED is not None:
        merged["seed"] = settings.SEED
    merged["threads"] = settings.THREADS
    merged.update(file_values)
    merged.update({key: value for key, value in flags.items() if value is not None})
    return merged
