"""
Helpers shared by the action modules.
"""

from typing import Any, Optional

from ..config import Settings, load_config
from ..utils.bounds import OptimizerSettings


def resolve_settings(settings: Optional[Settings]) -> Settings:
    """Use the injected settings, or load them from the environment."""
    return settings if settings is not None else load_config()


def optimizer_settings(settings: Optional[Settings]) -> OptimizerSettings:
    return OptimizerSettings.from_settings(resolve_settings(settings))


def given(**values: Any) -> dict[str, Any]:
    """Keyword arguments that were actually supplied."""
    return {key: value for key, value in values.items() if value is not None}
