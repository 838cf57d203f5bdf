"""
Status action - reports the tool version and optimizer ranges.
"""

import logging
from typing import Optional

from .. import __version__
from ..config import Settings
from .common import resolve_settings

logger = logging.getLogger(__name__)


async def status_action(settings: Optional[Settings] = None) -> dict:
    """
    Get server status information.

    Returns:
        Status, version and the density range searched by the bound optimizers.
    """
    logger.info("Status action called")
    settings = resolve_settings(settings)
    return {
        "status": "ok",
        "message": "noisygt tool server is running",
        "version": __version__,
        "density_range": [settings.D_MIN, settings.D_MAX],
        "threads": settings.THREADS,
    }
