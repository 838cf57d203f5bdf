"""
Bound sweeps over a theta x channel grid.
"""

import asyncio
import logging
from itertools import product
from typing import Any, Iterator, Optional

from ..config import Settings
from ..utils.bounds import BoundQuery, OptimizerSettings, error_row, rate_sweep
from ..utils.errors import DomainError
from ..utils.experiment import TableConfig
from ..utils.kl_math import ChannelParams
from .common import given, optimizer_settings

logger = logging.getLogger(__name__)


def iter_sweep_rows(
    config: TableConfig, opts: Optional[OptimizerSettings] = None
) -> Iterator[dict[str, Any]]:
    """
    Bound rows for every (p, q, algorithm, theta) combination.

    Channel points with p + q = 1 produce error rows.
    """
    for p, q, algorithm in product(config.p, config.q, config.alg):
        try:
            ch = ChannelParams(p, q)
        except DomainError as exc:
            logger.warning(f"Skipping channel p={p}, q={q}: {exc}")
            for theta in config.theta:
                yield error_row(theta, p, q, config.design.value, algorithm.value, str(exc))
            continue
        if not config.theta:
            continue
        template = BoundQuery(config.theta[0], ch, config.design, algorithm)
        yield from rate_sweep(template, config.theta, opts)


async def sweep_action(
    theta: Optional[list[float]] = None,
    p: Optional[list[float]] = None,
    q: Optional[list[float]] = None,
    alg: Optional[list[str]] = None,
    design: str = "cc",
    settings: Optional[Settings] = None,
) -> list[dict]:
    """
    Sweep the COMP / DD bounds over a grid of sparsity levels and channels.

    Args:
        theta: Sparsity exponents in (0, 1). Defaults to 0.1..0.9.
        p: False-positive probabilities to sweep. Defaults to [0].
        q: False-negative probabilities to sweep. Defaults to [0].
        alg: Decoders, any of "comp" and "dd". Defaults to both.
        design: "cc" (constant column) or "bernoulli".

    Returns:
        One bound row per (p, q, algorithm, theta).
    """
    config = TableConfig(**given(theta=theta, p=p, q=q, alg=alg, design=design))
    opts = optimizer_settings(settings)
    size = len(config.theta) * len(config.p) * len(config.q) * len(config.alg)
    logger.info(f"Sweep requested: {size} bounds")
    return await asyncio.to_thread(lambda: list(iter_sweep_rows(config, opts)))
