"""
Bound table for one channel: COMP / DD prefactors per theta with the
converse and the noiseless reference curves.
"""

import asyncio
import logging
from typing import Any, Iterator, Optional

from ..config import Settings
from ..utils.bounds import (
    BoundQuery,
    OptimizerSettings,
    bound_row,
    reference_result,
)
from ..utils.errors import ParameterError
from ..utils.experiment import TableConfig
from ..utils.kl_math import ChannelParams
from ..utils.models import Algorithm
from .common import given, optimizer_settings

logger = logging.getLogger(__name__)

REFERENCE_CURVES = ("optimal", "counting")


def table_channel(config: TableConfig) -> ChannelParams:
    """The single channel of a bounds/compare table."""
    if len(config.p) != 1 or len(config.q) != 1:
        raise ParameterError("This table takes a single channel; use sweep for channel grids")
    return ChannelParams(config.p[0], config.q[0])


def iter_bound_rows(
    config: TableConfig, opts: Optional[OptimizerSettings] = None
) -> Iterator[dict[str, Any]]:
    """Rows per theta: each requested algorithm, the converse, then the reference curves."""
    ch = table_channel(config)
    for theta in config.theta:
        for algorithm in config.alg:
            yield bound_row(BoundQuery(theta, ch, config.design, algorithm), opts)
        yield bound_row(BoundQuery(theta, ch, config.design, Algorithm.CONVERSE), opts)
        for label in REFERENCE_CURVES:
            yield reference_result(theta, ch, label).as_row()


async def bounds_action(
    theta: Optional[list[float]] = None,
    p: float = 0.0,
    q: float = 0.0,
    alg: Optional[list[str]] = None,
    design: str = "cc",
    settings: Optional[Settings] = None,
) -> list[dict]:
    """
    Achievability bounds of noisy COMP and DD for one channel.

    Each row gives the optimized prefactor c in m = c k log(n/k), the rate
    1/(c log 2) in bits and the optimizing alpha, beta and density d.

    Args:
        theta: Sparsity exponents in (0, 1), k = n**theta. Defaults to 0.1..0.9.
        p: False-positive probability of the test channel.
        q: False-negative probability of the test channel.
        alg: Decoders to bound, any of "comp" and "dd". Defaults to both.
        design: "cc" (constant column) or "bernoulli".

    Returns:
        One row per (theta, algorithm) plus the converse, "optimal" and
        "counting" reference rows for each theta.
    """
    config = TableConfig(**given(theta=theta, p=p, q=q, alg=alg, design=design))
    opts = optimizer_settings(settings)
    logger.info(f"Bounds requested for {len(config.theta)} thetas, p={p}, q={q}")
    return await asyncio.to_thread(lambda: list(iter_bound_rows(config, opts)))
