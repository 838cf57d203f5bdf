"""
Side-by-side comparison of the constant-column and Bernoulli designs.
"""

import asyncio
import logging
from itertools import product
from typing import Any, Iterator, Optional

from ..config import Settings
from ..utils.bounds import BoundQuery, OptimizerSettings, converse_constant, solve_bound
from ..utils.errors import NoisyGTError
from ..utils.experiment import TableConfig
from ..utils.models import Algorithm, DesignKind
from .bounds import table_channel
from .common import given, optimizer_settings

logger = logging.getLogger(__name__)

COLUMNS = {
    f"{algorithm.value}_{design.value}": (algorithm, design)
    for algorithm, design in product(
        (Algorithm.COMP, Algorithm.DD), (DesignKind.CONSTANT_COLUMN, DesignKind.BERNOULLI)
    )
}
COMPARE_FIELDS = ["theta", "p", "q", *COLUMNS, "converse", "status", "error"]


def iter_compare_rows(
    config: TableConfig, opts: Optional[OptimizerSettings] = None
) -> Iterator[dict[str, Any]]:
    """
    One wide row per theta with the four design/decoder prefactors and the converse.

    A failed cell is left empty and its message collected in ``error``.
    """
    ch = table_channel(config)
    converse = converse_constant(ch).prefactor
    for theta in config.theta:
        row: dict[str, Any] = {"theta": theta, "p": ch.raw_p, "q": ch.raw_q}
        errors = []
        for column, (algorithm, design) in COLUMNS.items():
            try:
                row[column] = solve_bound(BoundQuery(theta, ch, design, algorithm), opts).prefactor
            except NoisyGTError as exc:
                logger.warning(f"{column} failed at theta={theta}: {exc}")
                row[column] = None
                errors.append(f"{column}: {exc}")
        row["converse"] = converse
        row["status"] = "error" if errors else "ok"
        row["error"] = "; ".join(errors)
        yield row


async def compare_action(
    theta: Optional[list[float]] = None,
    p: float = 0.0,
    q: float = 0.0,
    settings: Optional[Settings] = None,
) -> list[dict]:
    """
    Compare COMP and DD bounds under constant-column and Bernoulli designs.

    Args:
        theta: Sparsity exponents in (0, 1). Defaults to 0.1..0.9.
        p: False-positive probability of the test channel.
        q: False-negative probability of the test channel.

    Returns:
        One row per theta with columns comp_cc, comp_bernoulli, dd_cc,
        dd_bernoulli and converse (prefactors c in m = c k log(n/k)).
    """
    config = TableConfig(**given(theta=theta, p=p, q=q))
    opts = optimizer_settings(settings)
    logger.info(f"Design comparison requested for {len(config.theta)} thetas, p={p}, q={q}")
    return await asyncio.to_thread(lambda: list(iter_compare_rows(config, opts)))
