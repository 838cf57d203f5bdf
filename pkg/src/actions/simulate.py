"""
Monte-Carlo recovery experiment.
"""

import asyncio
import logging
from typing import Optional

from ..config import Settings
from ..utils.experiment import ExperimentConfig, iter_results
from .common import given, optimizer_settings, resolve_settings

logger = logging.getLogger(__name__)


async def simulate_action(
    n: int = 10_000,
    theta: float = 0.5,
    p: float = 0.0,
    q: float = 0.0,
    alg: str = "dd",
    design: str = "cc",
    mult: Optional[list[float]] = None,
    trials: int = 100,
    seed: Optional[int] = None,
    density: str = "optimal",
    threshold_mode: str = "nominal",
    settings: Optional[Settings] = None,
) -> list[dict]:
    """
    Run seeded group testing trials with thresholds calibrated from the bounds.

    For each multiplier the design uses m = multiplier * c * k log(n/k) tests,
    where c is the optimized prefactor of the chosen decoder and design.

    Args:
        n: Number of items.
        theta: Sparsity exponent in (0, 1); k = round(n**theta) items are infected.
        p: False-positive probability of the test channel.
        q: False-negative probability of the test channel.
        alg: Decoder, "comp" or "dd".
        design: "cc" (constant column) or "bernoulli".
        mult: Test-count multipliers. Defaults to [1.0].
        trials: Trials per multiplier.
        seed: Master seed. Falls back to NOISYGT_SEED, then 0.
        density: "optimal" (optimizer density) or "capacity" (d_ch heuristic).
        threshold_mode: "nominal" or "per_item" decoder thresholds.

    Returns:
        One row per multiplier with the exact-recovery rate and mean error counts.
    """
    settings = resolve_settings(settings)
    if seed is None:
        seed = settings.SEED
    config = ExperimentConfig(
        **given(
            n=n,
            theta=theta,
            p=p,
            q=q,
            alg=alg,
            design=design,
            mult=mult,
            trials=trials,
            seed=seed,
            threads=settings.THREADS,
            density=density,
            threshold_mode=threshold_mode,
        )
    )
    opts = optimizer_settings(settings)
    logger.info(f"Simulation requested: n={config.n}, theta={config.theta}, {config.trials} trials")
    rows = await asyncio.to_thread(lambda: list(iter_results(config, opts)))
    return [row.as_row() for row in rows]
