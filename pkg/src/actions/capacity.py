"""
Capacity of the p-q channel and the counting-bound prefactor.
"""

import asyncio
import logging
from typing import Any

from ..utils.kl_math import ChannelParams, channel_capacity, mutual_information

logger = logging.getLogger(__name__)

CAPACITY_FIELDS = [
    "p",
    "q",
    "p_used",
    "q_used",
    "flipped",
    "channel",
    "capacity_nats",
    "capacity_bits",
    "gamma_star",
    "phi",
    "d_ch",
    "count_prefactor",
    "mutual_information_nats",
]


def capacity_record(p: float, q: float) -> dict[str, Any]:
    """
    Capacity summary of the p-q channel.

    ``p_used``/``q_used`` are the parameters after the p+q>1 normalization;
    ``count_prefactor`` is the converse prefactor 1/C (nats). Raises
    ``DomainError`` when p + q = 1.
    """
    ch = ChannelParams(p, q)
    result = channel_capacity(ch)
    if ch.flipped:
        logger.warning(f"p + q > 1: normalized (p, q) = ({p:g}, {q:g}) to ({ch.p:g}, {ch.q:g})")
    return {
        "p": p,
        "q": q,
        "p_used": ch.p,
        "q_used": ch.q,
        "flipped": ch.flipped,
        "channel": ch.kind,
        "capacity_nats": result.capacity_nats,
        "capacity_bits": result.capacity_bits,
        "gamma_star": result.gamma_star,
        "phi": result.phi,
        "d_ch": result.d_heuristic,
        "count_prefactor": 1.0 / result.capacity_nats,
        "mutual_information_nats": float(mutual_information(result.gamma_star, ch)),
    }


async def capacity_action(p: float = 0.0, q: float = 0.0) -> dict:
    """
    Shannon capacity of the noisy test channel.

    A truly negative test reads positive with probability p and a truly
    positive test reads negative with probability q.

    Args:
        p: False-positive probability in [0, 1].
        q: False-negative probability in [0, 1]; p + q must not equal 1.

    Returns:
        Capacity in nats and bits, the optimal input law gamma_star, phi,
        the density heuristic d_ch and the counting-bound prefactor 1/C.
    """
    logger.info(f"Capacity requested for p={p}, q={q}")
    return await asyncio.to_thread(capacity_record, p, q)
