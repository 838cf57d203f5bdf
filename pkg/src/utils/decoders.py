"""
Noisy COMP and DD decoders, threshold calibration and recovery accounting.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bounds import BoundQuery, BoundResult, OptimizerSettings, solve_bound
from .design_sim import (
    InfectionVector,
    OutcomeVector,
    PoolingDesign,
    negative_counts,
    positive_solo_counts,
)
from .errors import ParameterError
from .kl_math import ChannelParams
from .models import Algorithm, DesignKind, Stage

logger = logging.getLogger(__name__)

THRESHOLD_MODES = ("nominal", "per_item")


@dataclass(frozen=True)
class DecoderConfig:
    """
    Decoder thresholds as fractions of the item degree.

    ``threshold_mode`` selects the degree the fractions multiply: the design's
    nominal Delta (``nominal``) or each item's own degree (``per_item``).
    """

    alpha: float
    beta: Optional[float] = None
    flip_normalized: bool = False
    threshold_mode: str = "nominal"

    def __post_init__(self):
        for name in ("alpha", "beta"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1], got {value}")
        if self.threshold_mode not in THRESHOLD_MODES:
            raise ParameterError(f"Unknown threshold mode: {self.threshold_mode}")


@dataclass(frozen=True)
class DecodeOutcome:
    estimate: InfectionVector
    stage_one_healthy: np.ndarray


@dataclass(frozen=True)
class RecoveryReport:
    exact: bool
    false_positives: int
    false_negatives: int
    dd_stage1_unresolved: int


@dataclass(frozen=True)
class Calibration:
    """Optimized decoder parameters and the bound they came from."""

    alpha: float
    beta: Optional[float]
    d: float
    prefactor: float
    bound: BoundResult

    def decoder_config(
        self, delta: float, flip_normalized: bool = False, threshold_mode: str = "nominal"
    ) -> DecoderConfig:
        """Thresholds for a design of degree ``delta``; fractions below 1/delta become 1/delta."""
        floor = min(1.0, 1.0 / delta) if delta > 0 else 1.0
        return DecoderConfig(
            alpha=max(self.alpha, floor),
            beta=None if self.beta is None else max(self.beta, floor),
            flip_normalized=flip_normalized,
            threshold_mode=threshold_mode,
        )


# ── Thresholds ─────────────────────────────────────────────────────────────────


def _thresholds(design: PoolingDesign, fraction: float, mode: str) -> np.ndarray:
    """ceil(fraction * degree), at least 1."""
    if mode == "per_item":
        degree = design.item_degrees.astype(float)
    else:
        degree = np.full(design.n, float(design.delta))
    return np.maximum(1, np.ceil(fraction * degree - 1e-9)).astype(np.int64)


def _shown(displayed: OutcomeVector, config: DecoderConfig) -> OutcomeVector:
    if not config.flip_normalized:
        return displayed
    return OutcomeVector(m=displayed.m, bits=~displayed.bits, stage=Stage.DISPLAYED)


def _check_dimensions(design: PoolingDesign, displayed: OutcomeVector) -> None:
    if design.m != displayed.m:
        raise ParameterError(f"Design has {design.m} tests, outcome vector {displayed.m}")


# ── Decoders ───────────────────────────────────────────────────────────────────


def noisy_comp(
    design: PoolingDesign, displayed: OutcomeVector, config: DecoderConfig
) -> DecodeOutcome:
    """
    Declare healthy every item in at least max(1, ceil(alpha Delta)) displayed-negative tests.

    The threshold never drops below one test, so alpha = 0 still requires a
    negative test and an item in no tests at all is declared infected.
    """
    _check_dimensions(design, displayed)
    shown = _shown(displayed, config)
    healthy = negative_counts(design, shown) >= _thresholds(
        design, config.alpha, config.threshold_mode
    )
    return DecodeOutcome(
        estimate=InfectionVector.from_mask(~healthy), stage_one_healthy=healthy
    )


def noisy_dd(
    design: PoolingDesign, displayed: OutcomeVector, config: DecoderConfig
) -> DecodeOutcome:
    """
    Two-stage noisy DD.

    Stage one declares healthy exactly the items COMP declares healthy. Among
    the rest, an item is infected when it is the only item outside the
    stage-one healthy set in at least ceil(beta Delta) displayed-positive
    tests. Everything else is healthy.
    """
    if config.beta is None:
        raise ParameterError("DD needs a beta threshold")
    _check_dimensions(design, displayed)
    shown = _shown(displayed, config)

    healthy = negative_counts(design, shown) >= _thresholds(
        design, config.alpha, config.threshold_mode
    )
    solo = positive_solo_counts(design, shown, healthy)
    infected = ~healthy & (solo >= _thresholds(design, config.beta, config.threshold_mode))

    logger.debug(
        f"DD: {int(healthy.sum())} healthy after stage one, {int(infected.sum())} declared infected"
    )
    return DecodeOutcome(
        estimate=InfectionVector.from_mask(infected), stage_one_healthy=healthy
    )


def decode(
    algorithm: Algorithm,
    design: PoolingDesign,
    displayed: OutcomeVector,
    config: DecoderConfig,
) -> DecodeOutcome:
    if Algorithm(algorithm) is Algorithm.DD:
        return noisy_dd(design, displayed, config)
    return noisy_comp(design, displayed, config)


# ── Calibration and evaluation ─────────────────────────────────────────────────


def calibrate(
    theta: float,
    ch: ChannelParams,
    algorithm: Algorithm,
    design_kind: DesignKind = DesignKind.CONSTANT_COLUMN,
    opts: Optional[OptimizerSettings] = None,
) -> Calibration:
    """
    Decoder thresholds and design density from the optimized bound.

    Raises:
        ParameterError: If ``algorithm`` is not a decoder.
        OptimizationError: If the bound optimizer fails.
    """
    algorithm = Algorithm(algorithm)
    if algorithm is Algorithm.CONVERSE:
        raise ParameterError("The converse bound has no decoder to calibrate")

    result = solve_bound(
        BoundQuery(theta=theta, channel=ch, design=design_kind, algorithm=algorithm), opts
    )
    logger.info(
        f"Calibrated {algorithm.value}: alpha={result.alpha_star:.6g} "
        f"beta={result.beta_star} d={result.d_star:.6g} c={result.prefactor:.6g}"
    )
    return Calibration(
        alpha=result.alpha_star,
        beta=result.beta_star,
        d=result.d_star,
        prefactor=result.prefactor,
        bound=result,
    )


def evaluate(
    estimate: InfectionVector,
    sigma: InfectionVector,
    stage_one_healthy: Optional[np.ndarray] = None,
) -> RecoveryReport:
    """
    Compare an estimate with the true infected set.

    ``dd_stage1_unresolved`` counts healthy items that stage one failed to
    clear; it is 0 when no stage-one mask is given.
    """
    if estimate.n != sigma.n:
        raise ParameterError(f"Estimate has {estimate.n} items, truth {sigma.n}")
    guess, truth = estimate.mask, sigma.mask
    false_positives = int(np.count_nonzero(guess & ~truth))
    false_negatives = int(np.count_nonzero(~guess & truth))
    unresolved = 0
    if stage_one_healthy is not None:
        unresolved = int(np.count_nonzero(~stage_one_healthy & ~truth))
    return RecoveryReport(
        exact=false_positives == 0 and false_negatives == 0,
        false_positives=false_positives,
        false_negatives=false_negatives,
        dd_stage1_unresolved=unresolved,
    )
