"""
Monte-Carlo experiments and the validated parameter models of the commands.
"""

import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Iterator, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .bounds import OptimizerSettings
from .decoders import Calibration, DecoderConfig, RecoveryReport, calibrate, decode, evaluate
from .design_sim import (
    PoolingDesign,
    apply_channel,
    bernoulli_design,
    constant_column_design,
    design_sizes,
    rate_bits_exact,
    sample_infection,
    true_outcomes,
)
from .errors import NoisyGTError
from .kl_math import ChannelParams, channel_capacity
from .models import Algorithm, DesignKind

logger = logging.getLogger(__name__)

DEFAULT_THETAS = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


def _split_list(value: Any) -> Any:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return [value]
    if isinstance(value, str):
        return [part.strip() for part in value.split(",") if part.strip()]
    return value


# ── Parameter models ───────────────────────────────────────────────────────────


class TableConfig(BaseModel):
    """Parameters of the bound tables (``bounds``, ``compare``, ``sweep``)."""

    model_config = ConfigDict(extra="ignore")

    theta: list[float] = Field(default_factory=lambda: list(DEFAULT_THETAS))
    p: list[float] = Field(default_factory=lambda: [0.0])
    q: list[float] = Field(default_factory=lambda: [0.0])
    alg: list[Algorithm] = Field(default_factory=lambda: [Algorithm.COMP, Algorithm.DD])
    design: DesignKind = DesignKind.CONSTANT_COLUMN

    @field_validator("theta", "p", "q", "alg", mode="before")
    @classmethod
    def split_lists(cls, value: Any) -> Any:
        return _split_list(value)

    @field_validator("theta")
    @classmethod
    def check_thetas(cls, value: list[float]) -> list[float]:
        if any(not 0.0 < theta < 1.0 for theta in value):
            raise ValueError("every theta must lie in (0, 1)")
        return value

    @field_validator("alg")
    @classmethod
    def check_algorithms(cls, value: list[Algorithm]) -> list[Algorithm]:
        if not value:
            raise ValueError("at least one algorithm is required")
        if Algorithm.CONVERSE in value:
            raise ValueError("the converse row is always included; list only comp and dd")
        return value


class ExperimentConfig(BaseModel):
    """Parameters of a ``simulate`` run."""

    model_config = ConfigDict(extra="ignore")

    n: int = Field(default=10_000, ge=2)
    theta: float = Field(default=0.5, gt=0.0, lt=1.0)
    p: float = Field(default=0.0, ge=0.0, le=1.0)
    q: float = Field(default=0.0, ge=0.0, le=1.0)
    design: DesignKind = DesignKind.CONSTANT_COLUMN
    alg: Algorithm = Algorithm.DD
    mult: list[float] = Field(default_factory=lambda: [1.0])
    trials: int = Field(default=100, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    threads: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    density: Literal["optimal", "capacity"] = "optimal"
    k_design: Optional[int] = Field(default=None, ge=1)
    threshold_mode: Literal["nominal", "per_item"] = "nominal"
    timing: bool = False
    dump_design: Optional[Path] = None

    @field_validator("mult", mode="before")
    @classmethod
    def split_mult(cls, value: Any) -> Any:
        return _split_list(value)

    @field_validator("mult")
    @classmethod
    def check_mult(cls, value: list[float]) -> list[float]:
        if not value or any(m <= 0 for m in value):
            raise ValueError("multipliers must be a non-empty list of positive numbers")
        return value

    @model_validator(mode="after")
    def check_decoder(self) -> "ExperimentConfig":
        if self.alg is Algorithm.CONVERSE:
            raise ValueError("simulate needs a decoder: comp or dd")
        return self

    @property
    def channel(self) -> ChannelParams:
        return ChannelParams(self.p, self.q)


# ── Results ────────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ResultRow:
    n: int
    theta: float
    p: float
    q: float
    design: str
    algorithm: str
    multiplier: float
    k: int
    m: Optional[int]
    delta: Optional[int]
    trials: int
    seed: int
    prefactor: Optional[float]
    d: Optional[float]
    alpha: Optional[float]
    beta: Optional[float]
    rate_bits: Optional[float]
    rate_bits_exact: Optional[float]
    success_rate: Optional[float]
    mean_false_pos: Optional[float]
    mean_false_neg: Optional[float]
    mean_unresolved: Optional[float]
    status: str = "ok"
    error: str = ""
    wallclock: Optional[float] = None

    def as_row(self, timing: bool = False) -> dict[str, Any]:
        row = asdict(self)
        if not timing:
            row.pop("wallclock")
        return row


RESULT_FIELDS = [name for name in ResultRow.__dataclass_fields__ if name != "wallclock"]


@dataclass(frozen=True)
class TrialPlan:
    """Everything one trial needs, shared read-only between worker threads."""

    config: ExperimentConfig
    channel: ChannelParams
    k: int
    m: int
    delta: int
    decoder: DecoderConfig


# ── Trials ─────────────────────────────────────────────────────────────────────


def build_design(plan: TrialPlan, trial: int) -> PoolingDesign:
    config = plan.config
    if config.design is DesignKind.BERNOULLI:
        return bernoulli_design(
            config.n, plan.m, min(1.0, plan.delta / plan.m), config.seed, trial
        )
    return constant_column_design(config.n, plan.m, plan.delta, config.seed, trial)


def run_trial(plan: TrialPlan, trial: int) -> RecoveryReport:
    """Generate, test, decode and score one seeded instance."""
    config = plan.config
    design = build_design(plan, trial)
    sigma = sample_infection(config.n, plan.k, config.seed, trial)
    displayed = apply_channel(true_outcomes(design, sigma), plan.channel, config.seed, trial)
    outcome = decode(config.alg, design, displayed, plan.decoder)
    return evaluate(outcome.estimate, sigma, outcome.stage_one_healthy)


def _density(config: ExperimentConfig, calibration: Calibration) -> float:
    if config.density == "capacity":
        return channel_capacity(config.channel).d_heuristic
    return calibration.d


def _error_rows(config: ExperimentConfig, message: str) -> Iterator[ResultRow]:
    for multiplier in config.mult:
        yield ResultRow(
            n=config.n,
            theta=config.theta,
            p=config.p,
            q=config.q,
            design=config.design.value,
            algorithm=config.alg.value,
            multiplier=multiplier,
            k=int(round(config.n**config.theta)),
            m=None,
            delta=None,
            trials=config.trials,
            seed=config.seed,
            prefactor=None,
            d=None,
            alpha=None,
            beta=None,
            rate_bits=None,
            rate_bits_exact=None,
            success_rate=None,
            mean_false_pos=None,
            mean_false_neg=None,
            mean_unresolved=None,
            status="error",
            error=message,
        )


def iter_results(
    config: ExperimentConfig,
    opts: Optional[OptimizerSettings] = None,
    on_design: Optional[Any] = None,
) -> Iterator[ResultRow]:
    """
    Run the experiment one multiplier at a time, yielding each row when done.

    Trials run on a thread pool; results are gathered in trial order, so the
    rows do not depend on the number of threads. ``on_design`` is called with
    the trial-0 design of the first multiplier.
    """
    ch = config.channel
    try:
        calibration = calibrate(config.theta, ch, config.alg, config.design, opts)
    except NoisyGTError as exc:
        logger.warning(f"Calibration failed: {exc}")
        yield from _error_rows(config, str(exc))
        return

    d = _density(config, calibration)
    for index, multiplier in enumerate(config.mult):
        started = time.perf_counter()
        try:
            sizes = design_sizes(
                config.n, config.theta, calibration.prefactor, d, multiplier, config.k_design
            )
        except NoisyGTError as exc:
            logger.warning(f"Sizing failed at multiplier {multiplier}: {exc}")
            yield from _error_rows(config.model_copy(update={"mult": [multiplier]}), str(exc))
            continue

        plan = TrialPlan(
            config=config,
            channel=ch,
            k=sizes.k,
            m=sizes.m,
            delta=sizes.delta,
            decoder=calibration.decoder_config(
                sizes.delta, flip_normalized=ch.flipped, threshold_mode=config.threshold_mode
            ),
        )
        if index == 0 and on_design is not None:
            on_design(build_design(plan, 0))

        logger.info(
            f"Multiplier {multiplier}: k={sizes.k} m={sizes.m} delta={sizes.delta}, "
            f"{config.trials} trials on {config.threads} threads"
        )
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            reports = list(pool.map(lambda t: run_trial(plan, t), range(config.trials)))

        exact = np.array([r.exact for r in reports], dtype=float)
        yield ResultRow(
            n=config.n,
            theta=config.theta,
            p=config.p,
            q=config.q,
            design=config.design.value,
            algorithm=config.alg.value,
            multiplier=multiplier,
            k=sizes.k,
            m=sizes.m,
            delta=sizes.delta,
            trials=config.trials,
            seed=config.seed,
            prefactor=calibration.prefactor,
            d=d,
            alpha=plan.decoder.alpha,
            beta=plan.decoder.beta,
            rate_bits=1.0 / (multiplier * calibration.prefactor * math.log(2.0)),
            rate_bits_exact=rate_bits_exact(config.n, sizes.k, sizes.m),
            success_rate=float(exact.mean()),
            mean_false_pos=float(np.mean([r.false_positives for r in reports])),
            mean_false_neg=float(np.mean([r.false_negatives for r in reports])),
            mean_unresolved=float(np.mean([r.dd_stage1_unresolved for r in reports])),
            wallclock=time.perf_counter() - started,
        )
