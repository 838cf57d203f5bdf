"""
Numerical library of the noisy group testing toolkit.
"""

from .bounds import (
    BoundQuery,
    BoundResult,
    OptimizerSettings,
    converse_constant,
    rate_sweep,
    reference_result,
    solve_bound,
    special_channel_constant,
)
from .decoders import DecoderConfig, calibrate, decode, evaluate
from .design_sim import (
    PoolingDesign,
    bernoulli_design,
    constant_column_design,
    sample_infection,
)
from .errors import DomainError, NoisyGTError, OptimizationError, ParameterError
from .experiment import ExperimentConfig, TableConfig, iter_results
from .kl_math import ChannelParams, channel_capacity
from .models import Algorithm, DesignKind
from .output import TableWriter, read_design, write_design

__all__ = [
    "Algorithm",
    "BoundQuery",
    "BoundResult",
    "ChannelParams",
    "DecoderConfig",
    "DesignKind",
    "DomainError",
    "ExperimentConfig",
    "NoisyGTError",
    "OptimizationError",
    "OptimizerSettings",
    "ParameterError",
    "PoolingDesign",
    "TableConfig",
    "TableWriter",
    "bernoulli_design",
    "calibrate",
    "channel_capacity",
    "constant_column_design",
    "converse_constant",
    "decode",
    "evaluate",
    "iter_results",
    "rate_sweep",
    "read_design",
    "reference_result",
    "sample_infection",
    "solve_bound",
    "special_channel_constant",
    "write_design",
]
