"""
Exception hierarchy for the noisy group testing toolkit.
"""


class NoisyGTError(Exception):
    """Base class for every error raised by the toolkit."""


class DomainError(NoisyGTError, ValueError):
    """An argument lies outside the mathematical domain of a formula."""


class ParameterError(NoisyGTError, ValueError):
    """Invalid design, sampling or decoder parameters."""


class OptimizationError(NoisyGTError, RuntimeError):
    """The bound objective is infinite on the whole feasible region."""
