"""
Shared enumerations for designs, algorithms and outcome stages.
"""

from enum import Enum


class DesignKind(str, Enum):
    """Pooling design family."""

    CONSTANT_COLUMN = "cc"
    BERNOULLI = "bernoulli"


class Algorithm(str, Enum):
    """Decoder (or converse) a bound refers to."""

    COMP = "comp"
    DD = "dd"
    CONVERSE = "converse"


class Stage(str, Enum):
    """Whether an outcome vector is before or after the noisy channel."""

    TRUE = "true"
    DISPLAYED = "displayed"
